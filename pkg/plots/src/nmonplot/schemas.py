"""Reading and validating the toolkit's documented CSV schemas.

Each loader returns plain numpy arrays keyed by column name and raises
``SchemaError`` naming the offending column when a file does not match
its documented layout.  Input files are never modified.
"""

from __future__ import annotations

import csv
import json
import re

import numpy as np

__all__ = [
    "SchemaError",
    "read_spectrum",
    "read_phase_diagram",
    "read_sweep",
    "read_me_table",
    "read_trajectory",
    "read_manifest",
]


class SchemaError(ValueError):
    """The input file does not match the documented schema."""


def _read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    return header, rows


def _check_columns(path: str, header: list[str], expected: list[str]) -> None:
    for column in expected:
        if column not in header:
            raise SchemaError(f"{path}: missing column {column!r}")
    for column in header:
        if column not in expected:
            raise SchemaError(f"{path}: unexpected column {column!r}")
    if header != expected:
        raise SchemaError(f"{path}: columns out of order, expected {expected}")


def _floats(path: str, rows: list[list[str]], header: list[str], column: str) -> np.ndarray:
    index = header.index(column)
    try:
        return np.array([float(row[index]) for row in rows])
    except (ValueError, IndexError):
        raise SchemaError(f"{path}: column {column!r} is not numeric") from None


def _bools(path: str, rows: list[list[str]], header: list[str], column: str) -> np.ndarray:
    index = header.index(column)
    values = []
    for row in rows:
        cell = row[index].strip().lower()
        if cell not in ("true", "false"):
            raise SchemaError(f"{path}: column {column!r} is not boolean")
        values.append(cell == "true")
    return np.array(values, dtype=bool)


def read_spectrum(path: str) -> dict:
    header, rows = _read_rows(path)
    _check_columns(path, header, ["level", "energy_ghz", "parity"])
    return {
        "level": _floats(path, rows, header, "level").astype(int),
        "energy_ghz": _floats(path, rows, header, "energy_ghz"),
        "parity": _floats(path, rows, header, "parity"),
    }


def read_phase_diagram(path: str) -> dict:
    header, rows = _read_rows(path)
    expected = ["beta", "eta", "alpha_r", "me_charge_01", "me_flux_01",
                "omega01_over_ec", "i1", "i2", "converged"]
    _check_columns(path, header, expected)
    data = {name: _floats(path, rows, header, name) for name in expected[:6]}
    data["i1"] = _floats(path, rows, header, "i1").astype(int)
    data["i2"] = _floats(path, rows, header, "i2").astype(int)
    data["converged"] = _bools(path, rows, header, "converged")
    return data


def read_sweep(path: str) -> dict:
    header, rows = _read_rows(path)
    if not header or header[0] != "param_value":
        raise SchemaError(f"{path}: missing column 'param_value'")
    energy_cols = [name for name in header if re.fullmatch(r"E_\d+", name)]
    expected = (
        ["param_value"]
        + [f"E_{k}" for k in range(len(energy_cols))]
        + ["omega01", "alpha_r", "me_charge_01", "me_flux_01"]
    )
    _check_columns(path, header, expected)
    data = {
        "param_value": _floats(path, rows, header, "param_value"),
        "energies": np.column_stack(
            [_floats(path, rows, header, f"E_{k}") for k in range(len(energy_cols))]
        ),
    }
    for name in ("omega01", "alpha_r", "me_charge_01", "me_flux_01"):
        data[name] = _floats(path, rows, header, name)
    return data


def read_me_table(path: str) -> dict:
    header, rows = _read_rows(path)
    _check_columns(path, header, ["channel", "i", "j", "abs_value", "normalized"])
    channel_idx = header.index("channel")
    channels = sorted({row[channel_idx] for row in rows})
    tables = {}
    for channel in channels:
        subset = [row for row in rows if row[channel_idx] == channel]
        i = _floats(path, subset, header, "i").astype(int)
        j = _floats(path, subset, header, "j").astype(int)
        values = _floats(path, subset, header, "abs_value")
        size = int(max(i.max(), j.max())) + 1
        table = np.full((size, size), np.nan)
        table[i, j] = values
        tables[channel] = table
    normalized = _bools(path, rows, header, "normalized")
    return {"tables": tables, "normalized": bool(normalized.all())}


def read_trajectory(path: str) -> dict:
    header, rows = _read_rows(path)
    if not header or header[0] != "t_ns" or header[-1] != "norm":
        raise SchemaError(f"{path}: expected 't_ns' first and 'norm' last")
    pop_cols = [name for name in header if re.fullmatch(r"pop_\d+", name)]
    expected = ["t_ns"] + [f"pop_{k}" for k in range(len(pop_cols))] + ["norm"]
    _check_columns(path, header, expected)
    return {
        "t_ns": _floats(path, rows, header, "t_ns"),
        "populations": np.column_stack(
            [_floats(path, rows, header, f"pop_{k}") for k in range(len(pop_cols))]
        ),
        "norm": _floats(path, rows, header, "norm"),
    }


def read_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    if not isinstance(manifest, dict):
        raise SchemaError(f"{path}: manifest is not an object")
    return manifest
