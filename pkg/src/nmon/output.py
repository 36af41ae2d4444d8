"""Bit-stable data emission: CSV/JSON writers and the run manifest.

Floats are rendered with 17 significant digits in lowercase scientific
notation so identical runs produce byte-identical files.  The manifest
records the fully resolved configuration, the toolkit version, and the
charge cutoffs actually used, which is enough to reproduce the run.
"""

from __future__ import annotations

import json
import os

import numpy as np

__all__ = ["format_value", "write_table", "write_manifest"]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def _json_ready(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # strict JSON has no NaN/Inf
        return float(value) if np.isfinite(value) else None
    return value


def write_table(directory: str, name: str, header: list[str], rows, fmt: str) -> str:
    """Write rows as ``name.csv`` or ``name.json`` depending on ``fmt``."""
    if fmt == "csv":
        path = os.path.join(directory, f"{name}.csv")
        lines = [",".join(header)]
        lines.extend(",".join(format_value(cell) for cell in row) for row in rows)
        payload = "\n".join(lines) + "\n"
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(payload)
    elif fmt == "json":
        path = os.path.join(directory, f"{name}.json")
        records = [
            {key: _json_ready(cell) for key, cell in zip(header, row)} for row in rows
        ]
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(records, handle, indent=1)
            handle.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def write_manifest(directory: str, manifest: dict) -> str:
    path = os.path.join(directory, "manifest.json")

    def scrub(value):
        if isinstance(value, dict):
            return {key: scrub(item) for key, item in value.items()}
        if isinstance(value, (list, tuple)):
            return [scrub(item) for item in value]
        return _json_ready(value)

    with open(path, "w", encoding="utf-8") as handle:
        json.dump(scrub(manifest), handle, indent=1, sort_keys=True)
        handle.write("\n")
    return path
