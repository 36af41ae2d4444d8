"""Schema validation and rendering of synthetic input files."""

import json

import numpy as np
import pytest

from nmonplot import FigureSpec, SchemaError, render
from nmonplot.schemas import read_me_table, read_spectrum, read_sweep


def write(path, text):
    path.write_text(text.strip() + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def spectrum_csv(tmp_path):
    return write(tmp_path / "spectrum.csv", """
level,energy_ghz,parity
0,0.0000000000000000e+00,1.0000000000000000e+00
1,5.9595400000000002e+00,1.0000000000000000e+00
2,5.9625900000000001e+00,-1.0000000000000000e+00
3,1.0143840000000000e+01,-1.0000000000000000e+00
""")


@pytest.fixture
def manifest_json(tmp_path):
    manifest = {
        "circuit_solved": {
            "n_arm": 2, "m_arm": 3, "ej_n": 4.5, "ej_m": 0.9, "ec": 0.06,
            "kappa": 0.5, "ng": 0.0, "phi_ext": 0.0,
        },
        "code_space": {"i0": 0, "i1": 3, "i2": 2, "omega01": 10.1, "alpha_r": -0.1},
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return str(path)


@pytest.fixture
def phase_diagram_csv(tmp_path):
    lines = ["beta,eta,alpha_r,me_charge_01,me_flux_01,omega01_over_ec,i1,i2,converged"]
    for b in (40.0, 80.0):
        for e in (5.0, 15.0):
            lines.append(
                f"{b:.16e},{e:.16e},{-0.08:.16e},{0.2:.16e},{0.15:.16e},"
                f"{60.0:.16e},3,6,true"
            )
    return write(tmp_path / "phase_diagram.csv", "\n".join(lines))


@pytest.fixture
def sweep_csv(tmp_path):
    lines = ["param_value,E_0,E_1,E_2,omega01,alpha_r,me_charge_01,me_flux_01"]
    for x in np.linspace(0, 1, 5):
        lines.append(
            f"{x:.16e},{0.0:.16e},{1.0 + 0.01 * x:.16e},{2.1:.16e},"
            f"{1.0:.16e},{-0.1:.16e},{0.2:.16e},{0.1:.16e}"
        )
    return write(tmp_path / "sweep.csv", "\n".join(lines))


@pytest.fixture
def me_table_csv(tmp_path):
    lines = ["channel,i,j,abs_value,normalized"]
    for channel in ("charge", "flux"):
        for i in range(3):
            for j in range(3):
                lines.append(f"{channel},{i},{j},{0.1 * (i + j):.16e},true")
    return write(tmp_path / "me_table.csv", "\n".join(lines))


@pytest.fixture
def trajectory_csv(tmp_path):
    lines = ["t_ns,pop_0,pop_1,norm"]
    for t in np.linspace(0, 10, 21):
        p = float(np.sin(0.3 * t) ** 2)
        lines.append(f"{t:.16e},{1 - p:.16e},{p:.16e},{1.0:.16e}")
    return write(tmp_path / "trajectory.csv", "\n".join(lines))


def test_render_each_kind(tmp_path, spectrum_csv, manifest_json, phase_diagram_csv,
                          sweep_csv, me_table_csv, trajectory_csv):
    jobs = [
        ("spectrum", spectrum_csv, manifest_json),
        ("heatmap", phase_diagram_csv, None),
        ("dispersion", sweep_csv, None),
        ("me_table", me_table_csv, None),
        ("rabi", trajectory_csv, None),
    ]
    for kind, path, manifest in jobs:
        out = tmp_path / f"{kind}.png"
        render(FigureSpec(kind=kind, path=path, out=str(out), manifest=manifest))
        assert out.exists() and out.stat().st_size > 1000


def test_rendering_deterministic(tmp_path, phase_diagram_csv):
    out_a = tmp_path / "a.png"
    out_b = tmp_path / "b.png"
    render(FigureSpec(kind="heatmap", path=phase_diagram_csv, out=str(out_a)))
    render(FigureSpec(kind="heatmap", path=phase_diagram_csv, out=str(out_b)))
    assert out_a.read_bytes() == out_b.read_bytes()


def test_rendering_does_not_touch_inputs(tmp_path, sweep_csv):
    before = open(sweep_csv, "rb").read()
    render(FigureSpec(kind="dispersion", path=sweep_csv, out=str(tmp_path / "x.png")))
    assert open(sweep_csv, "rb").read() == before


def test_schema_errors_name_columns(tmp_path):
    bad = write(tmp_path / "bad.csv", "level,energy_ghz\n0,1.0")
    with pytest.raises(SchemaError, match="parity"):
        read_spectrum(bad)
    extra = write(tmp_path / "extra.csv", "level,energy_ghz,parity,color\n0,1.0,1.0,red")
    with pytest.raises(SchemaError, match="color"):
        read_spectrum(extra)
    nonnum = write(tmp_path / "nonnum.csv", "level,energy_ghz,parity\n0,abc,1.0")
    with pytest.raises(SchemaError, match="energy_ghz"):
        read_spectrum(nonnum)


def test_sweep_nan_metrics_render_energies_only(tmp_path):
    lines = ["param_value,E_0,E_1,omega01,alpha_r,me_charge_01,me_flux_01"]
    for x in (0.0, 0.5, 1.0):
        lines.append(f"{x:.16e},{0.0:.16e},{4.0:.16e},nan,nan,nan,nan")
    path = write(tmp_path / "sweep.csv", "\n".join(lines))
    data = read_sweep(path)
    assert np.all(np.isnan(data["alpha_r"]))
    out = tmp_path / "plot.png"
    render(FigureSpec(kind="dispersion", path=path, out=str(out)))
    assert out.exists()


def test_unknown_kind_rejected(tmp_path, sweep_csv):
    with pytest.raises(SchemaError, match="kind"):
        FigureSpec(kind="pie", path=sweep_csv, out=str(tmp_path / "x.png"))


def test_me_table_roundtrip(me_table_csv):
    data = read_me_table(me_table_csv)
    assert set(data["tables"]) == {"charge", "flux"}
    assert data["tables"]["charge"].shape == (3, 3)
    assert data["tables"]["charge"][1, 2] == pytest.approx(0.3)
