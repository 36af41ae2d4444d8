"""Figure construction for each documented output schema.

Rendering is deterministic for deterministic inputs: a fixed style, no
timestamps, and the Agg backend throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import (
    SchemaError,
    read_manifest,
    read_me_table,
    read_phase_diagram,
    read_spectrum,
    read_sweep,
    read_trajectory,
)

__all__ = ["FigureSpec", "render", "KINDS"]

KINDS = ("spectrum", "heatmap", "me_table", "dispersion", "rabi")

_DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input files, figure kind, and styling options."""

    kind: str
    path: str
    out: str
    manifest: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def _josephson_potential(circuit: dict, phi: np.ndarray) -> np.ndarray:
    n, m = int(circuit["n_arm"]), int(circuit["m_arm"])
    kappa, phi_ext = float(circuit["kappa"]), float(circuit["phi_ext"])
    return (
        -n * float(circuit["ej_n"]) * np.cos(m * phi - kappa * phi_ext / n)
        - m * float(circuit["ej_m"]) * np.cos(n * phi + (1.0 - kappa) * phi_ext / m)
    )


def _render_spectrum(spec: FigureSpec) -> plt.Figure:
    data = read_spectrum(spec.path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    code = {}
    if spec.manifest:
        manifest = read_manifest(spec.manifest)
        code = manifest.get("code_space") or {}
        circuit = manifest.get("circuit_solved")
        if circuit:
            phi = np.linspace(-np.pi, np.pi, 601)
            ax.plot(phi, _josephson_potential(circuit, phi), color="0.6", lw=1.2,
                    label="Josephson potential")
            ax.set_xlabel("phase (rad)")
            ax.set_xlim(-np.pi, np.pi)
    roles = {}
    if code:
        roles = {int(code["i0"]): ("|0>", "tab:blue"),
                 int(code["i1"]): ("|1>", "tab:red"),
                 int(code["i2"]): ("|2>", "tab:orange")}
    for level, energy in zip(data["level"], data["energy_ghz"]):
        label, color = roles.get(int(level), (None, "0.25"))
        ax.axhline(energy, color=color, lw=1.8 if label else 1.0,
                   ls="--" if label == "|2>" else "-",
                   label=f"{label} (level {level})" if label else None)
    ax.set_ylabel("energy (GHz)")
    ax.set_title(spec.options.get("title", "Energy levels"))
    if roles or spec.manifest:
        ax.legend(loc="upper right", fontsize=8)
    return fig


def _render_heatmap(spec: FigureSpec) -> plt.Figure:
    data = read_phase_diagram(spec.path)
    metric = spec.options.get("metric", "alpha_r")
    if metric not in ("alpha_r", "me_charge_01", "me_flux_01", "omega01_over_ec"):
        raise SchemaError(f"unknown heatmap metric {metric!r}")
    beta = np.unique(data["beta"])
    eta = np.unique(data["eta"])
    shape = (beta.size, eta.size)
    if shape[0] * shape[1] != data["beta"].size:
        raise SchemaError(f"{spec.path}: rows do not form a full (beta, eta) grid")
    values = data[metric].reshape(shape)
    if metric == "alpha_r":
        values = np.abs(values)

    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    mesh = ax.pcolormesh(eta, beta, values, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=("|alpha_r|" if metric == "alpha_r" else metric))
    ax.set_xlabel("eta = ej_m / ec")
    ax.set_ylabel("beta = ej_n / ec")
    ax.set_title(spec.options.get("title", f"{metric} over (beta, eta)"))

    # mark the code-space assignment regions when the indices are present
    i1 = data["i1"].reshape(shape)
    i2 = data["i2"].reshape(shape)
    valid = (i1 >= 0) & (i2 >= 0)
    combos = sorted({(int(a), int(b)) for a, b in zip(i1[valid], i2[valid])})
    for a, b in combos:
        cells = (i1 == a) & (i2 == b)
        ax.text(
            float(np.mean(eta[np.any(cells, axis=0)])),
            float(np.mean(beta[np.any(cells, axis=1)])),
            f"({a},{b})",
            color="white", fontsize=7, ha="center", va="center",
        )
    return fig


def _render_me_table(spec: FigureSpec) -> plt.Figure:
    data = read_me_table(spec.path)
    tables = data["tables"]
    fig, axes = plt.subplots(1, len(tables), figsize=(4.6 * len(tables), 4.2))
    if len(tables) == 1:
        axes = [axes]
    suffix = " / omega01" if data["normalized"] else ""
    for ax, (channel, table) in zip(axes, sorted(tables.items())):
        image = ax.imshow(np.log10(np.maximum(table, 1e-18)), cmap="magma")
        fig.colorbar(image, ax=ax, label=f"log10 |element|{suffix}")
        size = table.shape[0]
        if size <= 10:
            for i in range(size):
                for j in range(size):
                    ax.text(j, i, f"{table[i, j]:.2g}", fontsize=5,
                            ha="center", va="center", color="white")
        ax.set_title(f"{channel} channel")
        ax.set_xlabel("level")
        ax.set_ylabel("level")
    return fig


def _render_dispersion(spec: FigureSpec) -> plt.Figure:
    data = read_sweep(spec.path)
    have_metrics = np.any(np.isfinite(data["omega01"]))
    nrows = 2 if have_metrics else 1
    fig, axes = plt.subplots(nrows, 1, figsize=(6.4, 4.8), sharex=True)
    axes = np.atleast_1d(axes)
    for k in range(data["energies"].shape[1]):
        axes[0].plot(data["param_value"], data["energies"][:, k], lw=1.0)
    axes[0].set_ylabel("energy (GHz)")
    axes[0].set_title(spec.options.get("title", "Spectrum along the sweep"))
    if have_metrics:
        axes[1].plot(data["param_value"], data["omega01"], color="tab:red", lw=1.2)
        axes[1].set_ylabel("omega01 (GHz)")
    axes[-1].set_xlabel(spec.options.get("xlabel", "parameter"))
    return fig


def _render_rabi(spec: FigureSpec) -> plt.Figure:
    data = read_trajectory(spec.path)
    fig, ax = plt.subplots(figsize=(6.8, 4.2))
    for k in range(data["populations"].shape[1]):
        ax.plot(data["t_ns"], data["populations"][:, k], lw=1.0, label=f"level {k}")
    ax.plot(data["t_ns"], data["norm"], color="0.4", ls=":", lw=1.0, label="norm")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.05)
    ax.set_title(spec.options.get("title", "Flux-driven populations"))
    ax.legend(loc="center right", fontsize=7, ncols=2)
    return fig


_RENDERERS = {
    "spectrum": _render_spectrum,
    "heatmap": _render_heatmap,
    "me_table": _render_me_table,
    "dispersion": _render_dispersion,
    "rabi": _render_rabi,
}


def render(spec: FigureSpec) -> str:
    """Render the figure to ``spec.out`` and return the path."""
    with plt.rc_context(rc=matplotlib.rcParamsDefault):
        fig = _RENDERERS[spec.kind](spec)
        try:
            fig.savefig(spec.out, dpi=_DPI, metadata={"Software": "nmon-plots"})
        finally:
            plt.close(fig)
    return spec.out
