#!/usr/bin/env python3
"""Run every committed figure preset and, when available, render the plots.

Usage:
    python scripts/reproduce_figures.py [--out DIR] [--skip-heavy] [--render]

Heavy presets (the phase diagrams fig3/fig7/figA1) parallelize across
processes via the NMON_WORKERS environment variable.
"""

import argparse
import os
import shutil
import subprocess
import sys
import time

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

PRESETS = [
    ("fig2", "spectrum", []),
    ("fig3", "phase-diagram", ["heavy"]),
    ("fig5", "sweep", []),
    ("fig6", "spectrum", []),
    ("fig7", "phase-diagram", ["heavy"]),
    ("fig8", "rabi", []),
    ("figA1", "phase-diagram", ["heavy"]),
    ("figA2", "spectrum", []),
]

RENDER_KINDS = {
    "fig2": ("spectrum", "spectrum.csv"),
    "fig3": ("heatmap", "phase_diagram.csv"),
    "fig5": ("dispersion", "sweep.csv"),
    "fig6": ("spectrum", "spectrum.csv"),
    "fig7": ("heatmap", "phase_diagram.csv"),
    "fig8": ("rabi", "trajectory.csv"),
    "figA1": ("heatmap", "phase_diagram.csv"),
    "figA2": ("spectrum", "spectrum.csv"),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(REPO, "out"))
    parser.add_argument("--skip-heavy", action="store_true",
                        help="skip the multi-minute phase-diagram presets")
    parser.add_argument("--render", action="store_true",
                        help="also render figures (needs the nmon-plots package)")
    args = parser.parse_args()

    for name, task, tags in PRESETS:
        if args.skip_heavy and "heavy" in tags:
            print(f"-- skipping {name} (heavy)")
            continue
        outdir = os.path.join(args.out, name)
        config = os.path.join(REPO, "configs", f"{name}.conf")
        start = time.time()
        code = subprocess.call(
            [sys.executable, "-m", "nmon.cli", task, "--config", config, "--out", outdir]
        )
        print(f"-- {name}: exit {code} in {time.time() - start:.1f}s -> {outdir}")
        if code != 0:
            return code

        if args.render and shutil.which("nmon-render"):
            kind, csv = RENDER_KINDS[name]
            render_cmd = [
                "nmon-render", "--kind", kind,
                "--in", os.path.join(outdir, csv),
                "--out", os.path.join(outdir, f"{name}.png"),
            ]
            if kind in ("spectrum",):
                render_cmd += ["--manifest", os.path.join(outdir, "manifest.json")]
            code = subprocess.call(render_cmd)
            print(f"   render {name}: exit {code}")
            if code != 0:
                return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
