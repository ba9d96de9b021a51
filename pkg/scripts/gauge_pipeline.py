"""Damping force to thermal gauge potentials, end to end, for the rb87 preset.

    python3 scripts/gauge_pipeline.py [--out DIR] [--minkowski]
"""

import argparse
from pathlib import Path

import numpy as np

from spinboltz.config import preset
from spinboltz.scenarios import run_damping, run_gauge


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/gauge")
    ap.add_argument("--minkowski", action="store_true", help="use the (-, +, +, +) metric in the Lagrangian")
    args = ap.parse_args()
    out = Path(args.out)

    cfg = preset("rb87").override(**{"gauge.minkowski": args.minkowski})
    damping = run_damping(cfg, out_dir=out / "damping")
    res = run_gauge(cfg, damping, out / "potentials", svg=True)
    cy, cz = res.centre
    print(f"temperature = {res.temperature * 1e6:.0f} uK")
    print(f"poisson residual = {res.poisson_residual:.2e}, analytic check = {res.analytic_error:.2e}")
    print(f"max |phi| on axis = {np.abs(res.phi[:, cy, cz]).max():.4e} J")
    print(f"max |A| on axis = {np.abs(res.vector_potential[:, :, cy, cz]).max():.4e} N s")
    print(f"max matching residual = {res.matching_residual.max():.4e}")
    for f in damping.files + res.files:
        print(f"wrote {f}")


if __name__ == "__main__":
    main()
