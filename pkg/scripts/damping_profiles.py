"""Damping-force profiles f11(R) at 9, 10 and 11 uK for the rb87 preset.

    python3 scripts/damping_profiles.py [--out DIR] [--t-eval SECONDS]
"""

import argparse

import numpy as np

from spinboltz.config import preset
from spinboltz.scenarios import run_damping


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/damping")
    ap.add_argument("--t-eval", type=float, default=None)
    args = ap.parse_args()

    res = run_damping(preset("rb87"), (9e-6, 10e-6, 11e-6), args.t_eval, args.out, svg=True)
    f11 = res.f11
    print(f"non-decreasing in T (interior): {bool(np.all(np.diff(f11[:, 1:-1], axis=0) >= 0))}")
    print(f"non-decreasing in R: {bool(np.all(np.diff(f11, axis=1) >= 0))}")
    for T, row in zip(res.temperatures, f11):
        print(f"T = {T * 1e6:.0f} uK: f11(R_max) = {row[-1]:.4e} N")
    for f in res.files:
        print(f"wrote {f}")


if __name__ == "__main__":
    main()
