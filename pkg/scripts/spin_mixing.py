"""Pair-population oscillations for the rb87 preset, with and without relaxation.

    python3 scripts/spin_mixing.py [--out DIR]
"""

import argparse
from pathlib import Path

from spinboltz.config import preset
from spinboltz.io import atomic_write, svg_line_plot
from spinboltz.scenarios import run_simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/spin_mixing")
    out = Path(ap.parse_args().out)

    runs = {}
    for label, relax in (("relaxation", True), ("no_relaxation", False)):
        cfg = preset("rb87").override(**{"dynamics.relaxation": relax})
        res = run_simulate(cfg, out / label, svg=True)
        runs[label] = res
        print(f"[{label}]\n{res.message}")

    traj = runs["relaxation"].trajectory
    p00, ppm = traj.populations
    flat = runs["no_relaxation"].trajectory
    plot = svg_line_plot([("P00", traj.times, p00), ("P00, no relaxation", flat.times, flat.populations[0])],
                         "time_s", "P00", "zero-pair population")
    print(f"wrote {atomic_write(out / 'p00_comparison.svg', plot)}")


if __name__ == "__main__":
    main()
