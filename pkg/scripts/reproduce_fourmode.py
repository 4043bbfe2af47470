"""Four-mode benchmark: spectra, pinches, degeneracies, loop and sphere tests.

Usage: python3 scripts/reproduce_fourmode.py [--out DIR] [--skip-sphere]
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from sympectra.berry import (SphereSpec, circle_loop, locate_degeneracy, loop_holonomy,
                             singular_gap_fn, sphere_scan)
from sympectra.cli import find_pinches
from sympectra.models import builtin, parametric_transfer, squeezing_spectra


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/fourmode")
    ap.add_argument("--skip-sphere", action="store_true", help="skip the 41-parallel sphere scan")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {}

    for variant in ("codim3", "codim2"):
        src = builtin(f"fourmode-{variant}")
        sp = squeezing_spectra(src, 0.0, 1.5, eta=1e-2)
        sp.write_csv(out / f"spectra_{variant}.csv")
        summary[f"pinches_{variant}"] = find_pinches(sp.omegas, sp.anti_db)

    ev3 = parametric_transfer(builtin("fourmode-codim3"), ["g11", "g22"])
    t0 = time.perf_counter()
    rep = locate_degeneracy(singular_gap_fn(ev3, 2), [0.8, 1.35, 1.25], 2, step=0.025)
    summary["degeneracy_codim3"] = {**rep.to_json(), "seconds": time.perf_counter() - t0}

    ev2 = parametric_transfer(builtin("fourmode-codim2"), ["g11"])
    rep = locate_degeneracy(singular_gap_fn(ev2, 2), [0.75, 1.35], 2, step=0.0125)
    summary["degeneracy_codim2"] = rep.to_json()

    hol = loop_holonomy(circle_loop(ev2, [0.75, 1.35], 0.25))
    summary["loop_codim2_signs"] = np.round(hol.signs[:4], 12).tolist()

    if not args.skip_sphere:
        t0 = time.perf_counter()
        tr = sphere_scan(SphereSpec((0.8, 1.35, 1.25), 0.5, ev3, np.linspace(0, np.pi, 41)))
        tr.write_csv(out / "berry_codim3.csv")
        summary["sphere"] = {"net_phase": tr.net()[:4].tolist(), "flagged": tr.flagged(),
                             "seconds": time.perf_counter() - t0}

    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
