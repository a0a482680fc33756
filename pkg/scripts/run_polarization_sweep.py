#!/usr/bin/env python3
"""Temperature maxima of both device presets over a polarization sweep.

For each preset, runs one energy-transport steady state per polarization
value and prints the maximum temperature trend (it rises with p for the
three-layer device and falls for the five-layer one).  CSVs land in
<outdir>/<preset>.
"""

import argparse
import sys
from pathlib import Path

from spinet.cli import main as spinet_main, read_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=334)
    ap.add_argument("--dt", type=float, default=5e-4)
    ap.add_argument("--threshold", type=float, default=1e-8)
    ap.add_argument("--p-values", default="0,0.33,0.66")
    ap.add_argument("--presets", default="three-layer,five-layer")
    ap.add_argument("--outdir", default="out/sweep")
    args = ap.parse_args(argv)

    for preset in args.presets.split(","):
        out = Path(args.outdir) / preset
        rc = spinet_main(
            ["sweep", "--preset", preset, "--p-values", args.p_values,
             "--m", str(args.m), "--dt", str(args.dt),
             "--threshold", str(args.threshold), "--outdir", str(out)]
        )
        if rc != 0:
            print(f"{preset} sweep failed (exit {rc})", file=sys.stderr)
            return rc
        _, summary, _ = read_csv(out / "sweep_summary.csv")
        trend = " ".join(f"p={p:g}: max T = {t:.6f}" for p, t in summary)
        print(f"{preset}: {trend}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
