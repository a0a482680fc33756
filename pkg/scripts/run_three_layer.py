#!/usr/bin/env python3
"""Three-layer diode steady state in both transport modes.

Runs the energy-transport and the drift-diffusion (T = 1) steady states of
the three-layer device and reports where the spin density n3 peaks and how
the peak heights compare between the modes.  Writes the usual profile CSVs
into <outdir>/energy_transport and <outdir>/drift_diffusion.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from spinet.cli import main as spinet_main, read_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=334)
    ap.add_argument("--dt", type=float, default=5e-4)
    ap.add_argument("--threshold", type=float, default=1e-8)
    ap.add_argument("--polarization", type=float, default=None)
    ap.add_argument("--outdir", default="out/three_layer")
    args = ap.parse_args(argv)

    flags = ["--preset", "three-layer", "--m", str(args.m), "--dt", str(args.dt),
             "--threshold", str(args.threshold)]
    if args.polarization is not None:
        flags += ["--polarization", str(args.polarization)]

    peaks = {}
    for mode in ("energy-transport", "drift-diffusion"):
        out = Path(args.outdir) / mode.replace("-", "_")
        rc = spinet_main(["simulate", *flags, "--mode", mode, "--outdir", str(out)])
        if rc != 0:
            print(f"{mode} run failed (exit {rc})", file=sys.stderr)
            return rc
        header, data, _ = read_csv(out / "n_profile.csv")
        x, n3 = data[:, 0], data[:, header.index("n3")]
        i = int(np.argmax(np.abs(n3)))
        peaks[mode] = (float(np.abs(n3[i])), float(x[i]))
        print(f"{mode:17s} max|n3| = {peaks[mode][0]:.4e} at x = {x[i]:.4f}")

    et, dd = peaks["energy-transport"][0], peaks["drift-diffusion"][0]
    print(f"energy-transport peak / drift-diffusion peak = {et / dd:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
