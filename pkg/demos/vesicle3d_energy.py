"""Equilibrium energy of a constrained 3D prolate vesicle.

Runs the ``prolate3d-nu*`` preset and reports the final energy E = int H^2,
also in units of the sphere (E / 4 pi).  Pass ``--reference`` with an
axisymmetric reference energy (same units as E) to get the relative error; the
comparison passes within 15%.  Takes hours at h = 0.08.

    python demos/vesicle3d_energy.py [--nu 0.65] [--reference E] [--out prolate]
"""
import argparse
from pathlib import Path

import numpy as np

from geoflow.cli import execute, parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=0.65)
    ap.add_argument("--kind", choices=("prolate", "oblate"), default="prolate")
    ap.add_argument("--h", type=float, default=0.08)
    ap.add_argument("--max-iters", type=int)
    ap.add_argument("--reference", type=float, help="reference equilibrium energy")
    ap.add_argument("--out", type=Path, default=Path("vesicle3d"))
    args = ap.parse_args()

    spec = parse_config(overrides={"h": args.h, "max_iters": args.max_iters,
                                   "output_every": 1, "snapshot_every": 250},
                        preset_name=f"{args.kind}3d-nu{args.nu}")
    _, records = execute(spec, args.out)
    V0, A0 = spec.flow.V0, spec.flow.A0
    E = records[-1].energy
    print(f"{args.kind} nu={args.nu}: E={E:.4f} (E/4pi={E / (4 * np.pi):.4f}) after "
          f"{records[-1].iter} iterations; max|dV|/V="
          f"{max(abs(r.volume / V0 - 1) for r in records):.1e}, max|dA|/A="
          f"{max(abs(r.area / A0 - 1) for r in records):.1e}")
    if args.reference:
        rel = E / args.reference - 1
        print(f"relative to reference {args.reference:.4f}: {rel:+.1%} "
              f"{'PASS' if abs(rel) <= 0.15 else 'FAIL'} (tol 15%)")


if __name__ == "__main__":
    main()
