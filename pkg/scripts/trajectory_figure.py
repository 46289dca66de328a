"""Trace the divergence boundary of a configuration and write it as CSV.

Example::

    python scripts/trajectory_figure.py scripts/configs/degenerate_touching.yaml out.csv
"""
import argparse
import csv

from frobpade.config import RunConfig
from frobpade.equilibrium import densities_from_curve
from frobpade.spectral_curve import solve_curve, trace_divergence_boundary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("output")
    args = ap.parse_args()
    cfg = RunConfig.load(args.config)
    curve = solve_curve((cfg.mu.a, cfg.mu.b), (cfg.sigma.a, cfg.sigma.b), cfg.c, cfg.precision_bits)
    eq = densities_from_curve(curve)
    pair = trace_divergence_boundary(curve, float(cfg.trajectory.step), cfg.trajectory.max_points)
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["branch", "re", "im", "classifier"])
        for name, branch in (("upper", pair.upper), ("lower", pair.lower)):
            for z in branch.points:
                w.writerow([name, z.real, z.imag, eq.classifier(z)])
    print(f"{curve.case.value}: b_sigma_c = {float(curve.b_sigma_c):.15g}, "
          f"{len(pair.upper.points)} + {len(pair.lower.points)} points")


if __name__ == "__main__":
    main()
