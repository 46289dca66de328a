"""Measured against predicted convergence rates along a ray.

Example::

    python scripts/rate_experiment.py scripts/configs/diagonal_rate.yaml
"""
import argparse
import math

from frobpade.config import RunConfig
from frobpade.equilibrium import equilibrium
from frobpade.harness import RaySpec, convergence_rate_experiment, region_dichotomy, solve_ray


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = RunConfig.load(args.config)
    mu, sigma = cfg.mu, cfg.sigma
    ray = RaySpec.from_ns(cfg.c, cfg.ray.ns, cfg.ray.test_points, cfg.ray.expected)
    eq = equilibrium((cfg.mu.a, cfg.mu.b), (cfg.sigma.a, cfg.sigma.b), cfg.c)
    apprs = solve_ray(ray, mu, sigma, cfg.precision_bits, workers=args.workers)
    tab = convergence_rate_experiment(ray, mu, sigma, cfg.precision_bits, eq=eq, approximants=apprs)
    print(f"{'point':>12} {'n':>4} {'error':>12} {'slope':>10} {'predicted':>10} {'region':>16}")
    for r in tab.rows_:
        slope = f"{r.local_slope:.5f}" if math.isfinite(r.local_slope) else "-"
        print(f"{str(r.point):>12} {r.n:>4} {r.error:>12.4e} {slope:>10} {r.predicted:>10.5f} "
              f"{r.region:>16}")
    print("dual-labeled points:", region_dichotomy(tab, eq) or "none")


if __name__ == "__main__":
    main()
