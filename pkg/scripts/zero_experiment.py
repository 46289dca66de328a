"""Kolmogorov distance between the zeros of ``Q`` and the equilibrium measure.

Example::

    python scripts/zero_experiment.py scripts/configs/gap_dichotomy.yaml
"""
import argparse

from frobpade.config import RunConfig
from frobpade.equilibrium import equilibrium
from frobpade.harness import RaySpec, zero_distribution_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = RunConfig.load(args.config)
    eq = equilibrium((cfg.mu.a, cfg.mu.b), (cfg.sigma.a, cfg.sigma.b), cfg.c)
    tab = zero_distribution_experiment(RaySpec.from_ns(cfg.c, cfg.ray.ns, cfg.ray.test_points, cfg.ray.expected), cfg.mu, cfg.sigma,
                                       cfg.precision_bits, eq=eq, workers=args.workers)
    for r in tab.rows_:
        print(f"n = {r.n:>3}  Kolmogorov = {r.kolmogorov:.4f}  outside = {r.outside}")


if __name__ == "__main__":
    main()
