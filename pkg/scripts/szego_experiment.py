"""Normalization-free shadows of the strong asymptotics along a ray.

Example::

    python scripts/szego_experiment.py scripts/configs/diagonal_rate.yaml
"""
import argparse

from frobpade.config import RunConfig
from frobpade.equilibrium import equilibrium
from frobpade.harness import RaySpec, szego_stabilization_experiment

POINTS = [-2 + 1j, 1.5j, 4, -3, 2.5 + 1j]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = RunConfig.load(args.config)
    eq = equilibrium((cfg.mu.a, cfg.mu.b), (cfg.sigma.a, cfg.sigma.b), cfg.c)
    tab = szego_stabilization_experiment(RaySpec.from_ns(cfg.c, cfg.ray.ns, cfg.ray.test_points, cfg.ray.expected), cfg.mu, cfg.sigma,
                                         POINTS, cfg.precision_bits, eq=eq, workers=args.workers)
    for r in tab.rows_:
        print(f"n = {r.n:>3}  z = {str(r.point):>10}  ratio = {r.ratio:.12f}  product = {r.product:.12f}")
    print("product variation at the last index:", f"{tab.product_variation():.3e}")


if __name__ == "__main__":
    main()
