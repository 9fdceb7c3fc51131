"""Time the exact transport routes against each other on random line spaces.

For each size the same capped cost min(2A, K d) is solved by the
transportation simplex, HiGHS on the dense problem and the line recursion
used by ``transport_value``; the table shows timings and the largest
disagreement.

    python3 scripts/transport_routes.py --sizes 20 50 100 200 --reps 3
"""
import argparse
import time

import numpy as np

from semcert.metric_space import capped_lipschitz_cost, space_from_positions
from semcert.transport import transport_value, wasserstein


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--A", type=float, default=1.0)
    ap.add_argument("--K", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    warm = capped_lipschitz_cost(space_from_positions(["0", "1"], [0.0, 1.0]), args.A, args.K)
    transport_value(np.array([1.0, 0.0]), np.array([0.0, 1.0]), warm)  # compile
    print(f"{'n':>5} {'simplex s':>10} {'highs s':>10} {'line s':>10} {'max |diff|':>11}")
    for n in args.sizes:
        ts = np.zeros(3)
        diff = 0.0
        for _ in range(args.reps):
            pos = np.sort(rng.random(n)) * 3
            cost = capped_lipschitz_cost(space_from_positions([str(i) for i in range(n)], pos), args.A, args.K)
            a, b = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            r1, t1 = timed(lambda: wasserstein(a, b, cost, method="simplex").value)
            r2, t2 = timed(lambda: wasserstein(a, b, cost, method="highs").value)
            r3, t3 = timed(lambda: transport_value(a, b, cost))
            ts += (t1, t2, t3)
            diff = max(diff, abs(r1 - r2), abs(r1 - r3))
        ts /= args.reps
        print(f"{n:>5} {ts[0]:>10.4f} {ts[1]:>10.4f} {ts[2]:>10.4f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
