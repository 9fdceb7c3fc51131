"""Sweep the ASF lower-bound probe of the interval chain over y.

The distance P phi(0) - P phi(y) behaves like sqrt(y) while the metric
distance is y, so the F(1) an ASF bound would need grows like y^(-1/2).
The table lists the required value next to that rate.

    python3 scripts/interval_probe.py --grid 3001
"""
import argparse

import numpy as np

from semcert.models import IntervalChainSpec, build_interval_chain, interval_asf_probe


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=3001)
    ap.add_argument("--ys", type=float, nargs="+", default=[1.0, 0.25, 1e-1, 1e-2, 1e-3, 1e-4])
    args = ap.parse_args(argv)
    k = build_interval_chain(IntervalChainSpec(args.grid))
    print(f"{'y':>10} {'gap':>12} {'closed form':>12} {'required F(1)':>14} {'sqrt(y)/(3y)':>13}")
    for p in interval_asf_probe(k, args.ys):
        print(f"{p['y']:>10.4g} {p['gap']:>12.6g} {p['closed_form']:>12.6g} {p['required_F1']:>14.6g} "
              f"{np.sqrt(p['y']) / (3 * p['y']):>13.6g}")


if __name__ == "__main__":
    main()
