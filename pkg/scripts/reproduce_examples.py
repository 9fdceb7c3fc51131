"""Reproduce the claims of the built-in examples and print one table per example.

    python3 scripts/reproduce_examples.py                 # all three
    python3 scripts/reproduce_examples.py xi-chain --json out.json
"""
import argparse
import json
import sys

from semcert.reproduce import EXAMPLES, run_example


def fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", metavar="name", help=f"any of {', '.join(EXAMPLES)}")
    ap.add_argument("--json", help="also write all claims to this file")
    args = ap.parse_args(argv)
    dump, ok = {}, True
    for name in args.names or EXAMPLES:
        rep = run_example(name)
        ok &= rep.passed
        print(f"\n== {name} ({'all reproduced' if rep.passed else 'some claims fail'})")
        print(f"{'status':<16} {'expected':>14} {'measured':>14} {'margin':>11}  claim")
        for c in rep.records:
            status = c.status if c.status != "checked" else ("ok" if c.passed else "FAIL")
            print(f"{status:<16} {fmt(c.expected):>14} {fmt(c.measured):>14} {c.margin:>11.3g}  {c.claim}")
        dump[name] = [vars(c) for c in rep.records]
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(dump, fh, indent=1, default=str)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
