"""plot threshold|scaling|events --in curve.csv --out fig.png"""

import argparse
import sys

from .render import SchemaError, render_event_frequencies, render_scaling_fit, render_threshold_curve


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plot")
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in ("threshold", "scaling", "events"):
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--out", dest="out", required=True)
        p.add_argument("--title", default=None)
    args = ap.parse_args(argv)
    fn = {
        "threshold": render_threshold_curve,
        "scaling": render_scaling_fit,
        "events": render_event_frequencies,
    }[args.kind]
    try:
        fn(args.inp, args.out, title=args.title)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
