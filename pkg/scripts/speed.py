"""Time-per-edge sweep over n, xi and thread count.

The default grid stops at n=1e5 so a run finishes in a few minutes; pass
``--n 1e4 1e5 1e6`` for the full range.

    python3 scripts/speed.py --repeats 3 --out speed.csv
"""
import argparse
import logging

from abcde.bench import _count, expand_grid, run_sweep

log = logging.getLogger("speed")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=_count, nargs="+", default=[10_000, 100_000])
    ap.add_argument("--xi", type=float, nargs="+", default=[0.2, 0.5, 0.8])
    ap.add_argument("--threads", type=_count, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--variant", default="global")
    ap.add_argument("--kernel", default="cm")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--out", default="speed.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    grid = expand_grid(args.n, args.xi, args.threads, variant=args.variant, kernel=args.kernel)
    result = run_sweep(grid, repeats=args.repeats, csv_path=args.out)
    for (n, xi, variant, kernel, threads), (wall, ns) in sorted(result.medians().items()):
        log.info("n=%-8d xi=%.1f threads=%d  median %.3fs  %.0f ns/edge", n, xi, threads, wall, ns)
    for f in result.failures:
        log.error("failed: n=%d xi=%s: %s", f.params.n, f.params.mix.xi, f.error)


if __name__ == "__main__":
    main()
