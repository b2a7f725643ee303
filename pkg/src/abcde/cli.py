"""Command-line entry point: ``abcde {degrees,comms,generate,analyze,bench,version}``.

Exit codes: 0 on success, 2 for usage or validation errors (the message
names the flag), 1 when generation or analysis fails. Every error is one
line on stderr starting with ``error[<module>]:``.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import ConfigurationError, FeasibilityError, MixingConfig, Variant
from .generator import GraphKernel, RewiringError
from .sampling import (PowerLawSpec, SequenceFileError, read_sequence_file, sample_community_sizes,
                       sample_degrees, write_sequence_file)

log = logging.getLogger("abcde")

DETERMINISM = ("For fixed parameters and seed, edge and membership files are byte-identical "
               "for every thread count. The guarantee holds within one version of this "
               "implementation, not across implementations.")


class UsageError(Exception):
    def __init__(self, message: str):
        super().__init__(message)


def _count(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


# flag -> (type, help); kept in one table so config files share the conversions
FLAGS = {
    "n": (_count, "number of nodes"),
    "gamma": (float, "degree power-law exponent (default 2.5)"),
    "delta": (_count, "minimum degree (default 5)"),
    "max-degree": (_count, "maximum degree (default floor(sqrt(n)))"),
    "beta": (float, "community-size power-law exponent (default 1.5)"),
    "s-min": (_count, "minimum community size (default ceil(0.005 n))"),
    "s-max": (_count, "maximum community size (default floor(0.2 n))"),
    "xi": (float, "mixing parameter in [0, 1] (default 0.5)"),
    "variant": (str, "global or local (default global)"),
    "kernel": (str, "cm (configuration model) or cl (Chung-Lu) (default cm)"),
    "seed": (int, "master seed (default 42)"),
    "threads": (_count, "worker threads (default 1)"),
    "degrees-file": (str, "read degrees from this file instead of sampling"),
    "sizes-file": (str, "read community sizes from this file instead of sampling"),
    "out-edges": (str, "edge list output path"),
    "out-membership": (str, "membership output path"),
    "out": (str, "output path"),
    "edges": (str, "edge list input path"),
    "membership": (str, "membership input path"),
    "wide": (str, "also write the wide-format report here"),
    "node-tsv": (str, "also write per-node centralities here"),
    "sample-pairs": (_count, "node pairs sampled for the average path length (default 10000)"),
    "bench-grid": (str, "grid file, one cell of key=value tokens per line"),
    "repeats": (_count, "timed repeats per cell (default 5)"),
    "max-rewire-rounds": (_count, "rewiring rounds before giving up (default 100)"),
}

DEFAULTS = {"gamma": 2.5, "delta": 5, "beta": 1.5, "xi": 0.5, "variant": "global",
            "kernel": "cm", "seed": 42, "threads": 1, "sample-pairs": 10_000,
            "repeats": 5, "max-rewire-rounds": 100}

SUBCOMMANDS = {
    "degrees": ("sample a degree sequence",
                ["n", "gamma", "delta", "max-degree", "seed", "out"]),
    "comms": ("sample community sizes",
              ["n", "beta", "s-min", "s-max", "seed", "out"]),
    "generate": ("generate a benchmark graph",
                 ["n", "gamma", "delta", "max-degree", "beta", "s-min", "s-max", "xi",
                  "variant", "kernel", "seed", "threads", "degrees-file", "sizes-file",
                  "out-edges", "out-membership", "max-rewire-rounds"]),
    "analyze": ("compute graph properties of an edge list and partition",
                ["edges", "membership", "out", "wide", "node-tsv", "seed", "sample-pairs"]),
    "bench": ("time generation over a parameter grid",
              ["bench-grid", "repeats", "out"]),
}

REQUIRED = {
    "degrees": ["n"],
    "comms": ["n"],
    "generate": ["out-edges", "out-membership"],
    "analyze": ["edges", "membership", "out"],
    "bench": [],
}


def version_and_provenance() -> str:
    lines = [
        f"abcde {__version__}",
        "defaults: variant=global kernel=cm gamma=2.5 delta=5 max-degree=floor(sqrt(n)) "
        "beta=1.5 s-min=ceil(0.005n) s-max=floor(0.2n) xi=0.5 seed=42 threads=1",
        "seed streams: per-task seeds are a SplitMix64 mix of (seed, task id)",
        f"determinism: {DETERMINISM}",
    ]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abcde", description="Multi-threaded ABCD benchmark graph generator.")
    parser.add_argument("--version", action="store_true", help="print version and provenance")
    sub = parser.add_subparsers(dest="command")
    for name, (help_text, flags) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="file of key=value lines; flags override it")
        for flag in flags:
            # strings here, converted after the config file is merged in
            p.add_argument(f"--{flag}", dest=flag, default=None, metavar=flag.upper().replace("-", "_"),
                           help=FLAGS[flag][1])
    sub.add_parser("version", help="print version and provenance")
    return parser


def read_config(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: {path}: line {lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in FLAGS:
            raise UsageError(f"--config: {path}: line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def merge_options(command: str, args: argparse.Namespace) -> dict:
    """Config file values, then explicit flags; converted and validated."""
    allowed = SUBCOMMANDS[command][1]
    raw = {}
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in allowed:
                raise UsageError(f"--config: key {key!r} does not apply to '{command}'")
            raw[key] = value
    for flag in allowed:
        value = getattr(args, flag)
        if value is not None:
            raw[flag] = value
    opts = {}
    for flag in allowed:
        if flag in raw:
            conv = FLAGS[flag][0]
            try:
                opts[flag] = conv(raw[flag])
            except ValueError:
                raise UsageError(f"--{flag}: invalid value {raw[flag]!r}") from None
        else:
            opts[flag] = DEFAULTS.get(flag)
    for flag in REQUIRED[command]:
        if opts.get(flag) is None:
            raise UsageError(f"--{flag} is required for '{command}'")
    return opts


def _check(cond: bool, flag: str, message: str) -> None:
    if not cond:
        raise UsageError(f"--{flag} {message}")


def _degree_spec(opts, n) -> PowerLawSpec:
    hi = opts["max-degree"] if opts.get("max-degree") is not None else max(1, math.isqrt(n))
    _check(opts["gamma"] > 1, "gamma", f"must be > 1, got {opts['gamma']}")
    _check(opts["delta"] >= 1, "delta", f"must be >= 1, got {opts['delta']}")
    _check(hi >= opts["delta"], "max-degree", f"must be >= --delta ({opts['delta']}), got {hi}")
    return PowerLawSpec(opts["gamma"], opts["delta"], hi)


def _size_spec(opts, n) -> PowerLawSpec:
    lo = opts["s-min"] if opts.get("s-min") is not None else max(1, math.ceil(0.005 * n))
    hi = opts["s-max"] if opts.get("s-max") is not None else max(lo, math.floor(0.2 * n))
    _check(opts["beta"] > 1, "beta", f"must be > 1, got {opts['beta']}")
    _check(lo >= 1, "s-min", f"must be >= 1, got {lo}")
    _check(lo <= n, "s-min", f"must be <= --n ({n}), got {lo}")
    _check(hi >= lo, "s-max", f"must be >= --s-min ({lo}), got {hi}")
    _check(hi <= n, "s-max", f"must be <= --n ({n}), got {hi}")
    return PowerLawSpec(opts["beta"], lo, hi)


def _check_n(n) -> None:
    _check(n is not None and n >= 2, "n", f"must be >= 2, got {n}")


def _write_or_print(path, values) -> None:
    if path:
        write_sequence_file(path, values)
    else:
        sys.stdout.write("".join(f"{int(v)}\n" for v in values))


def cmd_degrees(opts) -> int:
    _check_n(opts["n"])
    spec = _degree_spec(opts, opts["n"])
    from .engine import DEGREE_STREAM, task_rng
    seq = sample_degrees(opts["n"], spec, task_rng(opts["seed"], DEGREE_STREAM))
    _write_or_print(opts["out"], seq.degrees)
    return 0


def cmd_comms(opts) -> int:
    _check_n(opts["n"])
    spec = _size_spec(opts, opts["n"])
    from .engine import SIZE_STREAM, task_rng
    sizes = sample_community_sizes(opts["n"], spec, task_rng(opts["seed"], SIZE_STREAM))
    _write_or_print(opts["out"], sizes.sizes)
    return 0


def _read_seq(opts, flag, kind, n=None):
    try:
        return read_sequence_file(opts[flag], kind=kind, n=n)
    except OSError as exc:
        raise UsageError(f"--{flag}: cannot read {opts[flag]}: {exc.strerror}") from None
    except SequenceFileError as exc:
        raise UsageError(f"--{flag}: {exc}") from None


def cmd_generate(opts) -> int:
    from .engine import (DEGREE_STREAM, SIZE_STREAM, GenParams, generate_parallel, task_rng,
                         write_outputs)
    degrees = _read_seq(opts, "degrees-file", "degrees") if opts["degrees-file"] else None
    n = opts["n"]
    if n is None and degrees is not None:
        n = len(degrees)
    _check_n(n)
    if degrees is not None:
        _check(len(degrees) == n, "degrees-file", f"has {len(degrees)} entries but --n is {n}")
    sizes = _read_seq(opts, "sizes-file", "sizes", n) if opts["sizes-file"] else None

    _check(0.0 <= opts["xi"] <= 1.0, "xi", f"must lie in [0, 1], got {opts['xi']}")
    _check(opts["variant"] in ("global", "local"), "variant",
           f"must be 'global' or 'local', got {opts['variant']!r}")
    _check(opts["kernel"] in ("cm", "cl"), "kernel", f"must be 'cm' or 'cl', got {opts['kernel']!r}")
    _check(opts["threads"] >= 1, "threads", f"must be >= 1, got {opts['threads']}")
    _check(opts["max-rewire-rounds"] >= 0, "max-rewire-rounds", "must be >= 0")
    dspec = _degree_spec(opts, n)
    sspec = _size_spec(opts, n)
    params = GenParams(n=n, degree_spec=dspec, community_spec=sspec,
                       mix=MixingConfig(opts["xi"], Variant(opts["variant"])),
                       kernel=GraphKernel(opts["kernel"]), seed=opts["seed"],
                       threads=opts["threads"], max_rewire_rounds=opts["max-rewire-rounds"])
    if degrees is None:
        degrees = sample_degrees(n, dspec, task_rng(params.seed, DEGREE_STREAM))
    if sizes is None:
        sizes = sample_community_sizes(n, sspec, task_rng(params.seed, SIZE_STREAM))
    result = generate_parallel(params, degrees, sizes)
    write_outputs(result, opts["out-edges"], opts["out-membership"])
    log.info("wrote %d edges, %d communities, %d collisions resolved",
             result.graph.edge_count, result.membership.k, result.collisions)
    return 0


def cmd_analyze(opts) -> int:
    from . import metrics
    from .assignment import read_membership
    from .engine import read_edges
    try:
        membership = read_membership(opts["membership"])
    except OSError as exc:
        raise UsageError(f"--membership: cannot read {opts['membership']}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"--membership: {exc}") from None
    try:
        graph = read_edges(opts["edges"], membership.n)
    except OSError as exc:
        raise UsageError(f"--edges: cannot read {opts['edges']}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"--edges: {exc}") from None
    _check(graph.n == membership.n, "membership",
           f"covers {membership.n} nodes but the edge list uses {graph.n}")
    report = metrics.full_report(graph, membership, np.random.default_rng(opts["seed"]),
                                 opts["sample-pairs"])
    name = Path(opts["edges"]).stem
    metrics.write_report_csv(opts["out"], {name: report})
    if opts["wide"]:
        metrics.write_report_wide(opts["wide"], {name: report})
    if opts["node-tsv"]:
        metrics.write_node_tsv(opts["node-tsv"], report)
    return 0


def cmd_bench(opts) -> int:
    from . import bench
    if opts["bench-grid"]:
        try:
            cells = bench.read_grid(opts["bench-grid"])
        except OSError as exc:
            raise UsageError(f"--bench-grid: cannot read {opts['bench-grid']}: {exc.strerror}") from None
        except ValueError as exc:
            raise UsageError(f"--bench-grid: {exc}") from None
    else:
        cells = bench.expand_grid()
    _check(opts["repeats"] >= 1, "repeats", "must be >= 1")
    out = opts["out"] or "bench.csv"
    result = bench.run_sweep(cells, repeats=opts["repeats"], csv_path=out)
    for key, (wall, ns) in sorted(result.medians().items()):
        n, xi, variant, kernel, threads = key
        print(f"n={n} xi={xi} variant={variant} kernel={kernel} threads={threads} "
              f"median_wall={wall:.4f}s median_ns_per_edge={ns:.1f}")
    if result.failures:
        for f in result.failures:
            print(f"error[bench]: cell n={f.params.n} xi={f.params.mix.xi} "
                  f"threads={f.params.threads}: {f.error}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"degrees": cmd_degrees, "comms": cmd_comms, "generate": cmd_generate,
            "analyze": cmd_analyze, "bench": cmd_bench}


def _module_tag(exc: BaseException) -> str:
    from .engine import GenerationError
    if isinstance(exc, GenerationError):
        exc = exc.cause if isinstance(exc.cause, (RewiringError, FeasibilityError)) else exc
        return "engine" if not isinstance(exc, RewiringError) else "generator"
    mod = type(exc).__module__
    if mod.startswith("abcde."):
        return mod.split(".", 1)[1]
    return "abcde"


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s[%(name)s]: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version or args.command == "version":
            sys.stdout.write(version_and_provenance())
            return 0
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(list(COMMANDS) + ["version"]))
        opts = merge_options(args.command, args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error[cli]: {_one_line(exc)}", file=sys.stderr)
        return 2
    except (FeasibilityError, ConfigurationError, RewiringError) as exc:
        print(f"error[{_module_tag(exc)}]: {_one_line(exc)}", file=sys.stderr)
        return 1
    except Exception as exc:
        from .engine import GenerationError
        from .metrics import MetricsError
        if isinstance(exc, (GenerationError, MetricsError)):
            print(f"error[{_module_tag(exc)}]: {_one_line(exc)}", file=sys.stderr)
            return 1
        if isinstance(exc, OSError):
            print(f"error[io]: {_one_line(exc)}", file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
