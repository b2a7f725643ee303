"""Timing harness for time-per-edge against n, xi and thread count.

Only the generation call is timed. Degree and size sequences are sampled
before the timer starts, and nothing is written inside the timed section.
Other heavy processes should not run while a sweep is in progress.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import logging
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .engine import GenParams, generate_parallel, sample_inputs

log = logging.getLogger(__name__)

COLUMNS = ("n", "xi", "variant", "kernel", "threads", "seed", "edges",
           "wall_seconds", "ns_per_edge", "collisions")

DEFAULT_GRID = {
    "n": [10_000, 100_000, 1_000_000],
    "xi": [0.2, 0.5, 0.8],
    "threads": [1, 2, 4, 8],
}


@dataclass(frozen=True)
class BenchRecord:
    n: int
    xi: float
    variant: str
    kernel: str
    threads: int
    seed: int
    edge_count: int
    wall_seconds: float
    ns_per_edge: float
    collisions_resolved: int

    @classmethod
    def measured(cls, params: GenParams, edge_count: int, wall_seconds: float,
                 collisions: int) -> BenchRecord:
        ns = wall_seconds * 1e9 / edge_count if edge_count else float("nan")
        return cls(params.n, params.mix.xi, params.mix.variant.value, params.kernel.value,
                   params.threads, params.seed, edge_count, wall_seconds, ns, collisions)

    def row(self) -> list:
        return [self.n, repr(self.xi), self.variant, self.kernel, self.threads, self.seed,
                self.edge_count, repr(self.wall_seconds), repr(self.ns_per_edge),
                self.collisions_resolved]


@dataclass
class CellFailure:
    params: GenParams
    error: str


@dataclass
class SweepResult:
    records: list
    failures: list

    def medians(self) -> dict:
        """Median wall time and ns/edge per cell, keyed by (n, xi, variant, kernel, threads)."""
        groups: dict = {}
        for r in self.records:
            groups.setdefault((r.n, r.xi, r.variant, r.kernel, r.threads), []).append(r)
        return {key: (statistics.median(r.wall_seconds for r in rs),
                      statistics.median(r.ns_per_edge for r in rs))
                for key, rs in groups.items()}


def time_once(params: GenParams, degrees=None, sizes=None) -> BenchRecord:
    if degrees is None or sizes is None:
        degrees, sizes = sample_inputs(params)
    t0 = time.perf_counter()
    result = generate_parallel(params, degrees, sizes)
    wall = time.perf_counter() - t0
    return BenchRecord.measured(params, result.graph.edge_count, wall, result.collisions)


def run_sweep(grid, repeats: int = 5, warmup: bool = True, csv_path=None,
              vary_seed: bool = True) -> SweepResult:
    """Time every cell ``repeats`` times; the seed of repeat ``r`` is ``seed + r``.

    With ``vary_seed=False`` all repeats share the cell seed and so produce
    the same graph.

    Each cell gets one discarded warm-up run. A failing cell is logged and
    recorded in ``failures``; the sweep moves on. When ``csv_path`` is given,
    records are appended and flushed after every cell.
    """
    cells = list(grid)
    records: list[BenchRecord] = []
    failures: list[CellFailure] = []
    fh = writer = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        fh.flush()
    try:
        for params in cells:
            cell: list[BenchRecord] = []
            try:
                if warmup:
                    time_once(params)
                for r in range(repeats):
                    p = dataclasses.replace(params, seed=params.seed + r) if vary_seed else params
                    degrees, sizes = sample_inputs(p)
                    cell.append(time_once(p, degrees, sizes))
            except Exception as exc:
                log.error("cell n=%d xi=%s threads=%d failed: %s",
                          params.n, params.mix.xi, params.threads, exc)
                failures.append(CellFailure(params, str(exc)))
                continue
            records.extend(cell)
            if writer is not None:
                writer.writerows(r.row() for r in cell)
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return SweepResult(records, failures)


def emit_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(r.row() for r in records)


def read_csv(path) -> list[BenchRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchRecord(
                int(row["n"]), float(row["xi"]), row["variant"], row["kernel"],
                int(row["threads"]), int(row["seed"]), int(row["edges"]),
                float(row["wall_seconds"]), float(row["ns_per_edge"]),
                int(row["collisions"])))
    return out


def _count(text: str) -> int:
    # accepts 10000 as well as 1e4
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


_GRID_KEYS = {"n": _count, "xi": float, "variant": str, "kernel": str, "threads": _count,
              "seed": int, "gamma": float, "delta": _count, "max_degree": _count,
              "beta": float, "s_min": _count, "s_max": _count}


def parse_cell(line: str) -> dict:
    """``key=value`` tokens separated by blanks or commas; dashes in keys are allowed."""
    cell = {}
    for tok in line.replace(",", " ").split():
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _GRID_KEYS:
            raise ValueError(f"unknown grid key {key!r}")
        cell[key] = _GRID_KEYS[key](value)
    if "n" not in cell:
        raise ValueError("grid cell needs n=")
    return cell


def read_grid(path) -> list[GenParams]:
    cells = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            cells.append(GenParams.with_defaults(**parse_cell(text)))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return cells


def expand_grid(n=DEFAULT_GRID["n"], xi=DEFAULT_GRID["xi"],
                threads=DEFAULT_GRID["threads"], **fixed) -> list[GenParams]:
    return [GenParams.with_defaults(n=a, xi=b, threads=c, **fixed)
            for a, b, c in itertools.product(n, xi, threads)]
