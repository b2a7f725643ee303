import numpy as np
import pytest

from abcde import bench
from abcde.bench import BenchRecord, emit_csv, read_csv, run_sweep
from abcde.engine import GenParams


def _rec(**kw):
    base = dict(n=100, xi=0.5, variant="global", kernel="cm", threads=1, seed=42,
                edge_count=300, wall_seconds=0.015, ns_per_edge=0.015e9 / 300,
                collisions_resolved=2)
    base.update(kw)
    return BenchRecord(**base)


def test_csv_header_only(tmp_path):
    path = tmp_path / "b.csv"
    emit_csv([], path)
    assert path.read_text() == ",".join(bench.COLUMNS) + "\n"


def test_csv_one_record_roundtrip(tmp_path):
    path = tmp_path / "b.csv"
    recs = [_rec(), _rec(seed=43, wall_seconds=1 / 3, ns_per_edge=1e9 / 900)]
    emit_csv(recs[:1], path)
    assert len(path.read_text().splitlines()) == 2
    emit_csv(recs, path)
    assert read_csv(path) == recs


def test_ns_per_edge_invariant():
    params = GenParams.with_defaults(2000, xi=0.5)
    rec = bench.time_once(params)
    assert rec.ns_per_edge == pytest.approx(rec.wall_seconds * 1e9 / rec.edge_count)


def test_sweep_records_and_seeds(tmp_path):
    cell = GenParams.with_defaults(10_000, xi=0.5, threads=1)
    res = run_sweep([cell], repeats=3, csv_path=tmp_path / "s.csv")
    assert len(res.records) == 3
    assert [r.seed for r in res.records] == [42, 43, 44]
    assert len(read_csv(tmp_path / "s.csv")) == 3
    same = run_sweep([cell], repeats=3, warmup=False, vary_seed=False)
    assert len({r.edge_count for r in same.records}) == 1
    (wall, ns), = same.medians().values()
    assert wall == np.median([r.wall_seconds for r in same.records])


def test_failed_cell_does_not_abort():
    bad = GenParams.with_defaults(100, xi=0.0, s_min=5, s_max=6, max_degree=10, delta=8)
    good = GenParams.with_defaults(2000, xi=0.3)
    res = run_sweep([bad, good], repeats=1)
    assert len(res.failures) == 1 and res.failures[0].params is bad
    assert len(res.records) == 1


def test_grid_file(tmp_path):
    path = tmp_path / "grid.txt"
    path.write_text("# desk grid\nn=1e4 xi=0.2 threads=4\n\nn=20000, xi=0.8, kernel=cl\n")
    cells = bench.read_grid(path)
    assert [(c.n, c.mix.xi, c.threads, c.kernel.value) for c in cells] == [
        (10_000, 0.2, 4, "cm"), (20_000, 0.8, 1, "cl")]
    path.write_text("n=100 colour=red\n")
    with pytest.raises(ValueError, match="line 1"):
        bench.read_grid(path)


def test_default_grid():
    cells = bench.expand_grid()
    assert len(cells) == 3 * 3 * 4
