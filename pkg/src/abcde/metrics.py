"""Structural properties of a graph with a planted partition.

Everything works on the sparse adjacency matrix. Betweenness, closeness and
exact path lengths share one batched breadth-first pass: a block of sources
is expanded level by level with sparse-dense products, which yields both
distances and shortest-path counts, and dependencies are accumulated back
down the levels as in Brandes' algorithm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .assignment import Membership
from .generator import SimpleGraph

UNDEFINED = math.nan

# the ten property families reported for each graph
METRIC_FAMILIES = (
    "clustering",
    "degree_centrality",
    "betweenness",
    "closeness",
    "pagerank",
    "degree_correlation",
    "intra_edge_fraction",
    "participation",
    "modularity",
    "avg_shortest_path",
)


class MetricsError(ValueError):
    pass


def triangles(g: SimpleGraph) -> np.ndarray:
    """Triangles through each node."""
    a = g.adjacency()
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2


def global_clustering(g: SimpleGraph) -> float:
    deg = g.degrees().astype(float)
    wedges = (deg * (deg - 1) / 2).sum()
    if wedges == 0:
        return 0.0
    # each triangle is counted at its three corners
    return float(triangles(g).sum() / wedges)


def local_clustering(g: SimpleGraph) -> np.ndarray:
    """Per-node clustering; nodes of degree < 2 get 0."""
    deg = g.degrees().astype(float)
    pairs = deg * (deg - 1) / 2
    out = np.zeros(g.n)
    ok = pairs > 0
    out[ok] = triangles(g)[ok] / pairs[ok]
    return out


def avg_local_clustering(g: SimpleGraph) -> float:
    return float(local_clustering(g).mean())


def _batch_size(n: int) -> int:
    return int(np.clip(2_000_000 // max(n, 1), 1, 128))


def _path_pass(g: SimpleGraph, sources=None, batch: int | None = None):
    """Betweenness (ordered pairs) plus per-source distance sums.

    Returns ``(dependency, dist_sum, reach, dist_hist)`` where ``dependency``
    sums Brandes dependencies over the sources, ``dist_sum[s]`` and
    ``reach[s]`` are the total distance and number of nodes reachable from
    source ``s``, and ``dist_hist[d]`` counts ordered pairs at distance ``d``.
    """
    n = g.n
    a = g.adjacency()
    sources = np.arange(n) if sources is None else np.asarray(sources)
    batch = batch or _batch_size(n)
    dependency = np.zeros(n)
    dist_sum = np.zeros(n)
    reach = np.zeros(n, dtype=np.int64)
    hist: dict[int, int] = {}
    for start in range(0, len(sources), batch):
        src = sources[start:start + batch]
        b = len(src)
        cols = np.arange(b)
        dist = np.full((n, b), -1, dtype=np.int32)
        sigma = np.zeros((n, b))
        dist[src, cols] = 0
        sigma[src, cols] = 1.0
        frontier = sigma.copy()
        depth = 0
        while True:
            nxt = a @ frontier
            new = (nxt > 0) & (dist < 0)
            if not new.any():
                break
            depth += 1
            np.copyto(dist, depth, where=new)
            np.multiply(nxt, new, out=frontier)
            sigma += frontier
        inv_sigma = np.divide(1.0, sigma, out=np.zeros_like(sigma), where=sigma > 0)
        delta = np.zeros((n, b))
        coeff = np.empty((n, b))
        at = dist == depth
        for d in range(depth, 0, -1):
            prev = dist == d - 1
            np.add(1.0, delta, out=coeff)
            coeff *= inv_sigma
            coeff *= at
            contrib = a @ coeff
            contrib *= sigma
            contrib *= prev
            delta += contrib
            at = prev
        pos = dist > 0
        dependency += (delta * pos).sum(axis=1)
        dist_sum[src] = (dist * pos).sum(axis=0)
        reach[src] = pos.sum(axis=0)
        vals, counts = np.unique(dist[pos], return_counts=True)
        for v, c in zip(vals.tolist(), counts.tolist()):
            hist[v] = hist.get(v, 0) + c
    return dependency, dist_sum, reach, hist


@dataclass
class Centralities:
    degree: np.ndarray
    betweenness: np.ndarray
    betweenness_normalized: np.ndarray
    closeness: np.ndarray
    pagerank: np.ndarray


def degree_centrality(g: SimpleGraph) -> np.ndarray:
    return g.degrees() / max(g.n - 1, 1)


def betweenness(g: SimpleGraph) -> np.ndarray:
    """Unnormalized betweenness: each unordered pair ``{s, t}`` counted once."""
    return _path_pass(g)[0] / 2


def closeness_from_pass(dist_sum: np.ndarray, reach: np.ndarray) -> np.ndarray:
    out = np.zeros(len(dist_sum))
    ok = dist_sum > 0
    out[ok] = reach[ok] / dist_sum[ok]
    return out


def closeness(g: SimpleGraph) -> np.ndarray:
    """``(n_cc - 1) / sum of distances`` inside each node's component.

    Isolated nodes get 0. On a connected graph this is the usual closeness.
    """
    _, dist_sum, reach, _ = _path_pass(g)
    return closeness_from_pass(dist_sum, reach)


def pagerank(g: SimpleGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 10_000) -> np.ndarray:
    """Power iteration with uniform teleport; dangling mass is spread uniformly."""
    n = g.n
    if n == 0:
        raise MetricsError("pagerank of an empty graph")
    a = g.adjacency()
    deg = np.asarray(a.sum(axis=1)).ravel()
    dangling = deg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / deg[~dangling]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = damping * (a @ (x * inv)) + (damping * x[dangling].sum() + 1.0 - damping) / n
        err = np.abs(nxt - x).sum()
        x = nxt
        if err < tol:
            break
    return x / x.sum()


def centralities(g: SimpleGraph) -> Centralities:
    if g.n == 0:
        raise MetricsError("centralities of an empty graph")
    dep, dist_sum, reach, _ = _path_pass(g)
    bc = dep / 2
    n = g.n
    norm = (n - 1) * (n - 2) / 2
    return Centralities(
        degree=degree_centrality(g),
        betweenness=bc,
        betweenness_normalized=bc / norm if norm > 0 else np.zeros(n),
        closeness=closeness_from_pass(dist_sum, reach),
        pagerank=pagerank(g),
    )


@dataclass
class DegreeCorrelation:
    knn: dict
    coefficient: float
    exponent: float


def degree_correlation(g: SimpleGraph) -> DegreeCorrelation:
    """Average neighbour degree by degree, assortativity and its log-log slope.

    The coefficient is the Pearson correlation of endpoint degrees over both
    orientations of every edge; the exponent is the least-squares slope of
    ``log knn(d)`` against ``log d``. Either is ``nan`` when undefined.
    """
    if g.edge_count == 0:
        raise MetricsError("degree correlation needs at least one edge")
    a = g.adjacency()
    deg = g.degrees().astype(float)
    has = deg > 0
    node_knn = np.zeros(g.n)
    node_knn[has] = (a @ deg)[has] / deg[has]
    dvals = np.unique(deg[has]).astype(np.int64)
    knn = {int(d): float(node_knn[deg == d].mean()) for d in dvals}

    x = deg[np.concatenate([g.u, g.v])]
    y = deg[np.concatenate([g.v, g.u])]
    if x.std() == 0:
        coef = UNDEFINED
    else:
        coef = float(np.corrcoef(x, y)[0, 1])

    ks = np.array([d for d in knn if knn[d] > 0], dtype=float)
    if len(ks) < 2:
        expo = UNDEFINED
    else:
        lx = np.log(ks)
        ly = np.log([knn[int(d)] for d in ks])
        expo = float(np.polyfit(lx, ly, 1)[0])
    return DegreeCorrelation(knn, coef, expo)


def _labels(membership) -> np.ndarray:
    return membership.community_of if isinstance(membership, Membership) else np.asarray(membership)


def intra_edge_fraction(g: SimpleGraph, membership) -> float:
    if g.edge_count == 0:
        raise MetricsError("intra-edge fraction of a graph without edges")
    c = _labels(membership)
    return float((c[g.u] == c[g.v]).mean())


def participation(g: SimpleGraph, membership) -> np.ndarray:
    """``1 - sum_c (deg_c(v) / deg(v))**2``; ``nan`` for isolated nodes."""
    c = _labels(membership)
    k = int(c.max()) + 1
    onehot = sp.csr_matrix((np.ones(g.n), (np.arange(g.n), c)), shape=(g.n, k))
    per = (g.adjacency() @ onehot).tocsr()
    deg = g.degrees().astype(float)
    sq = np.asarray(per.multiply(per).sum(axis=1)).ravel()
    out = np.full(g.n, np.nan)
    ok = deg > 0
    out[ok] = 1.0 - sq[ok] / deg[ok] ** 2
    return out


def modularity(g: SimpleGraph, membership) -> float:
    m = g.edge_count
    if m == 0:
        raise MetricsError("modularity of a graph without edges")
    c = _labels(membership)
    k = int(c.max()) + 1
    intra = np.bincount(c[g.u][c[g.u] == c[g.v]], minlength=k)
    vol = np.bincount(c, weights=g.degrees(), minlength=k)
    return float((intra / m - (vol / (2 * m)) ** 2).sum())


def community_metrics(g: SimpleGraph, membership) -> tuple[float, float, float]:
    p = participation(g, membership)
    return intra_edge_fraction(g, membership), float(np.nanmean(p)), modularity(g, membership)


def internal_fractions(g: SimpleGraph, membership) -> np.ndarray:
    """Share of each community's volume carried by its internal edges."""
    c = _labels(membership)
    k = int(c.max()) + 1
    intra = np.bincount(c[g.u][c[g.u] == c[g.v]], minlength=k)
    vol = np.bincount(c, weights=g.degrees(), minlength=k)
    out = np.full(k, np.nan)
    ok = vol > 0
    out[ok] = 2 * intra[ok] / vol[ok]
    return out


def _bfs_distances(a, sources) -> np.ndarray:
    """Hop distances from each source (columns); -1 where unreachable."""
    n, b = a.shape[0], len(sources)
    dist = np.full((n, b), -1, dtype=np.int32)
    frontier = np.zeros((n, b), dtype=a.dtype)
    dist[sources, np.arange(b)] = 0
    frontier[sources, np.arange(b)] = 1
    depth = 0
    while True:
        new = (a @ frontier > 0) & (dist < 0)
        if not new.any():
            return dist
        depth += 1
        np.copyto(dist, depth, where=new)
        frontier = new.astype(a.dtype)


def largest_component(g: SimpleGraph) -> np.ndarray:
    _, labels = csgraph.connected_components(g.adjacency(), directed=False)
    return np.flatnonzero(labels == np.bincount(labels).argmax())


def avg_shortest_path(g: SimpleGraph, sample_pairs: int = 10_000,
                      rng: np.random.Generator | None = None,
                      exact_below: int = 1000) -> float:
    """Mean distance between node pairs of the largest component.

    Exact over all pairs when ``n <= exact_below``; otherwise the mean over
    ``sample_pairs`` uniformly drawn distinct pairs.
    """
    if g.edge_count == 0:
        raise MetricsError("average shortest path of a graph without edges")
    comp = largest_component(g)
    if g.n <= exact_below:
        _, dist_sum, reach, _ = _path_pass(g, sources=comp)
        return float(dist_sum[comp].sum() / reach[comp].sum())
    rng = np.random.default_rng() if rng is None else rng
    s = rng.integers(0, len(comp), size=sample_pairs)
    t = (s + rng.integers(1, len(comp), size=sample_pairs)) % len(comp)
    s, t = comp[s], comp[t]
    a = g.adjacency().astype(np.float32)
    order = np.argsort(s, kind="stable")
    s, t = s[order], t[order]
    uniq, first = np.unique(s, return_index=True)
    bounds = np.append(first, len(s))
    batch = _batch_size(g.n)
    total = 0
    for start in range(0, len(uniq), batch):
        block = uniq[start:start + batch]
        dist = _bfs_distances(a, block)
        lo, hi = bounds[start], bounds[min(start + batch, len(uniq))]
        col = np.searchsorted(block, s[lo:hi])
        total += int(dist[t[lo:hi], col].sum())
    return float(total / sample_pairs)


@dataclass
class MetricsReport:
    global_clustering: float
    avg_local_clustering: float
    degree_centrality: np.ndarray
    betweenness: np.ndarray
    betweenness_normalized: np.ndarray
    closeness: np.ndarray
    pagerank: np.ndarray
    knn: dict
    correlation_coefficient: float
    correlation_exponent: float
    intra_edge_fraction: float
    avg_participation: float
    modularity: float
    avg_shortest_path: float
    extra: dict = field(default_factory=dict)

    def scalars(self) -> dict:
        """Scalar summary rows; per-node metrics are summarized by their mean."""
        return {
            "global_clustering": self.global_clustering,
            "avg_local_clustering": self.avg_local_clustering,
            "degree_centrality": float(self.degree_centrality.mean()),
            "betweenness": float(self.betweenness_normalized.mean()),
            "closeness": float(self.closeness.mean()),
            "pagerank": float(self.pagerank.max()),
            "correlation_coefficient": self.correlation_coefficient,
            "correlation_exponent": self.correlation_exponent,
            "intra_edge_fraction": self.intra_edge_fraction,
            "participation": self.avg_participation,
            "modularity": self.modularity,
            "avg_shortest_path": self.avg_shortest_path,
        }


def full_report(g: SimpleGraph, membership, rng: np.random.Generator | None = None,
                sample_pairs: int = 10_000) -> MetricsReport:
    if g.edge_count == 0:
        raise MetricsError("cannot analyze a graph without edges")
    cen = centralities(g)
    corr = degree_correlation(g)
    intra, part, q = community_metrics(g, membership)
    return MetricsReport(
        global_clustering=global_clustering(g),
        avg_local_clustering=avg_local_clustering(g),
        degree_centrality=cen.degree,
        betweenness=cen.betweenness,
        betweenness_normalized=cen.betweenness_normalized,
        closeness=cen.closeness,
        pagerank=cen.pagerank,
        knn=corr.knn,
        correlation_coefficient=corr.coefficient,
        correlation_exponent=corr.exponent,
        intra_edge_fraction=intra,
        avg_participation=part,
        modularity=q,
        avg_shortest_path=avg_shortest_path(g, sample_pairs, rng),
    )


def write_report_csv(path, reports: dict) -> None:
    """Long format: one ``graph,metric,value`` row per scalar and per knn point."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["graph", "metric", "value"])
        for name, rep in reports.items():
            for metric, value in rep.scalars().items():
                w.writerow([name, metric, repr(float(value))])
            for d, v in sorted(rep.knn.items()):
                w.writerow([name, f"knn:{d}", repr(float(v))])


def write_report_wide(path, reports: dict) -> None:
    names = list(next(iter(reports.values())).scalars()) if reports else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["graph"] + names)
        for name, rep in reports.items():
            w.writerow([name] + [repr(float(v)) for v in rep.scalars().values()])


def write_node_tsv(path, report: MetricsReport) -> None:
    cols = ("degree_centrality", "betweenness", "closeness", "pagerank")
    arrays = [getattr(report, c) for c in cols]
    lines = ["node\t" + "\t".join(cols)]
    for i in range(len(arrays[0])):
        lines.append(f"{i + 1}\t" + "\t".join(repr(float(a[i])) for a in arrays))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_report_csv(path) -> list[tuple[str, str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return [(g, m, float(v)) for g, m, v in rows[1:]]
