"""Brute-force reference implementations used as test oracles.

Nothing here imports the package under test. Graphs are given as ``(n, edges)``
with 0-based node ids and edges as pairs.
"""

from __future__ import annotations

import itertools
import math
import statistics
from collections import deque
from fractions import Fraction

import numpy as np


def power_law_mass(exponent, lo, hi):
    xs = list(range(lo, hi + 1))
    ws = [x ** -exponent for x in xs]
    z = math.fsum(ws)
    return {x: w / z for x, w in zip(xs, ws)}


def neighbours(n, edges):
    nb = [set() for _ in range(n)]
    for a, b in edges:
        nb[a].add(b)
        nb[b].add(a)
    return nb


def triangle_and_wedge_counts(n, edges):
    nb = neighbours(n, edges)
    tri = [0] * n
    for a, b, c in itertools.combinations(range(n), 3):
        if b in nb[a] and c in nb[a] and c in nb[b]:
            tri[a] += 1
            tri[b] += 1
            tri[c] += 1
    wedges = [len(nb[v]) * (len(nb[v]) - 1) // 2 for v in range(n)]
    return tri, wedges


def global_clustering(n, edges):
    tri, wedges = triangle_and_wedge_counts(n, edges)
    return Fraction(sum(tri), sum(wedges)) if sum(wedges) else Fraction(0)


def avg_local_clustering(n, edges):
    tri, wedges = triangle_and_wedge_counts(n, edges)
    vals = [Fraction(t, w) if w else Fraction(0) for t, w in zip(tri, wedges)]
    return sum(vals, Fraction(0)) / n


def bfs(nb, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        x = q.popleft()
        for y in nb[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def path_counts(nb, s):
    """Distances and number of shortest paths from ``s``."""
    dist = bfs(nb, s)
    sigma = {s: 1}
    for x in sorted(dist, key=dist.get):
        if x == s:
            continue
        sigma[x] = sum(sigma[y] for y in nb[x] if dist.get(y) == dist[x] - 1)
    return dist, sigma


def betweenness(n, edges):
    """Sum over unordered pairs {s, t} of sigma_st(v) / sigma_st."""
    nb = neighbours(n, edges)
    info = [path_counts(nb, s) for s in range(n)]
    bc = [Fraction(0)] * n
    for s, t in itertools.combinations(range(n), 2):
        ds, ss = info[s]
        if t not in ds:
            continue
        dt, st = info[t]
        for v in range(n):
            if v in (s, t) or v not in ds or v not in dt:
                continue
            if ds[v] + dt[v] == ds[t]:
                bc[v] += Fraction(ss[v] * st[v], ss[t])
    return bc


def closeness(n, edges):
    nb = neighbours(n, edges)
    out = []
    for v in range(n):
        d = bfs(nb, v)
        total = sum(d.values())
        out.append(Fraction(len(d) - 1, total) if total else Fraction(0))
    return out


def pagerank(n, edges, damping=0.85):
    """Exact solution of the PageRank linear system."""
    nb = neighbours(n, edges)
    m = np.zeros((n, n))
    for j in range(n):
        if nb[j]:
            for i in nb[j]:
                m[i, j] = 1.0 / len(nb[j])
        else:
            m[:, j] = 1.0 / n
    a = np.eye(n) - damping * m
    return np.linalg.solve(a, np.full(n, (1 - damping) / n))


def knn(n, edges):
    nb = neighbours(n, edges)
    by_deg = {}
    for v in range(n):
        if nb[v]:
            mean_nb = Fraction(sum(len(nb[u]) for u in nb[v]), len(nb[v]))
            by_deg.setdefault(len(nb[v]), []).append(mean_nb)
    return {d: sum(vs, Fraction(0)) / len(vs) for d, vs in by_deg.items()}


def assortativity(n, edges):
    nb = neighbours(n, edges)
    x = [len(nb[a]) for a, b in edges] + [len(nb[b]) for a, b in edges]
    y = [len(nb[b]) for a, b in edges] + [len(nb[a]) for a, b in edges]
    if len(set(x)) < 2:
        return math.nan
    return statistics.correlation(x, y)


def correlation_exponent(n, edges):
    k = {d: v for d, v in knn(n, edges).items() if v > 0}
    if len(k) < 2:
        return math.nan
    ds = sorted(k)
    return statistics.linear_regression([math.log(d) for d in ds],
                                        [math.log(k[d]) for d in ds]).slope


def intra_fraction(edges, labels):
    return Fraction(sum(labels[a] == labels[b] for a, b in edges), len(edges))


def participation(n, edges, labels):
    nb = neighbours(n, edges)
    vals = []
    for v in range(n):
        if not nb[v]:
            continue
        counts = {}
        for u in nb[v]:
            counts[labels[u]] = counts.get(labels[u], 0) + 1
        vals.append(1 - sum(Fraction(c, len(nb[v])) ** 2 for c in counts.values()))
    return sum(vals, Fraction(0)) / len(vals)


def modularity(n, edges, labels):
    m = len(edges)
    nb = neighbours(n, edges)
    q = Fraction(0)
    for c in set(labels):
        inside = sum(labels[a] == c and labels[b] == c for a, b in edges)
        vol = sum(len(nb[v]) for v in range(n) if labels[v] == c)
        q += Fraction(inside, m) - Fraction(vol, 2 * m) ** 2
    return q


def avg_shortest_path(n, edges):
    nb = neighbours(n, edges)
    comps, seen = [], set()
    for v in range(n):
        if v not in seen:
            c = set(bfs(nb, v))
            seen |= c
            comps.append(c)
    big = max(comps, key=len)
    total = pairs = 0
    for s in big:
        d = bfs(nb, s)
        for t in big:
            if t != s:
                total += d[t]
                pairs += 1
    return Fraction(total, pairs)


def perfect_matchings(points):
    """All ways to pair up a list of distinct points."""
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for i, other in enumerate(rest):
        for tail in perfect_matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + tail


def simple_graphs_with_degrees(degrees):
    n = len(degrees)
    pairs = list(itertools.combinations(range(n), 2))
    m = sum(degrees) // 2
    out = []
    for chosen in itertools.combinations(pairs, m):
        deg = [0] * n
        for a, b in chosen:
            deg[a] += 1
            deg[b] += 1
        if deg == list(degrees):
            out.append(frozenset(chosen))
    return out


def chung_lu_moments(w):
    """Per-node mean and variance of the degree, loops excluded."""
    w = np.asarray(w, dtype=float)
    p = np.minimum(np.outer(w, w) / w.sum(), 1.0)
    np.fill_diagonal(p, 0.0)
    return p.sum(axis=1), (p * (1 - p)).sum(axis=1)


def size_draw_sequences(n, lo, hi):
    """Every draw sequence whose running total first reaches ``n`` at its last draw."""
    out = []

    def rec(prefix, total):
        for x in range(lo, hi + 1):
            if total + x >= n:
                out.append(prefix + [x])
            else:
                rec(prefix + [x], total + x)

    rec([], 0)
    return out


def random_simple_graph(rng, n, p):
    return [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
