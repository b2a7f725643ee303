"""Configuration-model and Chung-Lu graph kernels plus simple-graph rewiring.

Edges are held as parallel int64 endpoint arrays. A simple graph is stored
canonically as a sorted array of keys ``u * n + v`` with ``u < v``; that
encoding is what the rewiring loop and the merge stage operate on.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 100
# swap proposals per defect per rewiring round
DEFAULT_ATTEMPTS = 64
# stuck rounds try three-edge moves for at most this many defects
TRIPLE_MAX_DEFECTS = 64


class RewiringError(RuntimeError):
    """Rewiring did not reach a simple graph within the round budget."""

    def __init__(self, residual: int, rounds: int, what: str = "defects"):
        super().__init__(f"{residual} unresolved {what} after {rounds} rewiring rounds")
        self.residual = residual
        self.rounds = rounds


class GraphKernel(enum.Enum):
    CONFIGURATION_MODEL = "cm"
    CHUNG_LU = "cl"


@dataclass(frozen=True)
class MultiGraph:
    """Edge multiset on ``n`` nodes; loops and parallel edges allowed."""

    n: int
    u: np.ndarray
    v: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.u)

    def degrees(self) -> np.ndarray:
        # a loop contributes 2 to its node
        return (np.bincount(self.u, minlength=self.n)
                + np.bincount(self.v, minlength=self.n))


@dataclass(frozen=True, eq=False)
class SimpleGraph:
    """Undirected simple graph; ``u < v`` and edges sorted by ``(u, v)``."""

    n: int
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_keys(cls, n: int, keys: np.ndarray) -> SimpleGraph:
        keys = np.asarray(keys, dtype=np.int64)
        return cls(n, keys // n, keys % n)

    @classmethod
    def from_edges(cls, n: int, edges) -> SimpleGraph:
        """Build from an iterable of pairs, rejecting loops and duplicates."""
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        a, b = arr.min(axis=1), arr.max(axis=1)
        if (a == b).any():
            raise ValueError("self-loop in simple graph")
        keys = np.sort(a * n + b)
        if (np.diff(keys) == 0).any():
            raise ValueError("duplicate edge in simple graph")
        return cls.from_keys(n, keys)

    @classmethod
    def empty(cls, n: int) -> SimpleGraph:
        return cls.from_keys(n, np.empty(0, dtype=np.int64))

    def keys(self) -> np.ndarray:
        return self.u * self.n + self.v

    @property
    def edge_count(self) -> int:
        return len(self.u)

    def degrees(self) -> np.ndarray:
        return (np.bincount(self.u, minlength=self.n)
                + np.bincount(self.v, minlength=self.n))

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 CSR adjacency matrix (float64)."""
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def is_simple(self) -> bool:
        keys = self.keys()
        return bool((self.u < self.v).all() and (np.diff(keys) > 0).all())


def configuration_model(w, rng: np.random.Generator) -> MultiGraph:
    """Uniform random pairing of degree points.

    Points are laid out bucket by bucket, permuted with a Fisher-Yates shuffle,
    and point ``p[j]`` is paired with ``p[W/2 + j]``.
    """
    w = np.asarray(w, dtype=np.int64)
    total = int(w.sum())
    if total % 2:
        raise ValueError(f"degree sum must be even, got {total}")
    points = np.repeat(np.arange(len(w), dtype=np.int64), w)
    rng.shuffle(points)
    half = total // 2
    return MultiGraph(len(w), points[:half].copy(), points[half:].copy())


def _insert_sorted(base: np.ndarray, new: np.ndarray) -> np.ndarray:
    new = np.sort(new)
    return np.insert(base, np.searchsorted(base, new), new)


def _member(sorted_keys: np.ndarray, keys: np.ndarray) -> np.ndarray:
    if len(sorted_keys) == 0:
        return np.zeros(len(keys), dtype=bool)
    pos = np.searchsorted(sorted_keys, keys)
    pos[pos == len(sorted_keys)] = 0
    return sorted_keys[pos] == keys


def _first_owner_wins(keys: np.ndarray, owner: np.ndarray, n_owners: int) -> np.ndarray:
    """Owners that hold the first (lowest-owner) claim on every key they use."""
    order = np.lexsort((owner, keys))
    k, o = keys[order], owner[order]
    lose = np.zeros(len(k), dtype=bool)
    lose[1:] = k[1:] == k[:-1]
    ok = np.ones(n_owners, dtype=bool)
    ok[o[lose]] = False
    return ok


def _neutral_swaps(good: np.ndarray, lo: np.ndarray, hi: np.ndarray, n: int,
                   rng: np.random.Generator, forbidden: np.ndarray,
                   attempts: int) -> np.ndarray:
    m = len(good)
    lo, hi = np.repeat(lo, attempts), np.repeat(hi, attempts)
    k = len(lo)
    x = np.where(rng.random(k) < 0.5, lo, hi)
    gu, gv = good // n, good % n
    ends = np.concatenate([gu, gv])
    edge_of = np.concatenate([np.arange(m), np.arange(m)])
    order = np.argsort(ends, kind="stable")
    ends = ends[order]
    start = np.searchsorted(ends, x, side="left")
    deg = np.searchsorted(ends, x, side="right") - start
    pick = start + np.floor(rng.random(k) * deg).astype(np.int64)
    pe = edge_of[order[np.minimum(pick, 2 * m - 1)]]
    c = gu[pe] + gv[pe] - x
    pf = rng.integers(0, m, size=k)
    flip = rng.random(k) < 0.5
    a = np.where(flip, gv[pf], gu[pf])
    b = np.where(flip, gu[pf], gv[pf])
    e1 = np.minimum(x, a) * n + np.maximum(x, a)
    e2 = np.minimum(c, b) * n + np.maximum(c, b)
    valid = (deg > 0) & (pe != pf) & (x != a) & (c != b) & (e1 != e2)
    for e in (e1, e2):
        valid &= ~_member(good, e) & ~_member(forbidden, e)
    idx = np.flatnonzero(valid)
    if len(idx) == 0:
        return good
    owner = np.arange(len(idx))
    both = np.concatenate([owner, owner])
    win = (_first_owner_wins(np.concatenate([pe[idx], pf[idx]]), both, len(idx))
           & _first_owner_wins(np.concatenate([e1[idx], e2[idx]]), both, len(idx)))
    idx = idx[win]
    good = np.delete(good, np.concatenate([pe[idx], pf[idx]]))
    return _insert_sorted(good, np.concatenate([e1[idx], e2[idx]]))


def _triple_moves(good: np.ndarray, lo: np.ndarray, hi: np.ndarray, n: int,
                  rng: np.random.Generator, forbidden: np.ndarray,
                  tries: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Fix defects ``{x, y}`` with moves that touch two valid edges.

    ``{x, y}, {a, p}, {b, q}`` become ``{x, a}, {y, b}, {p, q}`` where ``a``
    is not adjacent to ``x`` and ``b`` is not adjacent to ``y``. This reaches
    a loop at a hub whose few non-neighbours share no edge, which no single
    swap can fix. Defects are handled one at a time; returns the new keys and
    a mask of fixed defects.
    """
    fixed = np.zeros(len(lo), dtype=bool)
    if len(lo) > TRIPLE_MAX_DEFECTS or len(good) < 2:
        return good, fixed
    for i in range(len(lo)):
        x, y = int(lo[i]), int(hi[i])
        gu, gv = good // n, good % n
        # oriented edge slots: endpoint first, other end second
        ends = np.concatenate([gu, gv])
        other = np.concatenate([gv, gu])
        slot_edge = np.concatenate([np.arange(len(good)), np.arange(len(good))])
        opts = []
        for z in (x, y):
            adj = np.zeros(n, dtype=bool)
            adj[other[ends == z]] = True
            adj[z] = True
            opts.append(np.flatnonzero(~adj[ends]))
        if len(opts[0]) == 0 or len(opts[1]) == 0:
            continue
        s1 = opts[0][rng.integers(0, len(opts[0]), size=tries)]
        s2 = opts[1][rng.integers(0, len(opts[1]), size=tries)]
        a, p = ends[s1], other[s1]
        b, q = ends[s2], other[s2]
        e1, e2 = slot_edge[s1], slot_edge[s2]
        k1 = np.minimum(x, a) * n + np.maximum(x, a)
        k2 = np.minimum(y, b) * n + np.maximum(y, b)
        k3 = np.minimum(p, q) * n + np.maximum(p, q)
        ok = (e1 != e2) & (p != q) & (k1 != k2) & (k1 != k3) & (k2 != k3)
        # the two removed edges may not be re-created by the third new edge
        ok &= (k3 != good[e1]) & (k3 != good[e2])
        for kk in (k1, k2, k3):
            ok &= ~_member(good, kk) & ~_member(forbidden, kk)
        hit = np.flatnonzero(ok)
        if len(hit) == 0:
            continue
        j = hit[0]
        good = np.delete(good, [e1[j], e2[j]])
        good = _insert_sorted(good, np.array([k1[j], k2[j], k3[j]]))
        fixed[i] = True
    return good, fixed


def repair_rounds(good: np.ndarray, du: np.ndarray, dv: np.ndarray, n: int,
                  rng: np.random.Generator, max_rounds: int,
                  forbidden: np.ndarray | None = None, what: str = "defects",
                  attempts: int = DEFAULT_ATTEMPTS) -> tuple[np.ndarray, int]:
    """Rewire defective edges away by degree-preserving swaps.

    ``good`` holds the sorted keys of the currently valid edges; ``du, dv`` are
    the endpoints of the defective ones. An edge is valid when it is not a
    loop, not a repeat and not in ``forbidden``.

    Each round first re-admits defects that have become valid. Every remaining
    defect ``{x, y}`` then draws ``attempts`` valid edges ``{a, b}`` uniformly
    and, for each, proposes ``{x, a}, {y, b}`` or ``{x, b}, {y, a}`` with
    equal odds; the first proposal whose two new edges are both valid is
    taken. When two defects claim the same sampled edge or the same new edge,
    the lower-indexed defect wins and the other waits for the next round.
    Swaps never turn a valid edge into a defect, so the defect count is
    non-increasing.

    A round that fixes nothing tries three-edge moves next (see
    ``_triple_moves``), and failing those makes one neutral swap per defect:
    a valid edge ``{x, c}`` at a defect endpoint and a uniform valid edge
    ``{a, b}`` become ``{x, a}, {c, b}``. This moves the neighbourhood of a
    stuck endpoint (typically a hub of a dense community graph) without
    creating defects.

    Returns the final sorted key array and the number of rounds run.
    """
    du = np.asarray(du, dtype=np.int64)
    dv = np.asarray(dv, dtype=np.int64)
    if forbidden is None:
        forbidden = np.empty(0, dtype=np.int64)
    rounds = 0
    while True:
        lo, hi = np.minimum(du, dv), np.maximum(du, dv)
        keys = lo * n + hi
        first = np.zeros(len(keys), dtype=bool)
        first[np.unique(keys, return_index=True)[1]] = True
        ok = (lo != hi) & first & ~_member(good, keys) & ~_member(forbidden, keys)
        if ok.any():
            good = _insert_sorted(good, keys[ok])
            lo, hi = lo[~ok], hi[~ok]
        if len(lo) == 0:
            return good, rounds
        if rounds >= max_rounds:
            raise RewiringError(len(lo), rounds, what)
        rounds += 1
        du, dv = lo, hi
        if len(good) == 0:
            continue

        k = len(lo)
        pos = rng.integers(0, len(good), size=(k, attempts))
        flip = rng.random((k, attempts)) < 0.5
        sa, sb = good[pos] // n, good[pos] % n
        a = np.where(flip, sb, sa)
        b = np.where(flip, sa, sb)
        x, y = lo[:, None], hi[:, None]
        e1 = np.minimum(x, a) * n + np.maximum(x, a)
        e2 = np.minimum(y, b) * n + np.maximum(y, b)
        valid = (x != a) & (y != b) & (e1 != e2)
        for e in (e1, e2):
            flat = e.ravel()
            valid &= (~_member(good, flat) & ~_member(forbidden, flat)).reshape(e.shape)

        cand = np.flatnonzero(valid.any(axis=1))
        if len(cand) == 0:
            good, fixed = _triple_moves(good, lo, hi, n, rng, forbidden)
            if fixed.any():
                du, dv = lo[~fixed], hi[~fixed]
            else:
                good = _neutral_swaps(good, lo, hi, n, rng, forbidden, attempts)
            continue
        j = valid[cand].argmax(axis=1)
        cpos, c1, c2 = pos[cand, j], e1[cand, j], e2[cand, j]
        nc = len(cand)
        owner = np.arange(nc)
        win = (_first_owner_wins(cpos, owner, nc)
               & _first_owner_wins(np.concatenate([c1, c2]), np.concatenate([owner, owner]), nc))

        if win.any():
            good = np.delete(good, cpos[win])
            good = _insert_sorted(good, np.concatenate([c1[win], c2[win]]))
            keep = np.ones(k, dtype=bool)
            keep[cand[win]] = False
            du, dv = lo[keep], hi[keep]
        else:
            good = _neutral_swaps(good, lo, hi, n, rng, forbidden, attempts)


def rewire_to_simple(g: MultiGraph, rng: np.random.Generator,
                     max_rounds: int = DEFAULT_MAX_ROUNDS) -> SimpleGraph:
    """Degree-preserving rewiring of self-loops and parallel edges.

    Of each class of parallel edges one copy survives; every loop and every
    surplus copy is a defect. Raises :class:`RewiringError` with the residual
    defect count if defects persist after ``max_rounds`` rounds.
    """
    n = g.n
    a, b = np.minimum(g.u, g.v), np.maximum(g.u, g.v)
    keys = a * n + b
    loop = a == b
    order = np.argsort(keys, kind="stable")
    skeys = keys[order]
    dup = np.zeros(len(keys), dtype=bool)
    dup[order[1:][skeys[1:] == skeys[:-1]]] = True
    defect = loop | dup
    good = np.unique(keys[~defect])
    good, _ = repair_rounds(good, a[defect], b[defect], n, rng, max_rounds)
    return SimpleGraph.from_keys(n, good)


def _sample_distinct(sizes: np.ndarray, counts: np.ndarray,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """For each block ``i`` pick ``counts[i]`` distinct indices in ``[0, sizes[i])``.

    Returns ``(block, index)`` arrays. Every subset of the requested size is
    equally likely.
    """
    blocks_out, idx_out = [], []
    dense = 2 * counts > sizes
    for i in np.flatnonzero(dense):
        # complement sampling keeps the work proportional to the output
        drop = rng.choice(sizes[i], size=sizes[i] - counts[i], replace=False)
        keep = np.ones(sizes[i], dtype=bool)
        keep[drop] = False
        idx = np.flatnonzero(keep)
        blocks_out.append(np.full(len(idx), i, dtype=np.int64))
        idx_out.append(idx)

    sparse_blocks = np.flatnonzero(~dense & (counts > 0))
    if len(sparse_blocks):
        offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        want = counts[sparse_blocks]
        chosen = np.empty(0, dtype=np.int64)
        need = want.copy()
        while need.sum():
            blk = np.repeat(sparse_blocks, need)
            draw = offsets[blk] + rng.integers(0, sizes[blk])
            chosen = np.unique(np.concatenate([chosen, draw]))
            have = np.bincount(np.searchsorted(offsets, chosen, side="right") - 1,
                               minlength=len(sizes))[sparse_blocks]
            need = want - have
        blk = np.searchsorted(offsets, chosen, side="right") - 1
        blocks_out.append(blk)
        idx_out.append(chosen - offsets[blk])

    if not blocks_out:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(blocks_out), np.concatenate(idx_out)


def _triangle_decode(r: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major index of pair ``(i, j)``, ``i < j < c``."""
    def start(i):
        return i * (2 * c - i - 1) // 2

    disc = (2 * c - 1).astype(float) ** 2 - 8 * r.astype(float)
    i = np.floor(((2 * c - 1) - np.sqrt(np.maximum(disc, 0))) / 2).astype(np.int64)
    i = np.clip(i, 0, np.maximum(c - 2, 0))
    while True:
        over = start(i) > r
        under = start(i + 1) <= r
        if not (over.any() or under.any()):
            break
        i = i - over + under
    return i, r - start(i) + i + 1


def chung_lu(w, rng: np.random.Generator) -> SimpleGraph:
    """Chung-Lu graph: each pair ``{i, j}``, ``i != j``, is an edge independently
    with probability ``w_i * w_j / W`` (clamped to 1). The diagonal term is
    dropped, so the graph is simple by construction.

    Nodes sharing a weight form a class; every pair of classes is a block of
    equiprobable pairs. The number of edges in a block is binomial and the
    edges themselves are a uniform subset of the block, which is the same law
    as independent Bernoulli trials per pair.
    """
    w = np.asarray(w, dtype=float)
    n = len(w)
    total = w.sum()
    if total <= 0:
        return SimpleGraph.empty(n)
    values, inverse = np.unique(w, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    class_count = np.bincount(inverse, minlength=len(values))
    class_start = np.concatenate([[0], np.cumsum(class_count)[:-1]])
    live = np.flatnonzero(values > 0)
    ca, cb = np.triu_indices(len(live))
    ca, cb = live[ca], live[cb]
    na, nb = class_count[ca], class_count[cb]
    same = ca == cb
    pairs = np.where(same, na * (na - 1) // 2, na * nb).astype(np.int64)
    prob = values[ca] * values[cb] / total
    if (prob > 1).any():
        log.warning("Chung-Lu pair probabilities exceed 1 (max %.3f); clamping", prob.max())
        prob = np.minimum(prob, 1.0)
    hits = rng.binomial(pairs, prob)
    blk, idx = _sample_distinct(pairs, hits, rng)
    if len(blk) == 0:
        return SimpleGraph.empty(n)

    a_cls, b_cls = ca[blk], cb[blk]
    i = np.empty(len(blk), dtype=np.int64)
    j = np.empty(len(blk), dtype=np.int64)
    s = same[blk]
    if s.any():
        i[s], j[s] = _triangle_decode(idx[s], na[blk][s])
    i[~s] = idx[~s] // nb[blk][~s]
    j[~s] = idx[~s] % nb[blk][~s]
    x = order[class_start[a_cls] + i]
    y = order[class_start[b_cls] + j]
    keys = np.sort(np.minimum(x, y) * n + np.maximum(x, y))
    return SimpleGraph.from_keys(n, keys)


def is_graphical(degrees) -> bool:
    """Erdos-Gallai test for a sequence of non-negative integers with even sum."""
    d = np.sort(np.asarray(degrees, dtype=np.int64))[::-1]
    if d.sum() % 2:
        return False
    n = len(d)
    if n == 0:
        return True
    k = np.arange(1, n + 1)
    lhs = np.cumsum(d)
    # p[k-1] = number of entries >= k
    p = n - np.searchsorted(d[::-1], k, side="left")
    suffix = np.concatenate([np.cumsum(d[::-1])[::-1], [0]])
    tail = k * np.maximum(p - k, 0) + suffix[np.maximum(k, p)]
    return bool((lhs <= k * (k - 1) + tail).all())


def havel_hakimi(w) -> SimpleGraph:
    """Deterministic simple realization of a graphical sequence.

    The node with the largest remaining degree is joined to the nodes with
    the next largest remaining degrees (ties to the lowest id).
    """
    rem = np.asarray(w, dtype=np.int64).copy()
    n = len(rem)
    keys = []
    while True:
        order = np.lexsort((np.arange(n), -rem))
        x = order[0]
        d = rem[x]
        if d == 0:
            break
        targets = order[1:d + 1]
        if len(targets) < d or rem[targets].min() <= 0:
            raise ValueError("degree sequence is not graphical")
        rem[x] = 0
        rem[targets] -= 1
        keys.append(np.minimum(x, targets) * n + np.maximum(x, targets))
    out = np.sort(np.concatenate(keys)) if keys else np.empty(0, dtype=np.int64)
    return SimpleGraph.from_keys(n, out)


def mix_swaps(g: SimpleGraph, rng: np.random.Generator, sweeps: int = 10) -> SimpleGraph:
    """Randomize a simple graph by degree-preserving double-edge swaps.

    Each sweep proposes one swap ``{a, b}, {c, d} -> {a, d}, {c, b}`` per
    edge; conflicting proposals are dropped by first-owner-wins.
    """
    n, good = g.n, g.keys()
    m = len(good)
    if m < 2:
        return g
    for _ in range(sweeps):
        i = rng.integers(0, m, size=m)
        j = rng.integers(0, m, size=m)
        flip = rng.random(m) < 0.5
        a, b = good[i] // n, good[i] % n
        c = np.where(flip, good[j] % n, good[j] // n)
        d = np.where(flip, good[j] // n, good[j] % n)
        e1 = np.minimum(a, d) * n + np.maximum(a, d)
        e2 = np.minimum(c, b) * n + np.maximum(c, b)
        ok = (i != j) & (a != d) & (c != b) & (e1 != e2)
        ok &= ~_member(good, e1) & ~_member(good, e2)
        idx = np.flatnonzero(ok)
        owner = np.arange(len(idx))
        both = np.concatenate([owner, owner])
        win = (_first_owner_wins(np.concatenate([i[idx], j[idx]]), both, len(idx))
               & _first_owner_wins(np.concatenate([e1[idx], e2[idx]]), both, len(idx)))
        idx = idx[win]
        good = np.delete(good, np.concatenate([i[idx], j[idx]]))
        good = _insert_sorted(good, np.concatenate([e1[idx], e2[idx]]))
    return SimpleGraph.from_keys(n, good)


def generate(kernel: GraphKernel, w, rng: np.random.Generator,
             max_rounds: int = DEFAULT_MAX_ROUNDS, fallback: bool = True) -> SimpleGraph:
    """One simple graph on ``len(w)`` nodes with the chosen kernel.

    With ``fallback``, a configuration-model draw whose rewiring does not
    converge is replaced by a swap-randomized Havel-Hakimi realization when
    the sequence is graphical; otherwise the rewiring error propagates.
    """
    if kernel is GraphKernel.CONFIGURATION_MODEL:
        try:
            return rewire_to_simple(configuration_model(w, rng), rng, max_rounds)
        except RewiringError:
            if not fallback or not is_graphical(w):
                raise
            log.info("rewiring did not converge on a graphical sequence of %d nodes; "
                     "using a swap-randomized deterministic realization", len(w))
            return mix_swaps(havel_hakimi(w), rng)
    return chung_lu(w, rng)
