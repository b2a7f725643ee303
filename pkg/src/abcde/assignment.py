"""Community assignment and the internal/background degree split."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .generator import is_graphical
from .sampling import CommunitySizes, DegreeSequence

log = logging.getLogger(__name__)

# guards ceil() against float noise such as (1 - 0.2) * 10 == 8.000000000000002
_EPS = 1e-9


class ConfigurationError(ValueError):
    """Mixing parameters cannot be realized for these volumes."""


class FeasibilityError(ValueError):
    """Some node has no admissible community with free capacity."""


class Variant(enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class MixingConfig:
    xi: float
    variant: Variant = Variant.GLOBAL

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass(frozen=True, eq=False)
class Membership:
    community_of: np.ndarray
    community_members: list

    @classmethod
    def from_labels(cls, community_of, k: int | None = None) -> Membership:
        labels = np.asarray(community_of, dtype=np.int64)
        k = int(labels.max()) + 1 if k is None else k
        order = np.argsort(labels, kind="stable")
        bounds = np.searchsorted(labels[order], np.arange(k + 1))
        members = [order[bounds[c]:bounds[c + 1]] for c in range(k)]
        return cls(labels, members)

    @property
    def n(self) -> int:
        return len(self.community_of)

    @property
    def k(self) -> int:
        return len(self.community_members)

    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.community_members], dtype=np.int64)

    def volumes(self, degrees) -> np.ndarray:
        return np.bincount(self.community_of, weights=np.asarray(degrees, dtype=float),
                           minlength=self.k).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DegreeSplit:
    internal: np.ndarray
    background: np.ndarray


def effective_xi(xi: float, variant: Variant, community_volume: float,
                 total_volume: float) -> float:
    """Per-community mixing parameter.

    Global returns ``xi``. Local returns ``xi / (1 - W_l / W)``, the value
    whose expected external share ``xi_l * (1 - W_l / W)`` equals ``xi``.
    """
    if Variant(variant) is Variant.GLOBAL:
        return xi
    if xi == 0:
        return 0.0
    if not 0 < community_volume < total_volume:
        raise ConfigurationError(
            f"local mixing needs 0 < W_l < W, got W_l={community_volume}, W={total_volume}")
    value = xi / (1.0 - community_volume / total_volume)
    if value > 1.0 + _EPS:
        raise ConfigurationError(
            f"local mixing parameter {value:.4f} > 1 for a community holding "
            f"{community_volume / total_volume:.1%} of the volume; "
            "lower xi or shrink the largest community")
    return min(value, 1.0)


def mu_from_xi(xi: float, community_volumes, total_volume: float) -> float:
    """Expected fraction of inter-community edges, ``xi * (1 - sum (W_l/W)^2)``."""
    r = np.asarray(community_volumes, dtype=float) / float(total_volume)
    return float(xi * (1.0 - np.sum(r * r)))


def local_xis(xi: float, community_volumes, total_volume: float,
              tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Per-community parameters giving every community external share ``mu``.

    A background endpoint of community ``l`` stays inside with probability
    ``xi_l W_l / B`` where ``B = sum_j xi_j W_j`` is the background volume, so
    the fixed point of ``xi_l = effective_xi(mu, local, xi_l W_l, B)`` is
    solved, starting from ``effective_xi(mu, local, W_l, W)``.
    """
    vols = np.asarray(community_volumes, dtype=float)
    mu = mu_from_xi(xi, vols, total_volume)
    if mu == 0:
        return np.zeros(len(vols))
    cur = np.array([effective_xi(mu, Variant.LOCAL, v, total_volume) for v in vols])
    for _ in range(max_iter):
        bg = vols * cur
        share = bg / bg.sum()
        nxt = mu / (1.0 - share)
        if np.max(np.abs(nxt - cur)) < tol:
            cur = nxt
            break
        cur = nxt
    worst = int(np.argmax(cur))
    if cur[worst] > 1.0 + _EPS:
        raise ConfigurationError(
            f"local mixing parameter {cur[worst]:.4f} > 1 for a community holding "
            f"{vols[worst] / total_volume:.1%} of the volume; "
            "lower xi or shrink the largest community")
    return np.minimum(cur, 1.0)


def _admission_xis(sizes: np.ndarray, mix: MixingConfig) -> np.ndarray:
    if mix.variant is Variant.GLOBAL:
        return np.full(len(sizes), mix.xi)
    # volumes are unknown before assignment; community sizes stand in for them
    n = sizes.sum()
    if len(sizes) == 1:
        return np.zeros(1)
    mu = mu_from_xi(mix.xi, sizes, n)
    return np.array([effective_xi(mu, Variant.LOCAL, s, n) for s in sizes])


def _needed_internal(d, xis):
    return np.ceil((1.0 - xis) * d - _EPS)


def assign_communities(degrees: DegreeSequence, sizes: CommunitySizes,
                       mix: MixingConfig, rng: np.random.Generator) -> Membership:
    """Place nodes, highest degree first, into admissible communities.

    A community ``l`` admits a node of degree ``d`` when
    ``ceil((1 - xi_l) d) <= s_l - 1``. Among admissible communities the choice
    is proportional to remaining free slots. Nodes of equal degree share an
    admissible set, so each degree class is placed in one multivariate
    hypergeometric draw followed by a shuffle, which has the same law as
    placing them one by one.
    """
    d = degrees.degrees
    s = sizes.sizes
    if len(d) != s.sum():
        raise ValueError(f"community sizes sum to {s.sum()}, expected n={len(d)}")
    xis = _admission_xis(s, mix)
    free = s.copy()
    labels = np.empty(len(d), dtype=np.int64)
    uniq, starts = np.unique(-d, return_index=True)
    bounds = list(starts) + [len(d)]
    for g, neg_deg in enumerate(uniq):
        lo, hi = bounds[g], bounds[g + 1]
        deg = -neg_deg
        ok = _needed_internal(deg, xis) <= s - 1
        avail = np.where(ok, free, 0)
        if avail.sum() < hi - lo:
            big = int(s[ok].max()) if ok.any() else 0
            raise FeasibilityError(
                f"no admissible community with free capacity for a node of degree {deg} "
                f"(largest admissible community size: {big}; needs internal degree "
                f"{int(_needed_internal(deg, xis).min())})")
        take = rng.multivariate_hypergeometric(avail, hi - lo)
        group = np.repeat(np.arange(len(s)), take)
        rng.shuffle(group)
        labels[lo:hi] = group
        free -= take
    membership = Membership.from_labels(labels, len(s))
    if mix.xi == 0:
        membership = _balance_parity(d, membership, rng)
    return membership


def _balance_parity(d: np.ndarray, membership: Membership,
                    rng: np.random.Generator) -> Membership:
    """Swap node pairs between odd-volume communities so every volume is even.

    Only used without background mass, where internal degrees equal degrees
    and an odd community volume would otherwise leak into the background.
    """
    labels = membership.community_of.copy()
    sizes = membership.sizes()
    vols = membership.volumes(d)
    odd = np.flatnonzero(vols % 2)
    unresolved = 0
    for a, b in zip(odd[0::2], odd[1::2]):
        ma = np.flatnonzero(labels == a)
        mb = np.flatnonzero(labels == b)
        done = False
        for src, dst, ms, md in ((a, b, ma, mb), (b, a, mb, ma)):
            # odd-degree node leaves src, even-degree node leaves dst
            xs = ms[(d[ms] % 2 == 1) & (d[ms] <= sizes[dst] - 1)]
            ys = md[(d[md] % 2 == 0) & (d[md] <= sizes[src] - 1)]
            if len(xs) and len(ys):
                x, y = rng.choice(xs), rng.choice(ys)
                labels[x], labels[y] = dst, src
                done = True
                break
        unresolved += not done
    if unresolved:
        log.warning("%d community pairs keep odd volume; parity repair will move "
                    "degree to the background graph", unresolved)
    return Membership.from_labels(labels, membership.k)


def community_xis(degrees: DegreeSequence, membership: Membership,
                  mix: MixingConfig) -> np.ndarray:
    if mix.variant is Variant.GLOBAL:
        return np.full(membership.k, mix.xi)
    vols = membership.volumes(degrees.degrees)
    return local_xis(mix.xi, vols, float(vols.sum()))


def _repair_graphical(internal: np.ndarray, background: np.ndarray, members: np.ndarray) -> int:
    """Move pairs of units to the background until the community sequence is graphical."""
    moved = 0
    while not is_graphical(internal[members]):
        for _ in range(2):
            local = internal[members]
            top = members[np.flatnonzero(local == local.max())[0]]
            internal[top] -= 1
            background[top] += 1
        moved += 2
    return moved


def split_degrees(degrees: DegreeSequence, membership: Membership, mix: MixingConfig,
                  rng: np.random.Generator) -> DegreeSplit:
    """Split each degree into community and background parts.

    The background part is ``xi_l * d`` rounded stochastically. Internal
    degrees are capped at community size minus one, and each community with
    an odd internal sum moves one unit to the background from its member with
    the largest internal degree (lowest node id on ties). A community whose
    internal sequence still has no simple realization keeps moving units,
    two at a time and again from its largest internal degree, until it has one.
    """
    d = degrees.degrees
    labels = membership.community_of
    xis = community_xis(degrees, membership, mix)
    target = xis[labels] * d
    base = np.floor(target + _EPS)
    frac = np.clip(target - base, 0.0, 1.0)
    background = (base + (rng.random(len(d)) < frac)).astype(np.int64)
    background = np.minimum(background, d)
    internal = d - background

    cap = membership.sizes()[labels] - 1
    over = np.maximum(internal - cap, 0)
    internal -= over
    background += over

    sums = np.bincount(labels, weights=internal, minlength=membership.k).astype(np.int64)
    odd = sums % 2 == 1
    if odd.any():
        nodes = np.flatnonzero(odd[labels])
        order = np.lexsort((nodes, -internal[nodes], labels[nodes]))
        ranked = nodes[order]
        first = np.ones(len(ranked), dtype=bool)
        first[1:] = labels[ranked][1:] != labels[ranked][:-1]
        pick = ranked[first]
        internal[pick] -= 1
        background[pick] += 1

    moved = 0
    for members in membership.community_members:
        moved += _repair_graphical(internal, background, members)
    if moved:
        log.info("moved %d internal degree units to the background to keep community "
                 "degree sequences graphical", moved)
    return DegreeSplit(internal, background)


def check_split(degrees: DegreeSequence, membership: Membership, split: DegreeSplit) -> None:
    """Raise ``AssertionError`` unless every split invariant holds."""
    d = degrees.degrees
    assert (split.internal >= 0).all() and (split.background >= 0).all()
    assert (split.internal + split.background == d).all()
    sums = np.bincount(membership.community_of, weights=split.internal, minlength=membership.k)
    assert (sums.astype(np.int64) % 2 == 0).all()
    assert split.background.sum() % 2 == 0
    assert (split.internal <= membership.sizes()[membership.community_of] - 1).all()


def write_membership(path, membership: Membership) -> None:
    """One ``node<TAB>community`` line per node, both 1-based, nodes ascending."""
    labels = membership.community_of + 1
    text = "".join(f"{i}\t{c}\n" for i, c in enumerate(labels.tolist(), start=1))
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def read_membership(path) -> Membership:
    labels = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            node, comm = (int(x) for x in line.split())
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: expected 'node<TAB>community'") from None
        labels[node - 1] = comm - 1
    n = max(labels) + 1
    if len(labels) != n:
        raise ValueError(f"{path}: membership does not cover nodes 1..{n}")
    arr = np.array([labels[i] for i in range(n)], dtype=np.int64)
    return Membership.from_labels(arr)
