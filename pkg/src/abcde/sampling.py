"""Truncated discrete power-law sampling of degrees and community sizes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class SequenceFileError(ValueError):
    """Raised for malformed or invalid sequence files."""


@dataclass(frozen=True)
class PowerLawSpec:
    """Discrete power law ``Pr(x) ~ x**-exponent`` truncated to ``[lo, hi]``."""

    exponent: float
    lo: int
    hi: int

    def __post_init__(self):
        if not self.exponent > 1:
            raise ValueError(f"exponent must be > 1, got {self.exponent}")
        if self.lo < 1:
            raise ValueError(f"lo must be a positive integer, got {self.lo}")
        if self.lo > self.hi:
            raise ValueError(f"lo ({self.lo}) must not exceed hi ({self.hi})")

    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def pmf(self) -> np.ndarray:
        """Exact normalized mass over ``support()``."""
        weights = self.support().astype(float) ** -self.exponent
        return weights / weights.sum()

    def mean(self) -> float:
        return float(np.dot(self.support(), self.pmf()))

    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.pmf())
        cdf[-1] = 1.0
        return cdf


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.degrees, dtype=np.int64)
        if d.ndim != 1 or len(d) == 0:
            raise ValueError("degree sequence must be a non-empty 1-d sequence")
        if (d < 1).any():
            raise ValueError("degrees must be positive")
        if d.sum() % 2:
            raise ValueError("degree sum must be even")
        if (np.diff(d) > 0).any():
            raise ValueError("degrees must be non-increasing")
        object.__setattr__(self, "degrees", d)

    def __len__(self):
        return len(self.degrees)

    def volume(self) -> int:
        return int(self.degrees.sum())


@dataclass(frozen=True)
class CommunitySizes:
    sizes: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sizes, dtype=np.int64)
        if s.ndim != 1 or len(s) == 0:
            raise ValueError("community sizes must be a non-empty 1-d sequence")
        if (s < 1).any():
            raise ValueError("community sizes must be positive")
        if (np.diff(s) > 0).any():
            raise ValueError("community sizes must be non-increasing")
        object.__setattr__(self, "sizes", s)

    def __len__(self):
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(self.sizes.sum())


def _draw(spec: PowerLawSpec, rng: np.random.Generator, size=None):
    u = rng.random(size)
    return spec.lo + np.searchsorted(spec._cdf(), u, side="right")


def sample_power_law(spec: PowerLawSpec, rng: np.random.Generator) -> int:
    """Draw one value by inverting the cumulative mass on a uniform draw."""
    return int(_draw(spec, rng))


def _repair_parity(degrees: np.ndarray, lo: int) -> np.ndarray:
    # degrees is sorted non-increasing; the first entry is a maximum
    if degrees.sum() % 2 == 0:
        return degrees
    degrees = degrees.copy()
    if degrees[0] > 1:
        degrees[0] -= 1
    else:
        degrees[0] += 1
    if degrees[0] < lo:
        log.warning("odd degree sum repaired below the lower bound: %d < %d", degrees[0], lo)
    return np.sort(degrees)[::-1].copy()


def sample_degrees(n: int, spec: PowerLawSpec, rng: np.random.Generator) -> DegreeSequence:
    """Sample ``n`` i.i.d. degrees, sorted non-increasing, with even sum.

    An odd sum is repaired by decrementing one maximum-degree entry.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = np.sort(_draw(spec, rng, n))[::-1]
    return DegreeSequence(_repair_parity(d, spec.lo))


def _repair_sizes(draws, n: int, s_min: int, s_max: int) -> list[int]:
    """Turn a draw sequence whose total first reaches ``n`` into an exact tiling.

    ``draws`` must satisfy ``sum(draws) >= n`` and ``sum(draws[:-1]) < n``.
    """
    sizes = [int(x) for x in draws]
    excess = sum(sizes) - n
    if excess == 0:
        return sorted(sizes, reverse=True)
    if sizes[-1] - excess >= s_min:
        sizes[-1] -= excess
        return sorted(sizes, reverse=True)

    sizes.pop()
    rest = sorted(sizes, reverse=True)
    shortfall = n - sum(rest)
    grown = list(rest)
    for i in range(len(grown)):
        if shortfall == 0:
            break
        add = min(s_max - grown[i], shortfall)
        grown[i] += add
        shortfall -= add
    if shortfall == 0:
        return sorted(grown, reverse=True)

    # Every survivor is saturated: keep the dropped community at s_min and
    # trim the largest survivors instead, never below s_min.
    trimmed = rest + [s_min]
    surplus = sum(trimmed) - n
    for i in range(len(trimmed) - 1):
        if surplus == 0:
            break
        take = min(trimmed[i] - s_min, surplus)
        trimmed[i] -= take
        surplus -= take
    if surplus == 0:
        return sorted(trimmed, reverse=True)

    log.warning("community sizes could not be tiled inside [%d, %d]; "
                "enlarging the largest community", s_min, s_max)
    grown[0] += shortfall
    return sorted(grown, reverse=True)


def sample_community_sizes(n: int, spec: PowerLawSpec,
                           rng: np.random.Generator) -> CommunitySizes:
    """Draw community sizes until they cover ``n`` nodes, then repair the sum to ``n``."""
    if spec.lo > n:
        raise ValueError(f"minimum community size {spec.lo} exceeds n={n}")
    if spec.hi > n:
        raise ValueError(f"maximum community size {spec.hi} exceeds n={n}")
    # draw in batches; the expected count is n / mean
    batch = max(16, int(math.ceil(1.2 * n / spec.mean())) + 1)
    draws: list[int] = []
    total = 0
    while total < n:
        chunk = _draw(spec, rng, batch)
        csum = total + np.cumsum(chunk)
        hit = np.searchsorted(csum, n, side="left")
        if hit < len(chunk):
            draws.extend(chunk[: hit + 1].tolist())
            total = int(csum[hit])
        else:
            draws.extend(chunk.tolist())
            total = int(csum[-1])
    return CommunitySizes(np.array(_repair_sizes(draws, n, spec.lo, spec.hi)))


def default_max_degree(n: int) -> int:
    return max(1, math.isqrt(n))


def read_sequence_file(path, kind: str = "degrees", n: int | None = None):
    """Read one positive integer per line.

    ``kind`` is ``"degrees"`` (odd sums are repaired with a warning) or
    ``"sizes"`` (``n``, when given, must equal the total).
    """
    p = Path(path)
    values = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            value = int(text)
        except ValueError:
            raise SequenceFileError(f"{p}: line {lineno}: not an integer: {text!r}") from None
        if value < 1:
            raise SequenceFileError(f"{p}: line {lineno}: value must be positive, got {value}")
        values.append(value)
    if not values:
        raise SequenceFileError(f"{p}: empty sequence file")
    arr = np.sort(np.array(values, dtype=np.int64))[::-1]
    if kind == "degrees":
        if arr.sum() % 2:
            log.warning("%s: odd degree sum, decrementing the maximum degree", p)
            arr = _repair_parity(arr, 1)
        return DegreeSequence(arr)
    if kind == "sizes":
        if n is not None and arr.sum() != n:
            raise SequenceFileError(f"{p}: community sizes sum to {arr.sum()}, expected {n}")
        return CommunitySizes(arr.copy())
    raise ValueError(f"unknown sequence kind {kind!r}")


def write_sequence_file(path, values) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in values), encoding="utf-8")
