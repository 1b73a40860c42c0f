"""Parity lattice geometry and brute-force path enumeration (test oracle)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

import numpy as np

from .errors import ParameterError
from .signedlog import SignedLogValue, signed_logsumexp

MAX_ENUMERATION_LENGTH = 24


@dataclass(frozen=True, order=True)
class SpacetimePoint:
    t: int
    x: int

    def __post_init__(self):
        if self.t < 0:
            raise ParameterError(f"time must be nonnegative, got t={self.t}")
        if (self.t + self.x) % 2:
            raise ParameterError(f"({self.t}, {self.x}) is off the parity lattice")


PointLike = Union[SpacetimePoint, tuple]


def _tx(p: PointLike) -> tuple[int, int]:
    if isinstance(p, SpacetimePoint):
        return p.t, p.x
    t, x = p
    return int(t), int(x)


@dataclass(frozen=True)
class LatticePath:
    start: SpacetimePoint
    steps: tuple

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.steps):
            raise ParameterError("steps must be ±1")

    @property
    def positions(self) -> np.ndarray:
        return self.start.x + np.concatenate(([0], np.cumsum(self.steps, dtype=np.int64)))

    @property
    def end(self) -> SpacetimePoint:
        return SpacetimePoint(self.start.t + len(self.steps), self.start.x + sum(self.steps))

    def points(self) -> list[SpacetimePoint]:
        t0 = self.start.t
        return [SpacetimePoint(t0 + i, int(z)) for i, z in enumerate(self.positions)]


def in_excursion_domain(p: PointLike, T: int) -> bool:
    t, x = _tx(p)
    if (t + x) % 2:
        return False
    if 0 <= t <= T:
        return -t <= x <= t
    if T + 1 <= t <= 2 * T:
        return t - 2 * T <= x <= 2 * T - t
    return False


def in_rightward_step_domain(p: PointLike, T: int) -> bool:
    t, x = _tx(p)
    if (t + x) % 2:
        return False
    if 1 <= t <= T:
        return -t + 2 <= x <= t
    if T + 1 <= t <= 2 * T:
        return t - 2 * T <= x <= 2 * T - t
    return False


def slice_positions(t: int, T: int) -> np.ndarray:
    """Positions x with (t, x) in the excursion domain, increasing."""
    if not 0 <= t <= 2 * T:
        return np.zeros(0, dtype=np.int64)
    h = min(t, 2 * T - t)
    return np.arange(-h, h + 1, 2, dtype=np.int64)


def rightward_step_points(T: int) -> Iterator[SpacetimePoint]:
    """Points of the rightward-step domain, by increasing t then increasing x."""
    for t in range(1, 2 * T + 1):
        lo = -t + 2 if t <= T else t - 2 * T
        hi = t if t <= T else 2 * T - t
        for x in range(lo, hi + 1, 2):
            yield SpacetimePoint(t, x)


def enumerate_paths(start: PointLike, end: PointLike) -> list[LatticePath]:
    """All ±1 paths from ``start`` to ``end``, lexicographic with +1 before −1."""
    s, x = _tx(start)
    t, y = _tx(end)
    start_pt = SpacetimePoint(s, x)
    if s > t:
        raise ParameterError(f"start time {s} exceeds end time {t}")
    n = t - s
    if n > MAX_ENUMERATION_LENGTH:
        raise ParameterError(f"refusing to enumerate paths of length {n} > {MAX_ENUMERATION_LENGTH}")
    if abs(y - x) > n or (n + y - x) % 2:
        return []
    k = (n + (y - x)) // 2
    paths = []
    for ups in itertools.combinations(range(n), k):
        steps = [-1] * n
        for i in ups:
            steps[i] = 1
        paths.append(LatticePath(start_pt, tuple(steps)))
    return paths


def path_count(start: PointLike, end: PointLike) -> int:
    s, x = _tx(start)
    t, y = _tx(end)
    n = t - s
    if n < 0 or abs(y - x) > n or (n + y - x) % 2:
        return 0
    return math.comb(n, (n + y - x) // 2)


ElementaryWeight = Callable[[int, int], SignedLogValue]


def path_weight(path: LatticePath, q_elem: ElementaryWeight) -> SignedLogValue:
    """Product of q_elem(t, x) over the endpoints (t, x) of rightward steps."""
    w = SignedLogValue.one()
    t, z = path.start.t, path.start.x
    for step in path.steps:
        t += 1
        z += step
        if step == 1:
            w = w * q_elem(t, z)
    return w


def path_sum(start: PointLike, end: PointLike, q_elem: ElementaryWeight) -> SignedLogValue:
    """Σ of path weights over every path from ``start`` to ``end``."""
    weights = [path_weight(p, q_elem) for p in enumerate_paths(start, end)]
    sign, logmag = signed_logsumexp([w.sign for w in weights], [w.log_mag for w in weights])
    return SignedLogValue.from_parts(sign, logmag)
