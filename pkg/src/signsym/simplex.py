"""Geometry of the standard probability simplex.

Points with nonnegative coordinates summing to one, the vertices e_i,
regular lattice grids used for exhaustive scans, face projections, and
the correspondence with the "sum <= 1" representation one dimension down.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Membership tolerance: clamp/renormalize inside this band, reject outside.
COORD_TOL = 1e-12
SUM_TOL = 1e-9


class SimplexError(ValueError):
    """Invalid simplex point or grid parameter."""


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the standard simplex: coords >= 0, sum exactly 1.

    Construct through :func:`make_point` (which clamps and renormalizes)
    rather than directly.
    """

    coords: tuple

    @property
    def n(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    @property
    def interior(self) -> bool:
        """All coordinates strictly below 1, i.e. the point is not a
        vertex and every face projection is defined."""
        return all(c < 1.0 for c in self.coords)

    def __getitem__(self, i: int) -> float:
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)


def make_point(coords) -> SimplexPoint:
    """Validate, clamp tiny negatives to 0, renormalize to unit sum."""
    c = np.asarray(coords, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise SimplexError(f"need at least 2 coordinates, got shape {c.shape}")
    if np.any(c < -COORD_TOL):
        raise SimplexError(f"negative coordinate {c.min():.3e} below -{COORD_TOL:.0e}")
    s = float(c.sum())
    if abs(s - 1.0) > SUM_TOL:
        raise SimplexError(f"coordinate sum {s!r} deviates from 1 by more than {SUM_TOL:.0e}")
    c = np.clip(c, 0.0, None)
    c = c / c.sum()
    return SimplexPoint(tuple(float(v) for v in c))


def vertex(i: int, n: int) -> SimplexPoint:
    """The vertex e_i (1-based index)."""
    if not 1 <= i <= n:
        raise SimplexError(f"vertex index {i} out of range 1..{n}")
    return SimplexPoint(tuple(1.0 if j == i - 1 else 0.0 for j in range(n)))


def face_projection(t: SimplexPoint, i: int) -> SimplexPoint:
    """Rescale ``t`` onto the face where coordinate ``i`` (1-based) is zero.

    Undefined when t_i = 1; callers scanning faces must skip that case.
    """
    if not 1 <= i <= t.n:
        raise SimplexError(f"face index {i} out of range 1..{t.n}")
    ti = t[i - 1]
    if ti >= 1.0 - COORD_TOL:
        raise SimplexError(f"face projection undefined: coordinate {i} equals 1")
    c = t.as_array() / (1.0 - ti)
    c[i - 1] = 0.0
    return make_point(c)


def to_prime_domain(t: SimplexPoint) -> list:
    """Drop the last coordinate (the inverse of :func:`from_prime_domain`)."""
    return [float(c) for c in t.coords[:-1]]


def from_prime_domain(u) -> SimplexPoint:
    """Lift nonnegative entries with sum <= 1 by appending the deficit."""
    u = np.asarray(u, dtype=float)
    if np.any(u < -COORD_TOL):
        raise SimplexError(f"negative entry {u.min():.3e}")
    s = float(u.sum())
    if s > 1.0 + COORD_TOL:
        raise SimplexError(f"entries sum to {s!r} > 1")
    return make_point(list(u) + [max(1.0 - s, 0.0)])


def _compositions(total: int, parts: int):
    """All nonnegative integer tuples of length ``parts`` summing to
    ``total``, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class SimplexGrid:
    """All simplex points with coordinates that are multiples of 1/K.

    Enumeration is lexicographic in the integer lattice coordinates, which
    fixes the tie-breaking order of every argmax scan built on top.
    """

    n: int
    K: int

    def __post_init__(self):
        if self.n < 2:
            raise SimplexError(f"grid dimension {self.n} < 2")
        if self.K < 1:
            raise SimplexError(f"grid resolution {self.K} < 1")

    @cached_property
    def lattice(self) -> np.ndarray:
        return np.array(list(_compositions(self.K, self.n)), dtype=int)

    @cached_property
    def points_array(self) -> np.ndarray:
        """Grid points as a (size, n) float array."""
        return self.lattice.astype(float) / self.K

    @cached_property
    def points(self) -> tuple:
        return tuple(SimplexPoint(tuple(row)) for row in self.points_array)

    @cached_property
    def index(self) -> dict:
        """Lattice tuple -> row index."""
        return {tuple(row): k for k, row in enumerate(self.lattice.tolist())}

    @property
    def size(self) -> int:
        return math.comb(self.K + self.n - 1, self.n - 1)

    def __len__(self) -> int:
        return self.size

    def __iter__(self):
        return iter(self.points)


def default_resolution(n: int) -> int:
    """Grid resolution keeping the point count at desk scale."""
    if n <= 3:
        return 64
    if n == 4:
        return 24
    return 12
