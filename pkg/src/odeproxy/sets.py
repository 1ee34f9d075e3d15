"""Axis-aligned boxes and zonotopes, and the set algebra built on them.

All operations are pure and sound: the returned set is always a superset of
the exact image of the operation (exact where noted). Values are immutable
after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatch(ValueError):
    """Raised when set operands have incompatible dimensions."""


@dataclass(frozen=True)
class Box:
    """Interval vector [lo, hi], lo <= hi component-wise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise DimensionMismatch("box bounds must be equal-length vectors")
        if np.any(lo > hi):
            raise ValueError("box has lo > hi")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains_point(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def shift(self, offset) -> "Box":
        offset = np.asarray(offset, dtype=float)
        return Box(self.lo + offset, self.hi + offset)

    def to_json(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @staticmethod
    def from_json(d: dict) -> "Box":
        return Box(np.asarray(d["lo"], float), np.asarray(d["hi"], float))

    @staticmethod
    def point(x) -> "Box":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return Box(x, x.copy())


@dataclass(frozen=True)
class Zonotope:
    """Set {center + G @ xi : xi in [-1, 1]^g}; g = 0 denotes a point."""

    center: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        G = np.asarray(self.generators, dtype=float)
        if G.size == 0:
            G = np.zeros((c.size, 0))
        if c.ndim != 1 or G.ndim != 2 or G.shape[0] != c.size:
            raise DimensionMismatch("generator matrix must be n x g")
        c.flags.writeable = False
        G.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", G)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def n_generators(self) -> int:
        return self.generators.shape[1]

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m points inside the set, shape (m, n)."""
        xi = rng.uniform(-1.0, 1.0, size=(m, self.n_generators))
        return self.center + xi @ self.generators.T

    def to_json(self) -> dict:
        return {"center": self.center.tolist(),
                "generators": self.generators.tolist()}

    @staticmethod
    def from_json(d: dict) -> "Zonotope":
        return Zonotope(np.asarray(d["center"], float),
                        np.asarray(d["generators"], float))

    @staticmethod
    def point(c) -> "Zonotope":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return Zonotope(c, np.zeros((c.size, 0)))


# ---------------------------------------------------------------------------
# Box interval arithmetic (used as interval vectors)
# ---------------------------------------------------------------------------

def box_add(a: Box, b: Box) -> Box:
    if a.dim != b.dim:
        raise DimensionMismatch("box addition needs equal dimensions")
    return Box(a.lo + b.lo, a.hi + b.hi)


def box_neg(b: Box) -> Box:
    return Box(-b.hi, -b.lo)


def box_scale(b: Box, s: float) -> Box:
    if s >= 0:
        return Box(s * b.lo, s * b.hi)
    return Box(s * b.hi, s * b.lo)


def box_mul(a: Box, b: Box) -> Box:
    """Element-wise interval product."""
    cands = np.stack([a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi])
    return Box(cands.min(axis=0), cands.max(axis=0))


def box_sq(b: Box) -> Box:
    """Element-wise interval square; dependency-aware (never dips below 0)."""
    lo2, hi2 = b.lo * b.lo, b.hi * b.hi
    lo = np.where((b.lo <= 0.0) & (b.hi >= 0.0), 0.0, np.minimum(lo2, hi2))
    return Box(lo, np.maximum(lo2, hi2))


def box_mul_scalar_interval(b: Box, s_lo: float, s_hi: float) -> Box:
    """Interval scalar [s_lo, s_hi] times interval vector."""
    cands = np.stack([s_lo * b.lo, s_lo * b.hi, s_hi * b.lo, s_hi * b.hi])
    return Box(cands.min(axis=0), cands.max(axis=0))


def box_hull(a: Box, b: Box) -> Box:
    if a.dim != b.dim:
        raise DimensionMismatch("box hull needs equal dimensions")
    return Box(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi))


def box_maxabs(b: Box) -> np.ndarray:
    return np.maximum(np.abs(b.lo), np.abs(b.hi))


def box_inf_norm(b: Box) -> float:
    return float(box_maxabs(b).max())


def box_subset(inner: Box, outer: Box, slack: float = 0.0) -> bool:
    return bool(np.all(outer.lo - slack <= inner.lo)
                and np.all(inner.hi <= outer.hi + slack))


def box_project(b: Box, dims) -> Box:
    dims = np.asarray(dims, dtype=int)
    return Box(b.lo[dims], b.hi[dims])


# ---------------------------------------------------------------------------
# Zonotope operations
# ---------------------------------------------------------------------------

def zono_from_box(b: Box) -> Zonotope:
    """Exact zonotope of a box: midpoint center, diagonal half-width generators."""
    r = b.radius
    keep = r > 0.0
    G = np.zeros((b.dim, int(keep.sum())))
    G[np.where(keep)[0], np.arange(int(keep.sum()))] = r[keep]
    return Zonotope(b.center, G)


def linear_map(M: np.ndarray, z: Zonotope) -> Zonotope:
    """Exact image {M x : x in z} = (M c, M G)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != z.dim:
        raise DimensionMismatch("matrix columns must match zonotope dimension")
    return Zonotope(M @ z.center, M @ z.generators)


def minkowski_sum(z1: Zonotope, z2: Zonotope) -> Zonotope:
    """Exact set addition: centers add, generators concatenate."""
    if z1.dim != z2.dim:
        raise DimensionMismatch("Minkowski sum needs equal dimensions")
    return Zonotope(z1.center + z2.center,
                    np.hstack([z1.generators, z2.generators]))


def negate(z: Zonotope) -> Zonotope:
    """Exact image {-x : x in z}; xi-symmetry lets generators keep sign."""
    return Zonotope(-z.center, z.generators.copy())


def translate(z: Zonotope, offset) -> Zonotope:
    return Zonotope(z.center + np.asarray(offset, dtype=float), z.generators)


def interval_hull(z: Zonotope) -> Box:
    """Tightest enclosing box: center +/- row-wise absolute generator sums."""
    r = np.abs(z.generators).sum(axis=1)
    return Box(z.center - r, z.center + r)


def contains_box(outer: Box, inner: Box) -> bool:
    """Closed containment inner subseteq outer."""
    if outer.dim != inner.dim:
        raise DimensionMismatch("containment needs equal dimensions")
    return box_subset(inner, outer)


def reduce_order(z: Zonotope, max_gens: int) -> Zonotope:
    """Sound order reduction: keep the max_gens - n largest generators, box the rest."""
    n = z.dim
    if max_gens < n:
        raise ValueError("max_gens must be at least the dimension")
    g = z.n_generators
    if g <= max_gens:
        return z
    norms = np.linalg.norm(z.generators, ord=1, axis=0)
    order = np.argsort(norms)
    n_keep = max_gens - n
    small = order[:g - n_keep] if n_keep > 0 else order
    kept = z.generators[:, order[g - n_keep:]] if n_keep > 0 else np.zeros((n, 0))
    r = np.abs(z.generators[:, small]).sum(axis=1)
    boxed = np.diag(r)
    boxed = boxed[:, r > 0.0] if np.any(r > 0.0) else np.zeros((n, 0))
    return Zonotope(z.center, np.hstack([kept, boxed]))


def project(z: Zonotope, dims) -> Zonotope:
    """Coordinate projection (exact)."""
    dims = np.asarray(dims, dtype=int)
    return Zonotope(z.center[dims], z.generators[dims, :])
