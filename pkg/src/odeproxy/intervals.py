"""Interval matrices and the interval linear algebra used by the enclosures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import Box, DimensionMismatch, Zonotope


@dataclass(frozen=True)
class IntervalMatrix:
    """Entry-wise interval matrix [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.ndim != 2 or lo.shape != hi.shape:
            raise DimensionMismatch("interval matrix bounds must be equal-shape matrices")
        if np.any(lo > hi):
            raise ValueError("interval matrix has lo > hi")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shape(self):
        return self.lo.shape

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def maxabs(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, M: np.ndarray, slack: float = 0.0) -> bool:
        M = np.asarray(M, dtype=float)
        return bool(np.all(M >= self.lo - slack) and np.all(M <= self.hi + slack))

    @staticmethod
    def from_point(M) -> "IntervalMatrix":
        M = np.asarray(M, dtype=float)
        return IntervalMatrix(M, M.copy())

    @staticmethod
    def symmetric(R) -> "IntervalMatrix":
        """[-R, R] for entry-wise nonnegative R."""
        R = np.asarray(R, dtype=float)
        return IntervalMatrix(-R, R)


def im_add(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    return IntervalMatrix(A.lo + B.lo, A.hi + B.hi)


def im_scale(A: IntervalMatrix, s: float) -> IntervalMatrix:
    if s >= 0:
        return IntervalMatrix(s * A.lo, s * A.hi)
    return IntervalMatrix(s * A.hi, s * A.lo)


def im_scale_interval(A: IntervalMatrix, s_lo: float, s_hi: float) -> IntervalMatrix:
    cands = np.stack([s_lo * A.lo, s_lo * A.hi, s_hi * A.lo, s_hi * A.hi])
    return IntervalMatrix(cands.min(axis=0), cands.max(axis=0))


def im_point_matmul(M: np.ndarray, A: IntervalMatrix) -> IntervalMatrix:
    """Exact product of a point matrix with an interval matrix."""
    M = np.asarray(M, dtype=float)
    Mp = np.maximum(M, 0.0)
    Mn = np.minimum(M, 0.0)
    return IntervalMatrix(Mp @ A.lo + Mn @ A.hi, Mp @ A.hi + Mn @ A.lo)


def im_matmul(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    """Sound interval matrix product (entry-wise interval sums of products)."""
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch("interval matmul shape mismatch")
    cands = np.stack([
        A.lo[:, :, None] * B.lo[None, :, :],
        A.lo[:, :, None] * B.hi[None, :, :],
        A.hi[:, :, None] * B.lo[None, :, :],
        A.hi[:, :, None] * B.hi[None, :, :],
    ])
    return IntervalMatrix(cands.min(axis=0).sum(axis=1),
                          cands.max(axis=0).sum(axis=1))


def im_rowscale(d: Box, A: IntervalMatrix) -> IntervalMatrix:
    """diag(d) @ A with interval diagonal d."""
    if d.dim != A.shape[0]:
        raise DimensionMismatch("row scale dimension mismatch")
    cands = np.stack([
        d.lo[:, None] * A.lo, d.lo[:, None] * A.hi,
        d.hi[:, None] * A.lo, d.hi[:, None] * A.hi,
    ])
    return IntervalMatrix(cands.min(axis=0), cands.max(axis=0))


def im_matvec(A: IntervalMatrix, b: Box) -> Box:
    """Sound interval matrix-vector product A @ b."""
    if A.shape[1] != b.dim:
        raise DimensionMismatch("interval matvec dimension mismatch")
    cands = np.stack([
        A.lo * b.lo[None, :], A.lo * b.hi[None, :],
        A.hi * b.lo[None, :], A.hi * b.hi[None, :],
    ])
    return Box(cands.min(axis=0).sum(axis=1), cands.max(axis=0).sum(axis=1))


def im_point_vec(A: IntervalMatrix, v) -> Box:
    """A @ v for a point vector v."""
    v = np.asarray(v, dtype=float)
    vp = np.maximum(v, 0.0)
    vn = np.minimum(v, 0.0)
    return Box(A.lo @ vp + A.hi @ vn, A.hi @ vp + A.lo @ vn)


def im_inf_norm(A: IntervalMatrix) -> float:
    """Max row sum of entry-wise maximum magnitudes (sound ||.||_inf bound)."""
    return float(A.maxabs.sum(axis=1).max())


def im_zono_map(A: IntervalMatrix, z: Zonotope) -> Zonotope:
    """Sound zonotope superset of {M x : M in A, x in z}.

    The midpoint matrix maps the zonotope exactly; the radius contributes a
    box term covering all matrix realizations.
    """
    if A.shape[1] != z.dim:
        raise DimensionMismatch("interval matrix-zonotope map dimension mismatch")
    Mc, Mr = A.mid, A.rad
    extent = np.abs(z.center) + np.abs(z.generators).sum(axis=1)
    r = Mr @ extent
    boxed = np.diag(r)[:, r > 0.0] if np.any(r > 0.0) else np.zeros((A.shape[0], 0))
    return Zonotope(Mc @ z.center, np.hstack([Mc @ z.generators, boxed]))
