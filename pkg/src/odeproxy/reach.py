"""Validated continuous-time reachability by conservative linearization.

The flow over one step is enclosed by linearizing at the current center,
bounding the linearization remainder with interval arithmetic over a Picard
a-priori enclosure, and propagating the zonotope through the linear flow
with a truncated matrix exponential carrying a rigorous interval remainder.
A classical RK4 point simulator is provided as a (non-validated) oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .intervals import (
    IntervalMatrix,
    im_matvec,
    im_point_vec,
    im_zono_map,
)
from .network import VectorField
from .sets import (
    Box,
    Zonotope,
    box_add,
    box_hull,
    box_mul_scalar_interval,
    box_scale,
    box_subset,
    interval_hull,
    minkowski_sum,
    reduce_order,
    translate,
    zono_from_box,
)

DEFAULT_SEGMENTS = 20
DEFAULT_EXP_ORDER = 10
PICARD_MAX_ITER = 50
PICARD_BLOAT_FACTOR = 0.1
PICARD_BLOAT_ABS = 1e-6


class NoEnclosure(RuntimeError):
    """Picard inflation failed to certify an a-priori enclosure (dt too large)."""

    def __init__(self, message: str, segment: Optional[int] = None):
        super().__init__(message)
        self.segment = segment


@dataclass(frozen=True)
class Segment:
    t_lo: float
    t_hi: float
    enclosure: Box
    reach_start: Zonotope
    # Sound zonotope covering the flow over [t_lo, t_hi]; subset of the
    # enclosure box but keeps the generator structure of the reach set.
    range_set: Zonotope

    def to_json(self) -> dict:
        return {"t_lo": self.t_lo, "t_hi": self.t_hi,
                "box": self.enclosure.to_json(),
                "zonotope": self.reach_start.to_json(),
                "range_set": self.range_set.to_json()}


@dataclass(frozen=True)
class Tube:
    """Ordered segment enclosures of the flow over [0, horizon] plus final set."""

    segments: List[Segment]
    final: Zonotope

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    def segment_at(self, t: float) -> Segment:
        for seg in self.segments:
            if seg.t_lo <= t <= seg.t_hi:
                return seg
        raise ValueError(f"time {t} outside the tube horizon")

    def hull(self) -> Box:
        """Interval hull of the union of segment enclosures."""
        out = self.segments[0].enclosure
        for seg in self.segments[1:]:
            out = box_hull(out, seg.enclosure)
        return out

    def to_json(self) -> dict:
        return {"segments": [s.to_json() for s in self.segments],
                "final": self.final.to_json()}


# ---------------------------------------------------------------------------
# rigorous matrix exponential pieces
# ---------------------------------------------------------------------------

def _exp_tail(eta: float, order: int) -> float:
    # Geometric tail bound: sum_{k>p} eta^k/k! <= eta^{p+1}/(p+1)! / (1 - eta/(p+2))
    if eta >= order + 2:
        raise ValueError("||J|| dt too large for the exponential order")
    return eta ** (order + 1) / math.factorial(order + 1) / (1.0 - eta / (order + 2))


def expm_enclosure(J: np.ndarray, dt: float, order: int) -> IntervalMatrix:
    """Interval enclosure of e^{J dt} by truncated Taylor plus remainder."""
    n = J.shape[0]
    eta = float(np.abs(J).sum(axis=1).max()) * dt
    term = np.eye(n)
    total = np.eye(n)
    for k in range(1, order + 1):
        term = term @ J * (dt / k)
        total = total + term
    rho = _exp_tail(eta, order)
    return IntervalMatrix(total - rho, total + rho)


def expm_integral_enclosure(J: np.ndarray, dt: float, order: int) -> IntervalMatrix:
    """Interval enclosure of int_0^dt e^{J s} ds."""
    n = J.shape[0]
    eta = float(np.abs(J).sum(axis=1).max()) * dt
    if eta >= order + 2:
        raise ValueError("||J|| dt too large for the exponential order")
    term = np.eye(n) * dt
    total = np.eye(n) * dt
    for k in range(1, order + 1):
        term = term @ J * (dt / (k + 1))
        total = total + term
    # tail: sum_{k>p} ||J||^k dt^{k+1}/(k+1)! with term ratio < eta/(p+2)
    rho = dt * eta ** (order + 1) / math.factorial(order + 2) / (1.0 - eta / (order + 2))
    return IntervalMatrix(total - rho, total + rho)


def expm_family_enclosure(J: np.ndarray, dt: float, order: int) -> IntervalMatrix:
    """Interval enclosure of the whole family {e^{J s} : s in [0, dt]}."""
    n = J.shape[0]
    eta = float(np.abs(J).sum(axis=1).max()) * dt
    term = np.eye(n)
    lo = np.eye(n).copy()
    hi = np.eye(n).copy()
    for k in range(1, order + 1):
        term = term @ J * (dt / k)
        # s^k ranges over [0, dt^k], so each entry spans from 0 to its value
        lo = lo + np.minimum(term, 0.0)
        hi = hi + np.maximum(term, 0.0)
    rho = _exp_tail(eta, order)
    return IntervalMatrix(lo - rho, hi + rho)


# ---------------------------------------------------------------------------
# Picard a-priori enclosure
# ---------------------------------------------------------------------------

def _bloat(b: Box, factor: float, absolute: float) -> Box:
    pad = factor * b.radius + absolute
    return Box(b.lo - pad, b.hi + pad)


def _picard(f: VectorField, x0: Box, E: Box, dt: float) -> Box:
    return box_add(x0, box_mul_scalar_interval(f.interval_eval(E), 0.0, dt))


def apriori_enclosure(f: VectorField, x0: Box, dt: float,
                      max_iter: int = PICARD_MAX_ITER) -> Box:
    """Box E certified to contain all trajectories from x0 over [0, dt].

    Certificate: x0 + [0, dt] * f(E) subseteq E, re-checked after the
    inflation fixpoint and preserved under the final refinement sweeps.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    E = x0
    for _ in range(max_iter):
        PE = _picard(f, x0, E, dt)
        if box_subset(PE, E):
            for _ in range(2):  # contraction sweeps tighten without losing the certificate
                E, PE = PE, _picard(f, x0, PE, dt)
            if not box_subset(PE, E):
                raise NoEnclosure("refinement broke the Picard certificate")
            return E
        E = _bloat(box_hull(E, PE), PICARD_BLOAT_FACTOR, PICARD_BLOAT_ABS)
    raise NoEnclosure("Picard inflation failed to certify an enclosure; reduce dt")


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------

def reach_step(f: VectorField, z: Zonotope, dt: float,
               exp_order: int = DEFAULT_EXP_ORDER,
               max_gens: Optional[int] = None):
    """One validated step: returns (reach set at t + dt, segment enclosure).

    Linearizes at the center c: xdot = f(c) + J (x - c) + r with the Lagrange
    remainder r bounded by 0.5 f''(E)[E - c, E - c] over the a-priori
    enclosure E, then propagates through the linear flow:

        x(dt) in c + e^{J dt}(x0 - c) + int_0^dt e^{J s} ds f(c)
                 + dt * {e^{J s} : s in [0, dt]} r
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if max_gens is None:
        max_gens = 10 * f.dim
    c = z.center
    fc = f.eval(c)
    J = f.jacobian(c)

    E = apriori_enclosure(f, interval_hull(z), dt)
    # Lagrange form of the linearization remainder over E:
    # f(x) - f(c) - J (x - c) lies in 0.5 f''(E)[E - c, E - c].
    r = box_scale(f.interval_directional_taylor(E, E.shift(-c)).d2, 0.5)

    Phi = expm_enclosure(J, dt, exp_order)
    Psi = expm_integral_enclosure(J, dt, exp_order)
    Fam = expm_family_enclosure(J, dt, exp_order)

    z_hom = im_zono_map(Phi, translate(z, -c))
    inhom = box_add(im_point_vec(Psi, fc),
                    box_scale(im_matvec(Fam, r), dt))
    out = translate(minkowski_sum(z_hom, zono_from_box(inhom)), c)
    return reduce_order(out, max_gens), E


def reach_tube(f: VectorField, x_in: Box, horizon: float = 1.0,
               n_segments: int = DEFAULT_SEGMENTS,
               exp_order: int = DEFAULT_EXP_ORDER,
               max_gens: Optional[int] = None) -> Tube:
    """Validated tube over [0, horizon] with uniform segments."""
    if n_segments < 1:
        raise ValueError("n_segments must be at least 1")
    dt = horizon / n_segments
    z = zono_from_box(x_in)
    segments = []
    for k in range(n_segments):
        try:
            z_next, E = reach_step(f, z, dt, exp_order=exp_order, max_gens=max_gens)
        except NoEnclosure as e:
            raise NoEnclosure(str(e), segment=k) from e
        # x(t) = x(t_k) + int f stays in z + [0, dt] f(E); hull is inside E
        # because the Picard certificate holds on E.
        drift = box_mul_scalar_interval(f.interval_eval(E), 0.0, dt)
        z_range = minkowski_sum(z, zono_from_box(drift))
        segments.append(Segment(k * dt, (k + 1) * dt, E, z, z_range))
        z = z_next
    return Tube(segments, z)


def simulate(f: VectorField, u, horizon: float = 1.0, h: float = 1e-3) -> np.ndarray:
    """Fixed-step RK4 approximation of the flow at time `horizon`.

    Not validated; test and plotting oracle only. Broadcasts over leading
    axes of u, so sample clouds integrate in one vectorized pass.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(u, dtype=float)
    if horizon == 0:
        return x.copy()
    steps = max(1, int(math.ceil(horizon / h - 1e-12)))
    h = horizon / steps
    for _ in range(steps):
        k1 = f.eval(x)
        k2 = f.eval(x + 0.5 * h * k1)
        k3 = f.eval(x + 0.5 * h * k2)
        k4 = f.eval(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x
