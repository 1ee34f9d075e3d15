"""Set-valued bound on the flow-vs-residual approximation error.

For a smooth field f, the gap between the depth-1 flow and the single Euler
step is g(x*) = 0.5 f'(x*) f(x*) evaluated at an unknown intermediate state
x* inside the reachable tube. Bounding g over every tube segment therefore
bounds the true error set. Two set-propagation routes are provided (plain
interval extension and a tighter mean-value form), plus the classical scalar
Lipschitz bound (e^L - 1)/L * ||g||_inf for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .intervals import im_add, im_matmul, im_scale, im_zono_map
from .network import VectorField, global_lipschitz_bound, lipschitz_bound
from .reach import Tube
from .sets import (
    Box,
    Zonotope,
    box_add,
    box_hull,
    box_inf_norm,
    box_mul_scalar_interval,
    box_neg,
    box_scale,
    box_subset,
    interval_hull,
    linear_map,
    minkowski_sum,
    translate,
    zono_from_box,
)

METHOD_INTERVAL = "interval"
METHOD_MEANVALUE = "meanvalue"


@dataclass(frozen=True)
class ErrorBound:
    """Per-segment error boxes and their union hull omega_eps."""

    omega_eps: Box
    per_segment: List[Box]
    method: str

    def to_json(self) -> dict:
        return {"omega_eps": self.omega_eps.to_json(),
                "per_segment": [b.to_json() for b in self.per_segment],
                "method": self.method}


@dataclass(frozen=True)
class BoundComparison:
    """Set-based bound vs the scalar Lipschitz bound."""

    set_inf_norm: float
    lipschitz_L: float
    sander_scalar: float
    width_ratio: float
    volume_ratio: float
    degenerate_volume: bool

    def to_json(self) -> dict:
        return {"set_inf_norm": self.set_inf_norm,
                "lipschitz_L": self.lipschitz_L,
                "sander_scalar": self.sander_scalar,
                "width_ratio": self.width_ratio,
                "volume_ratio": self.volume_ratio,
                "degenerate_volume": self.degenerate_volume}


def error_map_eval(f: VectorField, x) -> np.ndarray:
    """Pointwise error map g(x) = 0.5 f'(x) f(x)."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (f.jacobian(x) @ f.eval(x))


def error_image_interval(f: VectorField, b: Box) -> Box:
    """Sound box enclosing {g(x) : x in b} by plain interval extension."""
    from .intervals import im_matvec
    prod = im_matvec(f.interval_jacobian(b), f.interval_eval(b))
    return Box(0.5 * prod.lo, 0.5 * prod.hi)


def error_image_meanvalue(f: VectorField, z: Zonotope, enclosure: Box) -> Zonotope:
    """Sound zonotope enclosing g(z) via the mean-value form.

    g(z) subseteq g(c) + G_box (z - c) with G_box enclosing the error-map
    Jacobian g'(x) = 0.5 (f''(x)[f(x)] + f'(x)^2) over the enclosure box.
    Computed in a single step with no intermediate splitting: the error map
    is static, so iterating it would have no meaning.
    """
    from .sets import box_subset
    if not box_subset(interval_hull(z), enclosure, slack=1e-12):
        raise ValueError("zonotope must lie inside its enclosure box")
    c = z.center
    IJ = f.interval_jacobian(enclosure)
    H = f.interval_hessian_apply(enclosure, f.interval_eval(enclosure))
    G_box = im_scale(im_add(H, im_matmul(IJ, IJ)), 0.5)
    image = im_zono_map(G_box, translate(z, -c))
    return translate(image, error_map_eval(f, c))


# Top generators handled as exact point directions in the curvature bound;
# the remaining generators are boxed. Cost grows quadratically in this count.
ERROR_SPLIT_GENERATORS = 8


def _d2g_raw(bl) -> Box:
    """2 D2 g[u, v] = f'''[u,v] f + f''[u](f'v) + f''[v](f'u) + f'(f''[u]v)."""
    from .intervals import im_matvec
    return box_add(box_add(im_matvec(bl.jac_duv, bl.value),
                           im_matvec(bl.jac_du, bl.dv)),
                   box_add(im_matvec(bl.jac_dv, bl.du),
                           im_matvec(bl.jac, bl.duv)))


def _quadratic_remainder(f: VectorField, z: Zonotope, enclosure: Box,
                         k_top: int = ERROR_SPLIT_GENERATORS) -> Box:
    """Box bound on 0.5 D2 g(x)[x - c, x - c] over x in the enclosure.

    The displacement x - c = sum_i xi_i g_i is split into the k_top largest
    generators, kept as point directions so the bilinear forms stay tight,
    plus one box for the tail. Expanding the quadratic form then gives
    diagonal terms with xi^2 in [0, 1], symmetric cross terms in [-2, 2],
    and box terms for everything touching the tail.
    """
    G = z.generators
    g = G.shape[1]
    order = np.argsort(np.abs(G).sum(axis=0))[::-1]
    k = min(k_top, g)
    dirs = [Box.point(G[:, order[i]]) for i in range(k)]
    tail = np.abs(G[:, order[k:]]).sum(axis=1)
    total = Box.point(np.zeros(f.dim))
    for i, u in enumerate(dirs):
        q = _d2g_raw(f.interval_bilinear_taylor(enclosure, u, u))
        total = box_add(total, box_mul_scalar_interval(q, 0.0, 1.0))
        for v in dirs[i + 1:]:
            q = _d2g_raw(f.interval_bilinear_taylor(enclosure, u, v))
            total = box_add(total, box_mul_scalar_interval(q, -2.0, 2.0))
    if np.any(tail > 0.0):
        R = Box(-tail, tail)
        for u in dirs:
            q = _d2g_raw(f.interval_bilinear_taylor(enclosure, u, R))
            total = box_add(total, box_mul_scalar_interval(q, -2.0, 2.0))
        dd = f.interval_directional_taylor(enclosure, R)
        from .intervals import im_matvec
        q = box_add(box_add(im_matvec(dd.jac_d2, dd.value),
                            box_scale(im_matvec(dd.jac_d1, dd.d1), 2.0)),
                    im_matvec(dd.jac, dd.d2))
        total = box_add(total, q)
    return box_scale(total, 0.25)  # 0.5 from the Taylor term, 0.5 from g


def error_image_lagrange(f: VectorField, z: Zonotope, enclosure: Box) -> Zonotope:
    """Sound zonotope enclosing g(z) via a second-order Taylor form.

    g(x) = g(c) + g'(c)(x - c) + 0.5 D2g(xi)[x - c, x - c]; the linear part
    maps the zonotope exactly and the curvature term is boxed generator-wise
    by _quadratic_remainder over the enclosure.
    """
    if not box_subset(interval_hull(z), enclosure, slack=1e-12):
        raise ValueError("zonotope must lie inside its enclosure box")
    c = z.center
    Gc = 0.5 * (f.hessian_apply(c, f.eval(c)) + f.jacobian(c) @ f.jacobian(c))
    lin = linear_map(Gc, translate(z, -c))
    rem = _quadratic_remainder(f, z, enclosure)
    return translate(minkowski_sum(lin, zono_from_box(rem)),
                     error_map_eval(f, c))


def _box_intersect(a: Box, b: Box) -> Box:
    lo = np.maximum(a.lo, b.lo)
    hi = np.minimum(a.hi, b.hi)
    # both operands enclose the same nonempty image; guard rounding slivers
    return Box(lo, np.maximum(lo, hi))


def error_set(f: VectorField, tube: Tube, method: str = METHOD_MEANVALUE) -> ErrorBound:
    """Error bound from a tube: per-segment error images and their union hull."""
    per_segment = []
    for seg in tube.segments:
        if method == METHOD_INTERVAL:
            per_segment.append(error_image_interval(f, seg.enclosure))
        elif method == METHOD_MEANVALUE:
            # The range-set zonotope keeps the reach set's generator
            # structure, so the remainder terms stay small. Both images are
            # sound, so their hull intersection is too.
            z = seg.range_set
            hull = interval_hull(z)
            mv = interval_hull(error_image_meanvalue(f, z, hull))
            lg = interval_hull(error_image_lagrange(f, z, hull))
            per_segment.append(_box_intersect(mv, lg))
        else:
            raise ValueError(f'unknown error method "{method}"')
    omega = per_segment[0]
    for b in per_segment[1:]:
        omega = box_hull(omega, b)
    return ErrorBound(omega, per_segment, method)


def negate_error_set(e: ErrorBound) -> ErrorBound:
    """Negated error set {-eps : eps in omega}, segment-wise."""
    return ErrorBound(box_neg(e.omega_eps),
                      [box_neg(b) for b in e.per_segment],
                      e.method)


def sander_bound(f: VectorField, error: ErrorBound,
                 tube: Optional[Tube] = None) -> BoundComparison:
    """Scalar Lipschitz bound (e^L - 1)/L * ||omega_eps||_inf and its ratios.

    With a tube, L is the region-local bound over the tube hull; without one
    it falls back to the global weight-norm bound (tanh' <= 1 everywhere).
    """
    set_inf_norm = box_inf_norm(error.omega_eps)
    if tube is not None:
        L = lipschitz_bound(f, tube.hull())
    else:
        L = global_lipschitz_bound(f)
    factor = (np.expm1(L) / L) if L > 0 else 1.0
    sander_scalar = factor * set_inf_norm
    width_ratio = factor
    widths = error.omega_eps.width
    degenerate = bool(np.any(widths == 0.0))
    if degenerate:
        volume_ratio = float("inf") if sander_scalar > 0 else 1.0
    else:
        volume = float(np.prod(widths))
        volume_ratio = float((2.0 * sander_scalar) ** error.omega_eps.dim / volume)
    return BoundComparison(set_inf_norm, float(L), float(sander_scalar),
                           float(width_ratio), volume_ratio, degenerate)
