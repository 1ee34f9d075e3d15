"""Layered vector fields with exact derivatives and sound interval evaluators.

A vector field is a finite composition of layers mapping R^n to R^n (square,
so that the residual map x + f(x) is defined). Supported layers: linear,
element-wise tanh, scalar scaling, and the sum of two parallel sub-sequences
(covers residual forms like tau*x + W tanh(x)).

Every evaluator comes in a point flavor (exact up to floating point) and an
interval flavor (sound enclosure over a box). Jacobians are analytic via the
layer chain rule; finite differences are reserved for test oracles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .intervals import (
    IntervalMatrix,
    im_add,
    im_inf_norm,
    im_point_matmul,
    im_rowscale,
    im_scale,
    im_zono_map,
)
from .sets import (
    Box,
    Zonotope,
    box_add,
    box_mul,
    box_scale,
    box_sq,
    interval_hull,
    translate,
)


class ModelError(ValueError):
    """Malformed model description (schema, dimensions, unknown layer kind)."""


@dataclass(frozen=True)
class Linear:
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.weight, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if W.ndim != 2 or b.ndim != 1 or b.size != W.shape[0]:
            raise ModelError("linear layer needs weight (m x k) and bias (m)")
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weight", W)
        object.__setattr__(self, "bias", b)


@dataclass(frozen=True)
class Tanh:
    pass


@dataclass(frozen=True)
class Scale:
    tau: float


@dataclass(frozen=True)
class Sum:
    left: tuple
    right: tuple

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))


Layer = Union[Linear, Tanh, Scale, Sum]


def _out_dim(layers, d: int) -> int:
    for layer in layers:
        if isinstance(layer, Linear):
            if layer.weight.shape[1] != d:
                raise ModelError("linear layer input dimension mismatch")
            d = layer.weight.shape[0]
        elif isinstance(layer, (Tanh, Scale)):
            pass
        elif isinstance(layer, Sum):
            dl = _out_dim(layer.left, d)
            dr = _out_dim(layer.right, d)
            if dl != dr:
                raise ModelError("sum branches disagree on output dimension")
            d = dl
        else:
            raise ModelError(f"unknown layer kind {type(layer).__name__}")
    return d


@dataclass(frozen=True)
class VectorField:
    """Square layer composition f: R^n -> R^n, continuously differentiable."""

    layers: tuple
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if _out_dim(self.layers, self.dim) != self.dim:
            raise ModelError("vector field must be square (n_in = n_out)")

    # -- point evaluators ---------------------------------------------------

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Forward evaluation; broadcasts over leading axes of x."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ModelError("input dimension mismatch")
        return _fwd(self.layers, x)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Analytic Jacobian f'(x) via the layer chain rule."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ModelError("jacobian expects a single state vector")
        _, J = _fwd_jac(self.layers, x, np.eye(self.dim))
        return J

    def hessian_apply(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Directional Jacobian derivative d/ds f'(x + s v) at s = 0."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.shape != (self.dim,) or v.shape != (self.dim,):
            raise ModelError("hessian_apply expects state and direction of dim n")
        n = self.dim
        _, _, _, DJ = _fwd_hess(self.layers, x, v, np.eye(n), np.zeros((n, n)))
        return DJ

    # -- interval evaluators ------------------------------------------------

    def interval_eval(self, b: Box) -> Box:
        """Natural interval extension; sound enclosure of f over the box."""
        if b.dim != self.dim:
            raise ModelError("box dimension mismatch")
        return _ifwd(self.layers, b)

    def interval_jacobian(self, b: Box) -> IntervalMatrix:
        """Sound entry-wise enclosure of {f'(x) : x in b}."""
        if b.dim != self.dim:
            raise ModelError("box dimension mismatch")
        _, J = _ifwd_jac(self.layers, b, IntervalMatrix.from_point(np.eye(self.dim)))
        return J

    def interval_hessian_apply(self, b: Box, v: Box) -> IntervalMatrix:
        """Enclosure of {d/ds f'(x + s w)|_0 : x in b, w in v}."""
        if b.dim != self.dim or v.dim != self.dim:
            raise ModelError("box dimension mismatch")
        n = self.dim
        eye = IntervalMatrix.from_point(np.eye(n))
        zero = IntervalMatrix.from_point(np.zeros((n, n)))
        _, _, _, DJ = _ifwd_hess(self.layers, b, v, eye, zero)
        return DJ

    def interval_directional_taylor(self, b: Box, v: Box) -> "DirectionalDerivatives":
        """Joint enclosure of f, f', and their first two directional
        derivatives along directions w in v, over states x in b."""
        bl = self._bilinear(b, v, v, same=True)
        return DirectionalDerivatives(bl.value, bl.du, bl.duv,
                                      bl.jac, bl.jac_du, bl.jac_duv)

    def interval_bilinear_taylor(self, b: Box, u: Box, v: Box) -> "BilinearDerivatives":
        """Mixed directional enclosure: f, f', first derivatives along u and
        v, and the mixed second derivatives D^2 f[u, v] and D^2 f'[u, v],
        over states x in b. Point directions are degenerate boxes."""
        return self._bilinear(b, u, v, same=False)

    def _bilinear(self, b: Box, u: Box, v: Box, same: bool) -> "BilinearDerivatives":
        if b.dim != self.dim or u.dim != self.dim or v.dim != self.dim:
            raise ModelError("box dimension mismatch")
        n = self.dim
        zero_vec = Box.point(np.zeros(n))
        eye = IntervalMatrix.from_point(np.eye(n))
        zero = IntervalMatrix.from_point(np.zeros((n, n)))
        out = _ifwd_bilin(self.layers, (b, u, v, zero_vec, eye, zero, zero, zero),
                          same=same)
        return BilinearDerivatives(*out)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {"dim": self.dim, "layers": [_layer_to_json(l) for l in self.layers]}

    @staticmethod
    def from_json(d: dict) -> "VectorField":
        if not isinstance(d, dict) or "dim" not in d or "layers" not in d:
            raise ModelError('model JSON needs "dim" and "layers" keys')
        layers = tuple(_layer_from_json(ld) for ld in d["layers"])
        return VectorField(layers, int(d["dim"]))


# ---------------------------------------------------------------------------
# tanh helper ranges
# ---------------------------------------------------------------------------

def _sech2(x):
    t = np.tanh(x)
    return 1.0 - t * t


def _sech2_range(b: Box) -> Box:
    """Range of tanh' = 1 - tanh^2 over the box; unimodal with peak 1 at 0."""
    far = np.maximum(np.abs(b.lo), np.abs(b.hi))
    near = np.minimum(np.abs(b.lo), np.abs(b.hi))
    lo = _sech2(far)
    hi = np.where((b.lo <= 0.0) & (b.hi >= 0.0), 1.0, _sech2(near))
    return Box(lo, np.maximum(lo, hi))


def _tanh_ddd_range(b: Box) -> Box:
    """Range of tanh''' = (6 tanh^2 - 2)(1 - tanh^2) over the box."""
    t_lo, t_hi = np.tanh(b.lo), np.tanh(b.hi)

    def psi(t):
        return (6.0 * t * t - 2.0) * (1.0 - t * t)

    cands = [psi(t_lo), psi(t_hi)]
    for crit in (0.0, np.sqrt(2.0 / 3.0), -np.sqrt(2.0 / 3.0)):
        inside = (t_lo <= crit) & (crit <= t_hi)
        cands.append(np.where(inside, psi(crit), psi(t_lo)))
    cands = np.stack(cands)
    return Box(cands.min(axis=0), cands.max(axis=0))


def _tanh_dd_range(b: Box) -> Box:
    """Range of tanh'' = -2 tanh (1 - tanh^2) over the box.

    In t = tanh(x) this is phi(t) = 2 t^3 - 2 t, monotone in x within
    [t_lo, t_hi] except at the interior critical points t = +/- 1/sqrt(3).
    """
    t_lo, t_hi = np.tanh(b.lo), np.tanh(b.hi)

    def phi(t):
        return 2.0 * t ** 3 - 2.0 * t

    tc = 1.0 / np.sqrt(3.0)
    cands = [phi(t_lo), phi(t_hi)]
    for crit in (tc, -tc):
        inside = (t_lo <= crit) & (crit <= t_hi)
        cands.append(np.where(inside, phi(crit), phi(t_lo)))
    cands = np.stack(cands)
    return Box(cands.min(axis=0), cands.max(axis=0))


# ---------------------------------------------------------------------------
# point recursions
# ---------------------------------------------------------------------------

def _fwd(layers, x):
    for layer in layers:
        if isinstance(layer, Linear):
            x = x @ layer.weight.T + layer.bias
        elif isinstance(layer, Tanh):
            x = np.tanh(x)
        elif isinstance(layer, Scale):
            x = layer.tau * x
        else:
            x = _fwd(layer.left, x) + _fwd(layer.right, x)
    return x


def _fwd_jac(layers, x, J):
    for layer in layers:
        if isinstance(layer, Linear):
            x = layer.weight @ x + layer.bias
            J = layer.weight @ J
        elif isinstance(layer, Tanh):
            d = _sech2(x)
            x = np.tanh(x)
            J = d[:, None] * J
        elif isinstance(layer, Scale):
            x = layer.tau * x
            J = layer.tau * J
        else:
            xl, Jl = _fwd_jac(layer.left, x, J)
            xr, Jr = _fwd_jac(layer.right, x, J)
            x, J = xl + xr, Jl + Jr
    return x, J


def _fwd_hess(layers, x, dx, J, DJ):
    # State: value x, directional perturbation dx = P'(u) v, Jacobian J = P'(u),
    # and DJ = d/ds P'(u + s v) for the prefix composition P.
    for layer in layers:
        if isinstance(layer, Linear):
            x = layer.weight @ x + layer.bias
            dx = layer.weight @ dx
            J = layer.weight @ J
            DJ = layer.weight @ DJ
        elif isinstance(layer, Tanh):
            d = _sech2(x)
            s = -2.0 * np.tanh(x) * d
            t = np.tanh(x)
            x = t
            DJ = (s * dx)[:, None] * J + d[:, None] * DJ
            J = d[:, None] * J
            dx = d * dx
        elif isinstance(layer, Scale):
            x = layer.tau * x
            dx = layer.tau * dx
            J = layer.tau * J
            DJ = layer.tau * DJ
        else:
            xl, dxl, Jl, DJl = _fwd_hess(layer.left, x, dx, J, DJ)
            xr, dxr, Jr, DJr = _fwd_hess(layer.right, x, dx, J, DJ)
            x, dx, J, DJ = xl + xr, dxl + dxr, Jl + Jr, DJl + DJr
    return x, dx, J, DJ


# ---------------------------------------------------------------------------
# interval recursions
# ---------------------------------------------------------------------------

def _linear_box(layer: Linear, b: Box) -> Box:
    c = layer.weight @ b.center + layer.bias
    r = np.abs(layer.weight) @ b.radius
    return Box(c - r, c + r)


def _ifwd(layers, b: Box) -> Box:
    for layer in layers:
        if isinstance(layer, Linear):
            b = _linear_box(layer, b)
        elif isinstance(layer, Tanh):
            b = Box(np.tanh(b.lo), np.tanh(b.hi))
        elif isinstance(layer, Scale):
            b = box_scale(b, layer.tau)
        else:
            b = box_add(_ifwd(layer.left, b), _ifwd(layer.right, b))
    return b


def _ifwd_jac(layers, b, J):
    for layer in layers:
        if isinstance(layer, Linear):
            b = _linear_box(layer, b)
            J = im_point_matmul(layer.weight, J)
        elif isinstance(layer, Tanh):
            d = _sech2_range(b)
            b = Box(np.tanh(b.lo), np.tanh(b.hi))
            J = im_rowscale(d, J)
        elif isinstance(layer, Scale):
            b = box_scale(b, layer.tau)
            J = im_scale(J, layer.tau)
        else:
            bl, Jl = _ifwd_jac(layer.left, b, J)
            br, Jr = _ifwd_jac(layer.right, b, J)
            b, J = box_add(bl, br), im_add(Jl, Jr)
    return b, J


def _ifwd_hess(layers, b, db, J, DJ):
    for layer in layers:
        if isinstance(layer, Linear):
            b = _linear_box(layer, b)
            db = _linear_box(Linear(layer.weight, np.zeros(layer.weight.shape[0])), db)
            J = im_point_matmul(layer.weight, J)
            DJ = im_point_matmul(layer.weight, DJ)
        elif isinstance(layer, Tanh):
            d = _sech2_range(b)
            s = _tanh_dd_range(b)
            b = Box(np.tanh(b.lo), np.tanh(b.hi))
            DJ = im_add(im_rowscale(box_mul(s, db), J), im_rowscale(d, DJ))
            J = im_rowscale(d, J)
            db = box_mul(d, db)
        elif isinstance(layer, Scale):
            b = box_scale(b, layer.tau)
            db = box_scale(db, layer.tau)
            J = im_scale(J, layer.tau)
            DJ = im_scale(DJ, layer.tau)
        else:
            rl = _ifwd_hess(layer.left, b, db, J, DJ)
            rr = _ifwd_hess(layer.right, b, db, J, DJ)
            b = box_add(rl[0], rr[0])
            db = box_add(rl[1], rr[1])
            J = im_add(rl[2], rr[2])
            DJ = im_add(rl[3], rr[3])
    return b, db, J, DJ


@dataclass(frozen=True)
class DirectionalDerivatives:
    """Interval data for f along a direction set: value, d/ds f(x+sw),
    d2/ds2 f(x+sw), f', d/ds f'(x+sw), d2/ds2 f'(x+sw), all at s = 0."""

    value: Box
    d1: Box
    d2: Box
    jac: IntervalMatrix
    jac_d1: IntervalMatrix
    jac_d2: IntervalMatrix


@dataclass(frozen=True)
class BilinearDerivatives:
    """Interval data for f along a pair of direction sets u, v: value, the
    first derivatives along each direction, the mixed second derivatives
    D^2 f[u, v] and D^2 f'[u, v], plus f' and its first derivatives."""

    value: Box
    du: Box
    dv: Box
    duv: Box
    jac: IntervalMatrix
    jac_du: IntervalMatrix
    jac_dv: IntervalMatrix
    jac_duv: IntervalMatrix


def _ifwd_bilin(layers, state, same=False):
    # `same` marks u and v as the one direction set, allowing the
    # dependency-aware square du * du (never dips below 0) for du * dv.
    b, du, dv, duv, J, DJu, DJv, DDJ = state
    for layer in layers:
        if isinstance(layer, Linear):
            zero_bias = Linear(layer.weight, np.zeros(layer.weight.shape[0]))
            b = _linear_box(layer, b)
            du = _linear_box(zero_bias, du)
            dv = _linear_box(zero_bias, dv)
            duv = _linear_box(zero_bias, duv)
            J = im_point_matmul(layer.weight, J)
            DJu = im_point_matmul(layer.weight, DJu)
            DJv = im_point_matmul(layer.weight, DJv)
            DDJ = im_point_matmul(layer.weight, DDJ)
        elif isinstance(layer, Tanh):
            t1 = _sech2_range(b)
            t2 = _tanh_dd_range(b)
            t3 = _tanh_ddd_range(b)
            prod = box_sq(du) if same else box_mul(du, dv)
            # chain rule at second order; old state on the right-hand sides
            DDJ = im_add(
                im_rowscale(box_add(box_mul(t3, prod), box_mul(t2, duv)), J),
                im_add(im_add(im_rowscale(box_mul(t2, du), DJv),
                              im_rowscale(box_mul(t2, dv), DJu)),
                       im_rowscale(t1, DDJ)))
            DJu = im_add(im_rowscale(box_mul(t2, du), J), im_rowscale(t1, DJu))
            DJv = im_add(im_rowscale(box_mul(t2, dv), J), im_rowscale(t1, DJv))
            J = im_rowscale(t1, J)
            duv = box_add(box_mul(t2, prod), box_mul(t1, duv))
            du = box_mul(t1, du)
            dv = box_mul(t1, dv)
            b = Box(np.tanh(b.lo), np.tanh(b.hi))
        elif isinstance(layer, Scale):
            b = box_scale(b, layer.tau)
            du = box_scale(du, layer.tau)
            dv = box_scale(dv, layer.tau)
            duv = box_scale(duv, layer.tau)
            J = im_scale(J, layer.tau)
            DJu = im_scale(DJu, layer.tau)
            DJv = im_scale(DJv, layer.tau)
            DDJ = im_scale(DDJ, layer.tau)
        else:
            rl = _ifwd_bilin(layer.left, (b, du, dv, duv, J, DJu, DJv, DDJ), same)
            rr = _ifwd_bilin(layer.right, (b, du, dv, duv, J, DJu, DJv, DDJ), same)
            b, du, dv, duv = (box_add(rl[0], rr[0]), box_add(rl[1], rr[1]),
                              box_add(rl[2], rr[2]), box_add(rl[3], rr[3]))
            J, DJu, DJv, DDJ = (im_add(rl[4], rr[4]), im_add(rl[5], rr[5]),
                                im_add(rl[6], rr[6]), im_add(rl[7], rr[7]))
    return b, du, dv, duv, J, DJu, DJv, DDJ


# ---------------------------------------------------------------------------
# set-valued residual map and Lipschitz bound
# ---------------------------------------------------------------------------

def resnet_forward(f: VectorField, z: Zonotope) -> Zonotope:
    """Sound over-approximation of the residual image {u + f(u) : u in z}.

    Second-order form around the center c: u + f(u) lies in
    c + f(c) + (I + f'(c))(u - c) + 0.5 f''(hull z)[u - c, u - c];
    the linear part maps the zonotope exactly, the curvature term is boxed.
    """
    from .sets import minkowski_sum, zono_from_box
    c = z.center
    hull = interval_hull(z)
    M = np.eye(f.dim) + f.jacobian(c)
    lin = Zonotope(M @ (z.center - c), M @ z.generators)
    rem = box_scale(f.interval_directional_taylor(hull, hull.shift(-c)).d2, 0.5)
    return translate(minkowski_sum(lin, zono_from_box(rem)), c + f.eval(c))


def lipschitz_bound(f: VectorField, b: Box) -> float:
    """Sound upper bound on sup_{x in b} ||f'(x)||_inf."""
    return im_inf_norm(f.interval_jacobian(b))


GLOBAL_TANH_BOX_HALF_WIDTH = 1e9


def global_lipschitz_bound(f: VectorField) -> float:
    """Region-free Lipschitz bound (tanh' ranges over its full [0, 1])."""
    n = f.dim
    w = GLOBAL_TANH_BOX_HALF_WIDTH
    return lipschitz_bound(f, Box(-w * np.ones(n), w * np.ones(n)))


# ---------------------------------------------------------------------------
# JSON model schema
# ---------------------------------------------------------------------------

def _layer_to_json(layer) -> dict:
    if isinstance(layer, Linear):
        return {"type": "linear", "weight": layer.weight.tolist(),
                "bias": layer.bias.tolist()}
    if isinstance(layer, Tanh):
        return {"type": "tanh"}
    if isinstance(layer, Scale):
        return {"type": "scale", "tau": layer.tau}
    return {"type": "sum",
            "left": [_layer_to_json(l) for l in layer.left],
            "right": [_layer_to_json(l) for l in layer.right]}


def _layer_from_json(d: dict):
    if not isinstance(d, dict) or "type" not in d:
        raise ModelError('layer JSON needs a "type" key')
    kind = d["type"]
    if kind == "linear":
        return Linear(np.asarray(d["weight"], float), np.asarray(d["bias"], float))
    if kind == "tanh":
        return Tanh()
    if kind == "scale":
        return Scale(float(d["tau"]))
    if kind == "sum":
        return Sum(tuple(_layer_from_json(l) for l in d["left"]),
                   tuple(_layer_from_json(l) for l in d["right"]))
    raise ModelError(f'unknown layer type "{kind}"')


def save_model(f: VectorField, path) -> None:
    with open(path, "w") as fh:
        json.dump(f.to_json(), fh, indent=2)


def load_model(path) -> VectorField:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelError(f"malformed model JSON: {e}") from e
    return VectorField.from_json(d)
