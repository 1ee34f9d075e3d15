"""Bidirectional safety verification via the flow/residual error bound.

Either model's over-approximated output set, expanded by the (possibly
negated) error set, encloses the other model's true outputs. Containment of
the expanded set in an axis-aligned safe set then certifies safety of the
model that was never analyzed directly. Containment failures yield Unknown,
never Unsafe: over-approximation excess is inconclusive, not a witness.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import (
    METHOD_MEANVALUE,
    ErrorBound,
    error_set,
    negate_error_set,
    sander_bound,
)
from .network import VectorField, resnet_forward
from .reach import NoEnclosure, Tube, reach_tube, simulate
from .sets import (
    Box,
    Zonotope,
    contains_box,
    interval_hull,
    minkowski_sum,
    project,
    zono_from_box,
)

NODE_VIA_RESNET = "node-via-resnet"
RESNET_VIA_NODE = "resnet-via-node"

BOUND_SET = "set"
BOUND_SANDER = "sander"

SAMPLE_NODE = "node"
SAMPLE_RESNET = "resnet"


@dataclass(frozen=True)
class RunConfig:
    n_segments: int = 20
    max_gens: Optional[int] = None  # None means 10 * n
    error_method: str = METHOD_MEANVALUE
    samples: int = 10000
    seed: int = 42
    exp_order: int = 10
    bound_method: str = BOUND_SET
    sim_step: float = 1e-3

    def __post_init__(self):
        if self.n_segments < 1 or self.samples < 1:
            raise ValueError("counts must be at least 1")
        if self.exp_order < 2:
            raise ValueError("exponential order must be at least 2")

    def to_json(self) -> dict:
        return {"n_segments": self.n_segments, "max_gens": self.max_gens,
                "error_method": self.error_method, "samples": self.samples,
                "seed": self.seed, "exp_order": self.exp_order,
                "bound_method": self.bound_method, "sim_step": self.sim_step}


@dataclass(frozen=True)
class SafetyProblem:
    """Input set, projected safe set, projection dims (1-based), direction."""

    input_set: Box
    safe_set: Box
    output_dims: tuple
    direction: str

    def __post_init__(self):
        dims = tuple(int(d) for d in self.output_dims)
        object.__setattr__(self, "output_dims", dims)
        n = self.input_set.dim
        if len(set(dims)) != len(dims) or any(d < 1 or d > n for d in dims):
            raise ValueError("output dims must be distinct indices in 1..n")
        if self.safe_set.dim != len(dims):
            raise ValueError("safe set dimension must match the projection")
        if self.direction not in (NODE_VIA_RESNET, RESNET_VIA_NODE):
            raise ValueError(f'unknown direction "{self.direction}"')

    @property
    def dims0(self) -> np.ndarray:
        return np.asarray(self.output_dims, dtype=int) - 1

    def to_json(self) -> dict:
        return {"input_set": self.input_set.to_json(),
                "safe_set": self.safe_set.to_json(),
                "output_dims": list(self.output_dims),
                "direction": self.direction}

    @staticmethod
    def from_json(d: dict) -> "SafetyProblem":
        return SafetyProblem(Box.from_json(d["input_set"]),
                             Box.from_json(d["safe_set"]),
                             tuple(d["output_dims"]),
                             d["direction"])


@dataclass(frozen=True)
class Verdict:
    result: str  # "Safe" | "Unknown"
    direction: str
    proxy_output_set: Optional[Zonotope]
    expanded_set: Optional[Zonotope]
    error_bound: Optional[ErrorBound]
    comparison: Optional[object]
    tube_stats: dict
    timings: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_safe(self) -> bool:
        return self.result == "Safe"

    def to_json(self, include_timings: bool = True) -> dict:
        d = {
            "result": self.result,
            "direction": self.direction,
            "proxy_output_set": self.proxy_output_set.to_json()
            if self.proxy_output_set is not None else None,
            "proxy_output_hull": interval_hull(self.proxy_output_set).to_json()
            if self.proxy_output_set is not None else None,
            "expanded_set": self.expanded_set.to_json()
            if self.expanded_set is not None else None,
            "expanded_hull": interval_hull(self.expanded_set).to_json()
            if self.expanded_set is not None else None,
            "error_bound": self.error_bound.to_json()
            if self.error_bound is not None else None,
            "comparison": self.comparison.to_json()
            if self.comparison is not None else None,
            "tube_stats": self.tube_stats,
            "diagnostics": self.diagnostics,
        }
        if include_timings:
            d["timings"] = self.timings
        return d


def check_safety(s: Zonotope, safe: Box, dims) -> bool:
    """Projected containment; exact for axis-aligned safe sets."""
    dims = np.asarray(dims, dtype=int)
    return contains_box(safe, interval_hull(project(s, dims)))


def _expansion_box(f: VectorField, tube: Tube, err: ErrorBound,
                   cfg: RunConfig, negated: bool) -> Box:
    """Error box added to the proxy output set, per the configured method."""
    if cfg.bound_method == BOUND_SET:
        return err.omega_eps
    if cfg.bound_method == BOUND_SANDER:
        comp = sander_bound(f, err if not negated else negate_error_set(err))
        n = f.dim
        r = comp.sander_scalar * np.ones(n)
        return Box(-r, r)  # symmetric hypercube; negation-invariant
    raise ValueError(f'unknown bound method "{cfg.bound_method}"')


def _tube_stats(tube: Tube) -> dict:
    return {"n_segments": tube.n_segments,
            "final_hull": interval_hull(tube.final).to_json(),
            "tube_hull": tube.hull().to_json()}


def _no_enclosure_verdict(direction: str, e: NoEnclosure) -> Verdict:
    return Verdict("Unknown", direction, None, None, None, None, {},
                   diagnostics={"no_enclosure": True,
                                "segment": e.segment,
                                "message": str(e)})


def verify_node_via_resnet(f: VectorField, p: SafetyProblem,
                           cfg: RunConfig = RunConfig()) -> Verdict:
    """Verify the continuous flow using the residual map's reachable set.

    Pipeline: tube, error set, residual output set, expanded set = residual
    output + error box, projected containment in the safe set.
    """
    timings = {}
    t0 = time.perf_counter()
    try:
        tube = reach_tube(f, p.input_set, n_segments=cfg.n_segments,
                          exp_order=cfg.exp_order, max_gens=cfg.max_gens)
    except NoEnclosure as e:
        return _no_enclosure_verdict(NODE_VIA_RESNET, e)
    timings["tube"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err = error_set(f, tube, cfg.error_method)
    comp = sander_bound(f, err)
    timings["error_bound"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    proxy = resnet_forward(f, zono_from_box(p.input_set))
    expansion = _expansion_box(f, tube, err, cfg, negated=False)
    expanded = minkowski_sum(proxy, zono_from_box(expansion))
    safe = check_safety(expanded, p.safe_set, p.dims0)
    timings["containment"] = time.perf_counter() - t0

    return Verdict("Safe" if safe else "Unknown", NODE_VIA_RESNET,
                   proxy, expanded, err, comp, _tube_stats(tube), timings)


def verify_resnet_via_node(f: VectorField, p: SafetyProblem,
                           cfg: RunConfig = RunConfig()) -> Verdict:
    """Verify the residual map using the flow's reachable set.

    The error enters with opposite sign, so the proxy output set is expanded
    by the negated error set: this is a set addition of the negation, never
    a set difference.
    """
    timings = {}
    t0 = time.perf_counter()
    try:
        tube = reach_tube(f, p.input_set, n_segments=cfg.n_segments,
                          exp_order=cfg.exp_order, max_gens=cfg.max_gens)
    except NoEnclosure as e:
        return _no_enclosure_verdict(RESNET_VIA_NODE, e)
    timings["tube"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err = error_set(f, tube, cfg.error_method)
    neg_err = negate_error_set(err)
    comp = sander_bound(f, err)
    timings["error_bound"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    proxy = tube.final
    expansion = _expansion_box(f, tube, neg_err, cfg, negated=True)
    expanded = minkowski_sum(proxy, zono_from_box(expansion))
    safe = check_safety(expanded, p.safe_set, p.dims0)
    timings["containment"] = time.perf_counter() - t0

    return Verdict("Safe" if safe else "Unknown", RESNET_VIA_NODE,
                   proxy, expanded, neg_err, comp, _tube_stats(tube), timings)


def verify(f: VectorField, p: SafetyProblem,
           cfg: RunConfig = RunConfig()) -> Verdict:
    if p.direction == NODE_VIA_RESNET:
        return verify_node_via_resnet(f, p, cfg)
    return verify_resnet_via_node(f, p, cfg)


def sample_outputs(f: VectorField, x_in: Box, m: int, which: str,
                   seed: int = 42, h: float = 1e-3) -> np.ndarray:
    """m output samples: RK4 flow endpoints or residual-map images."""
    if m < 1:
        raise ValueError("sample count must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.uniform(x_in.lo, x_in.hi, size=(m, x_in.dim))
    if which == SAMPLE_NODE:
        return simulate(f, u, horizon=1.0, h=h)
    if which == SAMPLE_RESNET:
        return u + f.eval(u)
    raise ValueError(f'unknown sample kind "{which}"')


def soundness_report(samples: np.ndarray, omega, slack: float = 1e-9) -> dict:
    """Count samples outside the interval hull of omega (zero expected)."""
    hull = omega if isinstance(omega, Box) else interval_hull(omega)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != hull.dim:
        raise ValueError("sample matrix must be m x n matching the set")
    inside = (np.all(samples >= hull.lo - slack, axis=1)
              & np.all(samples <= hull.hi + slack, axis=1))
    n_viol = int((~inside).sum())
    worst = 0.0
    if n_viol:
        over = np.maximum(samples - hull.hi, hull.lo - samples)
        worst = float(np.maximum(over, 0.0).max())
    return {"n_samples": int(samples.shape[0]),
            "n_violations": n_viol,
            "worst_excess": worst,
            "slack": slack}
