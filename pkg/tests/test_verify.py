"""Bidirectional safety verification on the bundled benchmark and on
constructed problems with known outcomes."""
import numpy as np
import pytest

from odeproxy.fpa import FPA_OUTPUT_DIMS, fpa_input_box, fpa_model, fpa_safe_set
from odeproxy.network import Linear, Scale, VectorField
from odeproxy.sets import Box, interval_hull, project
from odeproxy.verify import (
    BOUND_SANDER,
    NODE_VIA_RESNET,
    RESNET_VIA_NODE,
    SAMPLE_NODE,
    SAMPLE_RESNET,
    RunConfig,
    SafetyProblem,
    check_safety,
    sample_outputs,
    soundness_report,
    verify,
    verify_node_via_resnet,
    verify_resnet_via_node,
)


def fpa_problem(direction=NODE_VIA_RESNET):
    return SafetyProblem(fpa_input_box(), fpa_safe_set(), FPA_OUTPUT_DIMS,
                         direction)


# -- configuration and problem validation -----------------------------------

def test_runconfig_validation():
    with pytest.raises(ValueError):
        RunConfig(n_segments=0)
    with pytest.raises(ValueError):
        RunConfig(samples=0)
    with pytest.raises(ValueError):
        RunConfig(exp_order=1)


def test_problem_validation():
    with pytest.raises(ValueError):
        SafetyProblem(fpa_input_box(), fpa_safe_set(), (1, 6), NODE_VIA_RESNET)
    with pytest.raises(ValueError):
        SafetyProblem(fpa_input_box(), fpa_safe_set(), (1, 1), NODE_VIA_RESNET)
    with pytest.raises(ValueError):
        SafetyProblem(fpa_input_box(), Box([0.0], [1.0]), (1, 2),
                      NODE_VIA_RESNET)
    with pytest.raises(ValueError):
        SafetyProblem(fpa_input_box(), fpa_safe_set(), (1, 2), "sideways")


def test_problem_json_roundtrip():
    p = fpa_problem(RESNET_VIA_NODE)
    q = SafetyProblem.from_json(p.to_json())
    assert q.direction == RESNET_VIA_NODE
    assert q.output_dims == (1, 2)
    assert np.allclose(q.input_set.lo, p.input_set.lo)


# -- benchmark verdicts -----------------------------------------------------

def test_fpa_safe_both_directions():
    f = fpa_model()
    cfg = RunConfig()
    v_fwd = verify_node_via_resnet(f, fpa_problem(), cfg)
    v_bwd = verify_resnet_via_node(f, fpa_problem(RESNET_VIA_NODE), cfg)
    assert v_fwd.result == "Safe" and v_fwd.is_safe
    assert v_bwd.result == "Safe"


def test_fpa_unknown_with_scalar_bound():
    f = fpa_model()
    cfg = RunConfig(bound_method=BOUND_SANDER)
    assert verify(f, fpa_problem(), cfg).result == "Unknown"
    assert verify(f, fpa_problem(RESNET_VIA_NODE), cfg).result == "Unknown"


def test_fpa_shrunk_safe_set_unknown():
    tight = Box([0.3, 0.45], [0.5, 0.7])
    p = SafetyProblem(fpa_input_box(), tight, FPA_OUTPUT_DIMS, NODE_VIA_RESNET)
    assert verify(fpa_model(), p).result == "Unknown"


def test_fpa_enlarged_safe_set_stays_safe():
    big = Box([-1.0, -1.0], [2.0, 2.0])
    p = SafetyProblem(fpa_input_box(), big, FPA_OUTPUT_DIMS, NODE_VIA_RESNET)
    assert verify(fpa_model(), p).result == "Safe"


def test_verify_dispatch_matches_direction():
    f = fpa_model()
    v = verify(f, fpa_problem(RESNET_VIA_NODE))
    assert v.direction == RESNET_VIA_NODE


def test_no_enclosure_gives_unknown_verdict():
    stiff = VectorField((Linear(np.array([[100.0, 0.0], [0.0, 100.0]]),
                                np.zeros(2)),), 2)
    p = SafetyProblem(Box([1.0, 1.0], [1.1, 1.1]),
                      Box([-1e9, -1e9], [1e9, 1e9]), (1, 2), NODE_VIA_RESNET)
    v = verify(stiff, p, RunConfig(n_segments=1))
    assert v.result == "Unknown"
    assert v.diagnostics.get("no_enclosure") is True
    assert v.diagnostics.get("segment") == 0


def test_zero_field_trivially_safe():
    f = VectorField((Scale(0.0),), 2)
    b = Box([0.1, 0.2], [0.3, 0.4])
    p = SafetyProblem(b, Box([0.0, 0.1], [0.4, 0.5]), (1, 2), NODE_VIA_RESNET)
    v = verify(f, p)
    assert v.result == "Safe"
    # both models equal the identity: proxy hull equals the input box
    hull = interval_hull(v.proxy_output_set)
    assert np.allclose(hull.lo, b.lo, atol=1e-9)
    assert np.allclose(hull.hi, b.hi, atol=1e-9)


def test_expanded_set_widens_proxy_by_error_widths():
    # omega need not contain 0, so the expansion is a shift plus widening:
    # expanded width = proxy width + error-set width, dimension-wise
    f = fpa_model()
    v = verify(f, fpa_problem())
    ph = interval_hull(v.proxy_output_set)
    eh = interval_hull(v.expanded_set)
    assert np.allclose(eh.width, ph.width + v.error_bound.omega_eps.width,
                       atol=1e-12)


def test_verdict_json_deterministic_without_timings():
    f = fpa_model()
    d1 = verify(f, fpa_problem()).to_json(include_timings=False)
    d2 = verify(f, fpa_problem()).to_json(include_timings=False)
    assert d1 == d2
    assert "timings" not in d1


def test_check_safety_projection():
    from odeproxy.sets import zono_from_box
    z = zono_from_box(Box([0.1, 0.2, -5.0], [0.3, 0.4, 5.0]))
    assert check_safety(z, Box([0.0, 0.0], [1.0, 1.0]), [0, 1])
    assert not check_safety(z, Box([0.0, 0.0], [1.0, 1.0]), [0, 2])


# -- sampling and soundness reports -----------------------------------------

def test_sample_outputs_deterministic():
    f = fpa_model()
    b = fpa_input_box()
    s1 = sample_outputs(f, b, 100, SAMPLE_RESNET, seed=7)
    s2 = sample_outputs(f, b, 100, SAMPLE_RESNET, seed=7)
    assert np.array_equal(s1, s2)
    s3 = sample_outputs(f, b, 100, SAMPLE_RESNET, seed=8)
    assert not np.array_equal(s1, s3)


def test_sample_outputs_validation():
    f = fpa_model()
    with pytest.raises(ValueError):
        sample_outputs(f, fpa_input_box(), 0, SAMPLE_NODE)
    with pytest.raises(ValueError):
        sample_outputs(f, fpa_input_box(), 10, "quantum")


def test_soundness_report_zero_violations_on_benchmark():
    f = fpa_model()
    b = fpa_input_box()
    v_fwd = verify(f, fpa_problem())
    node = sample_outputs(f, b, 2000, SAMPLE_NODE, seed=1)
    rep = soundness_report(node, interval_hull(v_fwd.expanded_set))
    assert rep["n_violations"] == 0 and rep["worst_excess"] == 0.0
    v_bwd = verify(f, fpa_problem(RESNET_VIA_NODE))
    resnet = sample_outputs(f, b, 2000, SAMPLE_RESNET, seed=1)
    rep = soundness_report(resnet, interval_hull(v_bwd.expanded_set))
    assert rep["n_violations"] == 0


def test_soundness_report_counts_violations():
    samples = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    rep = soundness_report(samples, Box([-1.0, -1.0], [1.0, 1.0]))
    assert rep["n_violations"] == 2
    assert rep["worst_excess"] == pytest.approx(2.0)


def test_soundness_report_shape_validation():
    with pytest.raises(ValueError):
        soundness_report(np.zeros((5, 3)), Box([0.0, 0.0], [1.0, 1.0]))
