"""Set-based error bounds between a continuous-depth flow and its residual
Euler step, with bidirectional safety verification on top."""

from .errors import (
    BoundComparison,
    ErrorBound,
    error_image_interval,
    error_image_lagrange,
    error_image_meanvalue,
    error_map_eval,
    error_set,
    negate_error_set,
    sander_bound,
)
from .fpa import fpa_input_box, fpa_model, fpa_safe_set
from .intervals import IntervalMatrix
from .network import (
    Linear,
    ModelError,
    Scale,
    Sum,
    Tanh,
    VectorField,
    global_lipschitz_bound,
    lipschitz_bound,
    load_model,
    resnet_forward,
    save_model,
)
from .reach import NoEnclosure, Tube, apriori_enclosure, reach_step, reach_tube, simulate
from .sets import (
    Box,
    DimensionMismatch,
    Zonotope,
    contains_box,
    interval_hull,
    linear_map,
    minkowski_sum,
    negate,
    project,
    reduce_order,
    zono_from_box,
)
from .verify import (
    RunConfig,
    SafetyProblem,
    Verdict,
    check_safety,
    sample_outputs,
    soundness_report,
    verify,
    verify_node_via_resnet,
    verify_resnet_via_node,
)

__version__ = "0.1.0"
