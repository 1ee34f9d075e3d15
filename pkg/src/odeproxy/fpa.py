"""Fixed-point attractor benchmark: the bundled 5-D model and safety problem.

The vector field is f(x) = tau * x + W tanh(x) with tau = -1e-6 and a
composite weight matrix W = [[0, A], [0, B A]] built from the two published
blocks below. The bundled input box uses the published approximate bounds;
the benchmark's exact values may differ in later decimals, which reports
flag alongside the results.
"""
from __future__ import annotations

import numpy as np

from .network import Linear, Scale, Sum, Tanh, VectorField
from .sets import Box

TAU = -1e-6

A = np.array([
    [-1.20327, -0.07202, -0.93635],
    [1.18810, -1.50015, 0.93519],
])

B = np.array([
    [1.21464, -0.10502],
    [0.12023, 0.19387],
    [-1.36695, 0.12201],
])

INPUT_SET_NOTE = ("fpa input set uses the published approximate bounds; "
                  "the benchmark's exact values may differ in later decimals")


def fpa_weight_matrix() -> np.ndarray:
    """Composite 5x5 weight matrix [[0, A], [0, B A]]."""
    W = np.zeros((5, 5))
    W[0:2, 2:5] = A
    W[2:5, 2:5] = B @ A
    return W


def fpa_model() -> VectorField:
    W = fpa_weight_matrix()
    layers = (Sum(left=(Scale(TAU),),
                  right=(Tanh(), Linear(W, np.zeros(5)))),)
    return VectorField(layers, 5)


def fpa_input_box() -> Box:
    return Box([0.45, 0.72, 0.47, 0.19, -0.64],
               [0.55, 0.88, 0.58, 0.24, -0.53])


def fpa_safe_set() -> Box:
    return Box([0.2, 0.3], [0.6, 0.85])


FPA_OUTPUT_DIMS = (1, 2)  # 1-based projection h(x) = (x1, x2)
