"""Central finite-difference gradient estimator (2n classical queries)."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .geometry import as_point, sample_linf_ball
from .losses import LossOracle


def central_difference(f: LossOracle, z, r_prime: float, j: int) -> float:
    """``(f(z + r' e_j) - f(z - r' e_j)) / (2 r')``, two counted queries."""
    z = as_point(z)
    if not r_prime > 0:
        raise ValueError("r_prime must be positive")
    e = np.zeros(z.size)
    e[j] = r_prime
    return (f.eval(z + e) - f.eval(z - e)) / (2 * r_prime)


class ClassicalEstimate(NamedTuple):
    z: np.ndarray
    grad: np.ndarray
    queries: int


def estimate_gradient_c(f: LossOracle, x, r: float, r_prime: float,
                        rng: np.random.Generator) -> ClassicalEstimate:
    x = as_point(x)
    if not (r > 0 and r_prime > 0):
        raise ValueError("radii must be positive")
    z = sample_linf_ball(x, r, rng)
    before = f.queries
    grad = np.array([central_difference(f, z, r_prime, j) for j in range(x.size)])
    return ClassicalEstimate(z, grad, f.queries - before)
