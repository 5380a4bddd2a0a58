"""Error bounds of the gradient estimators and the regret inequality chains.

Every function evaluates a finite inequality with concrete numbers; nothing
here is asymptotic.
"""

from __future__ import annotations

import math

import numpy as np

from ..ogd import STRONGLY_CONVEX_QUANTUM, Schedule, Transcript
from ..qgrad import QGradParams


def smoothness_surrogate(n: int, G: float, p: float, r: float) -> float:
    """``beta = nG / (p r)``: with probability ``1 - p`` over the sample, the
    Hessian trace stays below this near it."""
    return n * G / (p * r)


def lemma1_bound(params: QGradParams) -> float:
    """L1 error threshold of the quantum estimate, exceeded with probability < rho."""
    n, rho = params.n, params.rho
    return 8 * math.pi * n**3 * (n / rho + 1) * params.beta * params.r_prime / rho


def quantum_round_error(n: int, G: float, rho: float, p: float, r: float, r_prime: float) -> float:
    """``lemma1_bound`` with ``beta`` replaced by its surrogate (register widths are irrelevant)."""
    beta = smoothness_surrogate(n, G, p, r)
    return 8 * math.pi * n**3 * (n / rho + 1) * beta * r_prime / rho


def phase_estimation_tail(e: float) -> float:
    """``Pr[|k - m| > e] < 1 / (2 (e - 1))`` for phase estimation of a linear phase."""
    if e <= 1:
        raise ValueError("tail bound needs e > 1")
    return 1 / (2 * (e - 1))


def subgradient_lower_model(f_x: float, grad_est, x, y, err_l1: float, G: float, r: float) -> float:
    """Right-hand side of ``f(y) >= f(x) + g~.(y-x) - err ||y-x||_inf - 2 G sqrt(n) r``."""
    x, y, g = (np.asarray(v, dtype=float) for v in (x, y, grad_est))
    n = x.size
    return f_x + g @ (y - x) - err_l1 * np.max(np.abs(y - x)) - 2 * G * math.sqrt(n) * r


def quantum_slack(n: int, rho: float, p: float, D: float, G: float, r: float, r_prime: float,
                  alpha: float = 0.0) -> float:
    """Additive slack of the quantum subgradient inequality (holds w.p. > 1 - (rho + p)).

    With ``alpha > 0`` this is the strongly convex version, whose right-hand
    side additionally gains ``alpha/2 ||y - x||^2``.
    """
    err = 8 * math.pi * n**4 * (n + rho) * D * G * r_prime / (rho**2 * p * r)
    return err + (2 * G * math.sqrt(n) + alpha * n * D) * r


def classical_expected_error(n: int, G: float, r: float, r_prime: float) -> float:
    """``E ||grad f(z) - g~||_1 <= n G r' / (2 r)`` for the central-difference estimate."""
    return n * G * r_prime / (2 * r)


def classical_round_error(n: int, G: float, r: float, r_prime: float, rho: float) -> float:
    """Markov version of the expected error, exceeded with probability at most rho."""
    return classical_expected_error(n, G, r, r_prime) / rho


def classical_slack(n: int, D: float, G: float, r: float, r_prime: float, rho: float) -> float:
    return D * classical_round_error(n, G, r, r_prime, rho) + 2 * G * math.sqrt(n) * r


def round_errors(schedule: Schedule, r, r_prime) -> np.ndarray:
    """Per-round L1 error thresholds for the estimator the schedule belongs to."""
    r = np.asarray(r, dtype=float)
    r_prime = np.asarray(r_prime, dtype=float)
    if schedule.quantum:
        return quantum_round_error(schedule.n, schedule.G, schedule.rho, schedule.p, r, r_prime)
    return classical_round_error(schedule.n, schedule.G, r, r_prime, schedule.delta / schedule.T)


def certified_bound(transcript: Transcript, schedule: Schedule, variant: str | None = None) -> float:
    """Evaluate the regret chain with the run's own ``eta_t, r_t, r'_t``.

    The value bounds the regret against any fixed feasible point whenever
    every round's gradient error stayed below its threshold:

        sum_t D^2/2 * max(1/eta_t - 1/eta_{t-1} - alpha, 0)
      + sum_t eta_t (L_t + G)^2 / 2
      + sum_t D L_t
      + sum_t (2 G sqrt(n) + alpha n D) r_t

    with ``1/eta_0 = 0``, ``L_t`` the round's error threshold and ``alpha = 0``
    outside the strongly convex variant.
    """
    variant = variant or schedule.variant
    if variant != schedule.variant:
        raise ValueError(f"variant {variant!r} does not match schedule {schedule.variant!r}")
    recorded = transcript.schedule.get("variant")
    if recorded is not None and recorded != variant:
        raise ValueError(f"transcript was produced under {recorded!r}, not {variant!r}")
    if transcript.T != schedule.T:
        raise ValueError("transcript length does not match the schedule horizon")

    return float(sum(chain_terms(transcript, schedule).values()))


def chain_terms(transcript: Transcript, schedule: Schedule) -> dict:
    """The four sums of :func:`certified_bound`, for reporting."""
    D, G, n = schedule.D, schedule.G, schedule.n
    alpha = schedule.alpha if schedule.variant == STRONGLY_CONVEX_QUANTUM else 0.0
    eta, r = transcript.eta, transcript.r
    L = round_errors(schedule, r, transcript.r_prime)
    inv = 1.0 / eta
    prev = np.concatenate([[0.0], inv[:-1]])
    return {
        "distance": float(0.5 * D**2 * np.sum(np.maximum(inv - prev - alpha, 0.0))),
        "gradient": float(np.sum(eta * (L + G) ** 2 / 2)),
        "error": float(np.sum(D * L)),
        "sampling": float(np.sum((2 * G * math.sqrt(n) + alpha * n * D) * r)),
    }


def schedule_chain(schedule: Schedule) -> float:
    """Chain value computed from the schedule alone (no transcript needed)."""
    ts = np.arange(1, schedule.T + 1)
    vals = np.array([schedule.params_at(int(t)) for t in ts])
    stub = Transcript(np.zeros((schedule.T, schedule.n)), np.zeros((schedule.T, schedule.n)),
                      np.zeros(schedule.T), np.zeros((schedule.T, schedule.n)),
                      vals[:, 0], vals[:, 1], vals[:, 2], np.zeros(schedule.T, dtype=np.int64),
                      schedule={"variant": schedule.variant})
    return certified_bound(stub, schedule)


def sqrt_t_envelope(D: float, G: float, T: int) -> float:
    """Conservative closed form ``8 (D + 1) G sqrt(T)`` for the general convex chains."""
    return 8 * (D + 1) * G * math.sqrt(T)

