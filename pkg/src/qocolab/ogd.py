"""Projected online gradient descent: parameter schedules and the game loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cgrad, qgrad
from .geometry import FeasibleSet, as_point
from .losses import Adversary, DomainError, LossOracle, adversary_next

GENERAL_QUANTUM = "general_quantum"
STRONGLY_CONVEX_QUANTUM = "strongly_convex_quantum"
GENERAL_CLASSICAL = "general_classical"
VARIANTS = (GENERAL_QUANTUM, STRONGLY_CONVEX_QUANTUM, GENERAL_CLASSICAL)

PAPER_LITERAL = "paper_literal"
PROOF_CONSISTENT = "proof_consistent"
MODES = (PAPER_LITERAL, PROOF_CONSISTENT)


@dataclass
class Schedule:
    """Step sizes and sampling radii of one of the three regret analyses.

    In ``paper_literal`` mode ``r'_t`` follows the printed parameter lists,
    which keep the per-round gradient-error term constant in ``t``;
    ``proof_consistent`` mode adds the extra ``t`` dependence under which that
    term decays as the regret summation needs. For the quantum variants
    ``delta = T (p + rho)``; when only ``delta`` is given, ``rho = p = delta / (2T)``.
    """

    variant: str
    D: float
    G: float
    n: int
    T: int
    alpha: float = 0.0
    rho: float | None = None
    p: float | None = None
    delta: float | None = None
    r_prime_mode: str = PROOF_CONSISTENT

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown schedule variant {self.variant!r}")
        if self.r_prime_mode not in MODES:
            raise ValueError(f"unknown r_prime mode {self.r_prime_mode!r}")
        if not (self.D > 0 and self.G > 0 and self.n >= 1 and self.T >= 1):
            raise ValueError("D, G, n and T must be positive")
        if self.variant == STRONGLY_CONVEX_QUANTUM and not self.alpha > 0:
            raise ValueError("the strongly convex schedule needs alpha > 0")
        if self.quantum:
            if self.rho is None and self.p is None:
                if self.delta is None:
                    raise ValueError("quantum schedules need rho and p, or delta")
                self.rho = self.p = self.delta / (2 * self.T)
            elif self.rho is None or self.p is None:
                raise ValueError("give both rho and p")
            implied = self.T * (self.p + self.rho)
            if self.delta is not None and not math.isclose(self.delta, implied, rel_tol=1e-9):
                raise ValueError(f"delta={self.delta} inconsistent with T(p + rho) = {implied}")
            self.delta = implied
            if not (0 < self.rho <= 1 and 0 < self.p <= 1):
                raise ValueError("rho and p must lie in (0, 1]")
        else:
            if self.delta is None or not self.delta > 0:
                raise ValueError("the classical schedule needs delta > 0")

    @property
    def quantum(self) -> bool:
        return self.variant != GENERAL_CLASSICAL

    def params_at(self, t: int) -> tuple[float, float, float]:
        """``(eta_t, r_t, r'_t)`` for round ``t`` (1-based)."""
        if not 1 <= t <= self.T:
            raise ValueError(f"round {t} outside 1..{self.T}")
        n, D, G = self.n, self.D, self.G
        literal = self.r_prime_mode == PAPER_LITERAL
        if self.variant == GENERAL_QUANTUM:
            eta = D / (G * math.sqrt(t))
            r = 1 / math.sqrt(t * n)
            tdep = math.sqrt(t * n**9) if literal else t * n**4.5
            r_prime = self.rho**2 * self.p / (8 * math.pi * tdep * (n + self.rho))
        elif self.variant == STRONGLY_CONVEX_QUANTUM:
            a = self.alpha
            k = 2 * G * math.sqrt(n) + a * n * D
            eta = 1 / (a * t)
            r = G**2 / (t * k)
            r_prime = G**2 * self.rho**2 * self.p / (8 * math.pi * t * n**4 * (n + self.rho) * k)
            if not literal:
                r_prime /= D * t
        else:
            eta = D / (G * math.sqrt(t))
            r = 1 / math.sqrt(t * n)
            tdep = math.sqrt(t * n**3) if literal else t * n**1.5
            r_prime = self.delta / (self.T * tdep)
        return eta, r, r_prime

    def margin(self) -> float:
        """Largest distance outside K at which any round may query the loss."""
        _, r, r_prime = self.params_at(1)
        return r + r_prime

    def describe(self) -> dict:
        return {"variant": self.variant, "D": self.D, "G": self.G, "n": self.n, "T": self.T,
                "alpha": self.alpha, "rho": self.rho, "p": self.p, "delta": self.delta,
                "r_prime_mode": self.r_prime_mode}


def step(x, grad, eta: float, feasible_set: FeasibleSet) -> np.ndarray:
    """``Pi_K(x - eta * grad)``."""
    x = as_point(x, feasible_set.n)
    grad = as_point(grad, feasible_set.n)
    return feasible_set.project(x - eta * grad)


@dataclass
class Transcript:
    """Per-round record of one game."""

    x: np.ndarray
    z: np.ndarray
    loss_value: np.ndarray
    grad: np.ndarray
    eta: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray
    queries: np.ndarray
    seed: int | None = None
    schedule: dict = field(default_factory=dict)
    adversary: dict = field(default_factory=dict)
    estimator: str = ""
    evaluations: np.ndarray | None = None
    losses: list = field(default_factory=list, repr=False)

    @property
    def T(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    @property
    def total_queries(self) -> int:
        return int(np.sum(self.queries))

    def same_records(self, other: "Transcript") -> bool:
        names = ("x", "z", "loss_value", "grad", "eta", "r", "r_prime", "queries")
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in names)


QUANTUM = "quantum"
CLASSICAL = "classical"


def run_game(feasible_set: FeasibleSet, adversary: Adversary, schedule: Schedule, estimator: str,
             seed: int, memory_guard: int = qgrad.DEFAULT_MEMORY_GUARD) -> Transcript:
    """Play ``T`` rounds of projected online gradient descent against ``adversary``.

    ``x_1`` is drawn uniformly from K. The value ``f_t(x_t)`` is recorded
    through an uncounted bookkeeping evaluation; only gradient estimation is
    charged to the query budget.
    """
    if estimator not in (QUANTUM, CLASSICAL):
        raise ValueError(f"unknown estimator {estimator!r}")
    if schedule.n != feasible_set.n:
        raise ValueError("schedule dimension does not match the feasible set")
    if adversary.T != schedule.T:
        raise ValueError("adversary horizon does not match the schedule")
    T, n = schedule.T, feasible_set.n
    rng = np.random.default_rng(seed)
    margin = schedule.margin()

    xs, zs, grads = np.zeros((T, n)), np.zeros((T, n)), np.zeros((T, n))
    loss, etas, rs, rps = np.zeros(T), np.zeros(T), np.zeros(T), np.zeros(T)
    queries = np.zeros(T, dtype=np.int64)
    evaluations = np.zeros(T, dtype=np.int64)
    played: list[LossOracle] = []

    x = feasible_set.sample_uniform(rng)
    for t in range(1, T + 1):
        f = adversary_next(adversary, t, x, domain=feasible_set, margin=margin)
        eta, r, r_prime = schedule.params_at(t)
        try:
            if estimator == QUANTUM:
                est = qgrad.estimate_gradient_q(f, x, r, r_prime, schedule.rho, schedule.p, rng,
                                                memory_guard, G=schedule.G)
            else:
                est = cgrad.estimate_gradient_c(f, x, r, r_prime, rng)
        except DomainError as exc:
            raise DomainError(f"round {t}: {exc}") from exc
        i = t - 1
        xs[i], zs[i], grads[i] = x, est.z, est.grad
        loss[i] = f.peek(x)
        etas[i], rs[i], rps[i] = eta, r, r_prime
        queries[i] = est.queries
        evaluations[i] = f.evaluations
        played.append(f)
        x = step(x, est.grad, eta, feasible_set)

    return Transcript(xs, zs, loss, grads, etas, rs, rps, queries, seed=seed,
                      schedule=schedule.describe(), adversary=dict(adversary.description),
                      estimator=estimator, evaluations=evaluations, losses=played)
