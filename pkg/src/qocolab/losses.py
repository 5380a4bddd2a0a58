"""Convex loss families, counted zeroth-order oracles and adversaries."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import FeasibleSet, as_point, max_distance_from, norm


class DomainError(RuntimeError):
    """A query fell outside the region where the loss is certified G-Lipschitz."""


@dataclass(eq=False)
class LossOracle:
    """A black-box loss ``f_t`` with its metadata.

    ``value_fn`` and ``increment_fn`` accept arrays whose last axis is the
    coordinate axis. ``increment_fn(z, H)`` returns ``f(z + H) - f(z)`` row by
    row without the cancellation of subtracting two nearby values; it stands in
    for the fixed-point registers of the quantum oracle, whose precision is not
    bounded by float64. ``gradient_fn`` is for verification only.

    ``queries`` counts zeroth-order queries in the cost model of the algorithm
    (one per classical evaluation, four per quantum gradient circuit).
    ``evaluations`` counts classical evaluations actually spent, including the
    ones a statevector simulation needs.
    """

    value_fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    alpha: float = 0.0
    gradient_fn: Callable[[np.ndarray], np.ndarray] | None = None
    increment_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    domain: FeasibleSet | None = None
    margin: float = 0.0
    queries: int = 0
    evaluations: int = 0

    def __post_init__(self):
        if not self.lipschitz > 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.alpha < 0:
            raise ValueError("strong convexity parameter must be nonnegative")

    def check_domain(self, x, extent: float = 0.0) -> None:
        """Raise unless the L-inf box of half-width ``extent`` around ``x`` is in the domain."""
        if self.domain is None:
            return
        if not self.domain.linf_distance_ok(x, self.margin - extent):
            raise DomainError(f"query {np.asarray(x).tolist()} outside the certified domain "
                              f"(margin {self.margin:.6g})")

    def eval(self, x) -> float:
        """One counted classical query ``O_f(x)``."""
        x = as_point(x)
        self.check_domain(x)
        self.queries += 1
        self.evaluations += 1
        return float(self.value_fn(x))

    def peek(self, x) -> float:
        """Uncounted evaluation used for bookkeeping (regret), never by a player."""
        return float(self.value_fn(as_point(x)))

    def increments(self, z, H: np.ndarray) -> np.ndarray:
        """``f(z + H[k]) - f(z)`` for every row of ``H``; counted as evaluations only."""
        z = as_point(z)
        H = np.asarray(H, dtype=float)
        self.evaluations += H.shape[0] + 1
        if self.increment_fn is not None:
            return np.asarray(self.increment_fn(z, H), dtype=float)
        return np.asarray(self.value_fn(z + H), dtype=float) - float(self.value_fn(z))

    def charge(self, k: int) -> None:
        self.queries += int(k)

    def gradient(self, x) -> np.ndarray:
        if self.gradient_fn is None:
            raise ValueError("oracle has no verification gradient")
        return np.asarray(self.gradient_fn(as_point(x)), dtype=float)

    def with_domain(self, domain: FeasibleSet | None, margin: float) -> "LossOracle":
        out = copy.copy(self)
        out.domain = domain
        out.margin = float(margin)
        out.queries = 0
        out.evaluations = 0
        return out


def _resolve_lipschitz(analytic: float, params: dict) -> float:
    given = params.get("lipschitz")
    if given is None:
        if analytic <= 0:
            raise ValueError("analytic Lipschitz constant is zero; pass 'lipschitz' explicitly")
        return float(analytic)
    given = float(given)
    if given < analytic * (1 - 1e-12):
        raise ValueError(f"declared Lipschitz constant {given} is below the analytic value {analytic}")
    return given


def linear(g, offset: float = 0.0, **params) -> LossOracle:
    g = as_point(g)
    c = float(offset)

    def value(x):
        return np.asarray(x) @ g + c

    def grad(x):
        return g.copy()

    def incr(z, H):
        return H @ g

    G = _resolve_lipschitz(norm(g), params)
    return LossOracle(value, G, 0.0, grad, incr, kind="linear",
                      params={"g": g.tolist(), "offset": c, "lipschitz": G})


def quadratic(a, s: float = 1.0, offset: float = 0.0, *, domain: FeasibleSet | None = None,
              margin: float = 0.0, **params) -> LossOracle:
    """``f(x) = s/2 * ||x - a||^2 + offset``; G is taken over ``domain`` enlarged by ``margin``."""
    a = as_point(a)
    s = float(s)
    if s < 0:
        raise ValueError("quadratic with negative curvature is not convex")
    c = float(offset)

    def value(x):
        d = np.asarray(x) - a
        return 0.5 * s * np.sum(d * d, axis=-1) + c

    def grad(x):
        return s * (np.asarray(x) - a)

    def incr(z, H):
        return s * (H @ (z - a)) + 0.5 * s * np.sum(H * H, axis=-1)

    if domain is not None:
        analytic = s * max_distance_from(domain, a, margin)
    elif params.get("lipschitz") is None:
        raise ValueError("quadratic needs a domain or an explicit Lipschitz constant")
    else:
        analytic = 0.0
    G = _resolve_lipschitz(analytic, params)
    return LossOracle(value, G, s, grad, incr, kind="quadratic",
                      params={"a": a.tolist(), "s": s, "offset": c, "lipschitz": G})


def max_affine(slopes, intercepts=None, **params) -> LossOracle:
    """``f(x) = max_k (slopes[k] . x + intercepts[k])``."""
    A = np.atleast_2d(np.asarray(slopes, dtype=float))
    c = np.zeros(A.shape[0]) if intercepts is None else np.asarray(intercepts, dtype=float).reshape(-1)
    if c.size != A.shape[0]:
        raise ValueError("one intercept per affine piece is required")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c))):
        raise ValueError("non-finite max-affine parameters")

    def value(x):
        return np.max(np.asarray(x) @ A.T + c, axis=-1)

    def grad(x):
        return A[int(np.argmax(A @ x + c))].copy()

    def incr(z, H):
        base = A @ z + c
        top = np.max(base)
        return np.max((base - top) + H @ A.T, axis=-1)

    G = _resolve_lipschitz(float(np.max(np.linalg.norm(A, axis=1))), params)
    return LossOracle(value, G, 0.0, grad, incr, kind="max_affine",
                      params={"slopes": A.tolist(), "intercepts": c.tolist(), "lipschitz": G})


def make_family(kind: str, params: dict, domain: FeasibleSet | None = None,
                margin: float = 0.0) -> LossOracle:
    """Build one of the shipped loss families from a parameter dict."""
    params = dict(params)
    if kind == "linear":
        return linear(params.pop("g"), **params)
    if kind == "quadratic":
        return quadratic(params.pop("a"), domain=domain, margin=margin, **params)
    if kind == "max_affine":
        return max_affine(params.pop("slopes"), params.pop("intercepts", None), **params)
    if kind == "constant":
        n = domain.n if domain is not None else int(params.pop("n"))
        return linear(np.zeros(n), offset=params.get("value", 0.0),
                      lipschitz=params.get("lipschitz", 1.0))
    raise ValueError(f"unknown loss family {kind!r}")


# -- adversaries -----------------------------------------------------------

OBLIVIOUS = "oblivious"
ADAPTIVE = "adaptive"
COMPLETELY_ADAPTIVE = "completely_adaptive"


@dataclass(eq=False)
class Adversary:
    """An adversary of one of three powers.

    ``sequence`` is used by oblivious adversaries; ``rule`` is called as
    ``rule(t)`` for adaptive and ``rule(t, x_t)`` for completely adaptive ones.
    ``lipschitz`` and ``alpha`` are the constants every produced loss obeys.
    """

    power: str
    T: int
    lipschitz: float
    alpha: float = 0.0
    sequence: Sequence[LossOracle] | None = None
    rule: Callable | None = None
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.power not in (OBLIVIOUS, ADAPTIVE, COMPLETELY_ADAPTIVE):
            raise ValueError(f"unknown adversary power {self.power!r}")
        if self.power == OBLIVIOUS and (self.sequence is None or len(self.sequence) != self.T):
            raise ValueError("oblivious adversary needs a pre-drawn sequence of length T")
        if self.power != OBLIVIOUS and self.rule is None:
            raise ValueError("adaptive adversaries need a rule")


def adversary_next(adv: Adversary, t: int, x_t, domain: FeasibleSet | None = None,
                   margin: float = 0.0) -> LossOracle:
    """The loss of round ``t`` (1-based), a fresh oracle with zeroed counters."""
    if not 1 <= t <= adv.T:
        raise ValueError(f"round {t} outside 1..{adv.T}")
    if adv.power == OBLIVIOUS:
        f = adv.sequence[t - 1]
    elif adv.power == ADAPTIVE:
        f = adv.rule(t)
    else:
        f = adv.rule(t, as_point(x_t).copy())
    return f.with_domain(domain, margin)


def oblivious(losses: Sequence[LossOracle], description: dict | None = None) -> Adversary:
    losses = list(losses)
    G = max(f.lipschitz for f in losses)
    alpha = min(f.alpha for f in losses)
    return Adversary(OBLIVIOUS, len(losses), G, alpha, sequence=losses,
                     description=description or {"power": OBLIVIOUS})


def alternating_linear(T: int, n: int, G: float = 1.0) -> Adversary:
    """Adaptive rule ``g_t = (-1)^(t+1) G e_1``, fixed before ``x_t`` is seen."""
    e1 = np.zeros(n)
    e1[0] = 1.0

    def rule(t):
        return linear((G if t % 2 == 1 else -G) * e1)

    return Adversary(ADAPTIVE, T, G, 0.0, rule=rule,
                     description={"power": ADAPTIVE, "rule": "alternating_linear", "G": G})


def quadratic_chaser(T: int, offset, s: float, lipschitz: float) -> Adversary:
    """Completely adaptive rule ``f_t(x) = s/2 ||x - (x_t + offset)||^2``.

    ``lipschitz`` must bound ``s * ||x - x_t - offset||`` over the enlarged
    domain; see :func:`chaser_lipschitz`.
    """
    v = as_point(offset)

    def rule(t, x_t):
        return quadratic(x_t + v, s, lipschitz=lipschitz)

    return Adversary(COMPLETELY_ADAPTIVE, T, lipschitz, s, rule=rule,
                     description={"power": COMPLETELY_ADAPTIVE, "rule": "quadratic_chaser",
                                  "offset": v.tolist(), "s": s})


def chaser_lipschitz(domain: FeasibleSet, offset, s: float, margin: float) -> float:
    """Gradient-norm bound of the quadratic chaser over ``domain`` enlarged by ``margin``."""
    return s * (domain.diameter_l2 + margin * np.sqrt(domain.n) + norm(as_point(offset)))
