"""Best fixed point in hindsight and regret."""

from __future__ import annotations

import warnings
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from ..geometry import Box, EuclideanBall, FeasibleSet
from ..losses import LossOracle
from ..ogd import Transcript


class ComparatorWarning(RuntimeWarning):
    pass


class ComparatorResult(NamedTuple):
    x: np.ndarray
    objective: float
    converged: bool
    mapping_norm: float


def _sum_oracle(losses: Sequence[LossOracle]):
    """Objective and gradient of ``sum_t f_t``, vectorised for quadratic/linear sums."""
    if all(f.kind in ("quadratic", "linear") for f in losses):
        S = 0.0
        lin = np.zeros(len(losses[0].params.get("a", losses[0].params.get("g"))))
        const = 0.0
        for f in losses:
            if f.kind == "quadratic":
                s, a = f.params["s"], np.asarray(f.params["a"])
                S += s
                lin -= s * a
                const += 0.5 * s * a @ a + f.params["offset"]
            else:
                lin += np.asarray(f.params["g"])
                const += f.params["offset"]

        def value(x):
            return 0.5 * S * (x @ x) + lin @ x + const

        def grad(x):
            return S * x + lin

        return value, grad

    def value(x):
        return float(sum(f.peek(x) for f in losses))

    def grad(x):
        return np.sum([f.gradient(x) for f in losses], axis=0)

    return value, grad


def _pgd(value, grad, K: FeasibleSet, x0, tol: float, max_iter: int) -> ComparatorResult:
    x = K.project(x0)
    fx = value(x)
    L = 1.0
    gm = np.inf
    for _ in range(max_iter):
        g = grad(x)
        while True:
            y = K.project(x - g / L)
            fy = value(y)
            d = y - x
            dd = d @ d
            # descent lemma, or its gradient form, which does not suffer from
            # cancellation in fy - fx once steps get tiny
            if fy <= fx + g @ d + 0.5 * L * dd or dd == 0.0 or \
                    np.linalg.norm(grad(y) - g) <= L * np.sqrt(dd) * (1 + 1e-12):
                if fy <= fx + 1e-15 * max(1.0, abs(fx)):
                    break
            if L > 1e12:  # curvature blow-up: a kink, not a stationary point
                return ComparatorResult(x, fx, False, gm)
            L *= 2.0
        gm = L * float(np.linalg.norm(d))
        x, fx = y, fy
        if gm <= tol:
            return ComparatorResult(x, fx, True, gm)
        L = max(L / 2.0, 1e-12)
    return ComparatorResult(x, fx, False, gm)


def _epigraph_minimize(losses: Sequence[LossOracle], K: FeasibleSet, x0) -> ComparatorResult | None:
    """Solve ``min sum_t f_t`` with one epigraph variable per max-affine loss.

    ``max_k (a_k.x + c_k)`` becomes ``s`` subject to ``s >= a_k.x + c_k``, which
    turns the nonsmooth sum into a smooth constrained problem for SLSQP.
    Returns None when some loss is not of a supported kind.
    """
    pieces = [f for f in losses if f.kind == "max_affine"]
    smooth = [f for f in losses if f.kind != "max_affine"]
    if not pieces or any(f.kind not in ("quadratic", "linear") for f in smooth):
        return None
    n, m = K.n, len(pieces)
    sval, sgrad = _sum_oracle(smooth) if smooth else (lambda x: 0.0, lambda x: np.zeros(n))
    A = [np.asarray(f.params["slopes"]) for f in pieces]
    c = [np.asarray(f.params["intercepts"]) for f in pieces]

    def obj(v):
        return sval(v[:n]) + v[n:].sum()

    def jac(v):
        return np.concatenate([sgrad(v[:n]), np.ones(m)])

    def cons(v):
        return np.concatenate([v[n + j] - (A[j] @ v[:n] + c[j]) for j in range(m)])

    def cons_jac(v):
        rows = []
        for j in range(m):
            e = np.zeros((A[j].shape[0], m))
            e[:, j] = 1.0
            rows.append(np.hstack([-A[j], e]))
        return np.vstack(rows)

    constraints = [{"type": "ineq", "fun": cons, "jac": cons_jac}]
    bounds = None
    if isinstance(K, Box):
        bounds = [(lo, hi) for lo, hi in zip(K.lower, K.upper)] + [(None, None)] * m
    elif isinstance(K, EuclideanBall):
        constraints.append({"type": "ineq",
                            "fun": lambda v: np.array([K.radius**2 - np.sum((v[:n] - K.center) ** 2)]),
                            "jac": lambda v: np.concatenate([-2 * (v[:n] - K.center), np.zeros(m)])[None, :]})
    else:
        return None
    x0 = K.project(x0)
    v0 = np.concatenate([x0, [float(np.max(A[j] @ x0 + c[j])) for j in range(m)]])
    res = minimize(obj, v0, jac=jac, bounds=bounds, constraints=constraints, method="SLSQP",
                   options={"ftol": 1e-13, "maxiter": 2000})
    x = K.project(res.x[:n])
    return ComparatorResult(x, comparator_objective(losses, x), bool(res.success), float("nan"))


def grid_minimize(value, K: FeasibleSet, resolution: float = 1e-6, points: int = 41) -> tuple[np.ndarray, float]:
    """Refining grid search over the bounding box of K (``n <= 2`` only).

    Grid points are projected onto K, so every evaluated point is feasible.
    """
    if K.n > 2:
        raise ValueError("grid search is only meant for n <= 2")
    if isinstance(K, Box):
        lo, hi = K.lower.copy(), K.upper.copy()
    elif isinstance(K, EuclideanBall):
        lo, hi = K.center - K.radius, K.center + K.radius
    else:
        raise TypeError(f"unsupported set {type(K).__name__}")
    best_x, best_v = None, np.inf
    while True:
        axes = [np.linspace(lo[i], hi[i], points) for i in range(K.n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, K.n)
        for p in pts:
            q = K.project(p)
            v = value(q)
            if v < best_v:
                best_x, best_v = q, v
        width = np.max(hi - lo) / (points - 1)
        if width <= resolution:
            return best_x, float(best_v)
        lo, hi = best_x - 2 * width, best_x + 2 * width


def minimize_sum(losses: Sequence[LossOracle], K: FeasibleSet, tol: float = 1e-8, starts: int = 4,
                 max_iter: int = 20000, seed: int = 0) -> ComparatorResult:
    """Multi-start projected gradient descent on ``sum_t f_t`` using the verification gradients.

    Sums with max-affine terms rarely reach the gradient-mapping tolerance, so
    they are refined through an epigraph reformulation; for ``n <= 2`` a
    refining grid search is the last resort.
    """
    if len(losses) == 0:
        raise ValueError("need at least one loss")
    value, grad = _sum_oracle(losses)
    rng = np.random.default_rng(seed)
    inits = [K.project(np.mean([K.sample_uniform(rng) for _ in range(8)], axis=0))]
    inits += [K.sample_uniform(rng) for _ in range(starts - 1)]
    results = [_pgd(value, grad, K, x0, tol, max_iter) for x0 in inits]
    best = min(results, key=lambda res: res.objective)
    if not best.converged:
        refined = _epigraph_minimize(losses, K, best.x)
        if refined is not None and refined.objective <= best.objective + 1e-12:
            best = refined
    if K.n <= 2 and not best.converged:
        gx, gv = grid_minimize(value, K)
        if gv < best.objective:
            best = ComparatorResult(gx, gv, False, best.mapping_norm)
    if not best.converged:
        warnings.warn(f"comparator did not reach gradient-mapping norm {tol:g} "
                      f"(best {best.mapping_norm:.3g}); using the best iterate", ComparatorWarning)
    return best


def solve_comparator(losses: Sequence[LossOracle], K: FeasibleSet) -> np.ndarray:
    """The best fixed point in hindsight, ``argmin_{x in K} sum_t f_t(x)``."""
    return minimize_sum(losses, K).x


def comparator_objective(losses: Sequence[LossOracle], x) -> float:
    return float(sum(f.peek(x) for f in losses))


def regret(transcript: Transcript, comparator, losses: Sequence[LossOracle] | None = None) -> float:
    """``sum_t f_t(x_t) - sum_t f_t(comparator)``."""
    losses = transcript.losses if losses is None else losses
    if len(losses) != transcript.T:
        raise ValueError("need the loss of every round")
    return float(np.sum(transcript.loss_value) - comparator_objective(losses, comparator))
