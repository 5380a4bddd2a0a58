"""Points, norms and the two convex feasible sets used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def as_point(x, n: int | None = None) -> np.ndarray:
    """Return ``x`` as a 1-D float array, checking finiteness and dimension."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    if n is not None and p.size != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {p.size}")
    return p


def norm(x, kind: str = "l2") -> float:
    x = np.asarray(x, dtype=float)
    if kind == "l1":
        return float(np.sum(np.abs(x)))
    if kind == "l2":
        return float(np.sqrt(np.dot(x, x)))
    if kind == "linf":
        return float(np.max(np.abs(x))) if x.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


class FeasibleSet:
    """Base class for convex feasible sets.

    Subclasses provide a Euclidean projection, a membership test, a uniform
    sampler and the Euclidean diameter ``diameter_l2``.
    """

    n: int
    diameter_l2: float

    def project(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, y: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def linf_distance_ok(self, y: np.ndarray, margin: float, tol: float = 1e-9) -> bool:
        """Necessary check that ``y`` lies in the set enlarged by ``margin`` in L-inf."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray
    diameter_l2: float = field(init=False)

    def __post_init__(self):
        self.lower = as_point(self.lower)
        self.upper = as_point(self.upper, self.lower.size)
        if np.any(self.lower > self.upper):
            raise ValueError("box requires lower <= upper componentwise")
        self.n = self.lower.size
        self.diameter_l2 = norm(self.upper - self.lower)
        if self.diameter_l2 <= 0:
            raise ValueError("box must have positive diameter")

    def project(self, y):
        y = as_point(y, self.n)
        return np.minimum(np.maximum(y, self.lower), self.upper)

    def contains(self, y, tol=1e-12):
        y = as_point(y, self.n)
        return bool(np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol))

    def sample_uniform(self, rng):
        return rng.uniform(self.lower, self.upper)

    def linf_distance_ok(self, y, margin, tol=1e-9):
        y = np.asarray(y, dtype=float)
        lo = self.lower - margin - tol
        hi = self.upper + margin + tol
        return bool(np.all(y >= lo) and np.all(y <= hi))

    def describe(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(eq=False)
class EuclideanBall(FeasibleSet):
    center: np.ndarray
    radius: float
    diameter_l2: float = field(init=False)

    def __post_init__(self):
        self.center = as_point(self.center)
        self.radius = float(self.radius)
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        self.n = self.center.size
        self.diameter_l2 = 2.0 * self.radius

    def project(self, y):
        y = as_point(y, self.n)
        d = y - self.center
        dist = norm(d)
        # a rescaled point can land a few ulps outside; treat it as inside so
        # projection stays exactly idempotent
        if dist <= self.radius * (1 + 8 * np.finfo(float).eps):
            return y
        return self.center + d * (self.radius / dist)

    def contains(self, y, tol=1e-12):
        y = as_point(y, self.n)
        return norm(y - self.center) <= self.radius + tol

    def sample_uniform(self, rng):
        # rejection from the bounding box
        while True:
            y = rng.uniform(self.center - self.radius, self.center + self.radius)
            if norm(y - self.center) <= self.radius:
                return y

    def linf_distance_ok(self, y, margin, tol=1e-9):
        # an L-inf margin box around the ball lies within L2 distance margin*sqrt(n)
        y = np.asarray(y, dtype=float)
        d = np.linalg.norm(np.atleast_2d(y) - self.center, axis=-1)
        return bool(np.all(d <= self.radius + margin * np.sqrt(self.n) + tol))

    def describe(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


def project(feasible_set: FeasibleSet, y) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``feasible_set``."""
    return feasible_set.project(y)


def sample_linf_ball(center, r: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a point uniformly from the L-inf ball of radius ``r`` around ``center``."""
    center = as_point(center)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0:
        return center.copy()
    return center + rng.uniform(-r, r, size=center.size)


def max_distance_from(feasible_set: FeasibleSet, point, margin: float = 0.0) -> float:
    """Largest Euclidean distance from ``point`` to the set enlarged by ``margin`` in L-inf."""
    point = as_point(point, feasible_set.n)
    if isinstance(feasible_set, Box):
        lo = feasible_set.lower - margin
        hi = feasible_set.upper + margin
        far = np.maximum(np.abs(point - lo), np.abs(point - hi))
        return norm(far)
    if isinstance(feasible_set, EuclideanBall):
        return norm(point - feasible_set.center) + feasible_set.radius + margin * np.sqrt(feasible_set.n)
    raise TypeError(f"unsupported set {type(feasible_set).__name__}")


def make_set(spec: dict) -> FeasibleSet:
    """Build a feasible set from its config description."""
    kind = spec.get("kind")
    if kind == "box":
        if "lower" in spec:
            return Box(spec["lower"], spec["upper"])
        n = int(spec["n"])
        return Box(np.full(n, float(spec.get("low", 0.0))), np.full(n, float(spec.get("high", 1.0))))
    if kind == "ball":
        center = spec.get("center")
        if center is None:
            center = np.zeros(int(spec["n"]))
        return EuclideanBall(center, spec.get("radius", 1.0))
    raise ValueError(f"unknown feasible set kind {kind!r}")
