"""Experiment configuration files (JSON) and turning them into runnable objects.

Schema::

    {
      "geometry":  {"kind": "box", "n": 2, "low": 0.0, "high": 1.0}
                   | {"kind": "box", "lower": [...], "upper": [...]}
                   | {"kind": "ball", "n": 2, "radius": 1.0, "center": [...]},
      "adversary": {"power": "oblivious" | "adaptive" | "completely_adaptive",
                    "family": "linear" | "quadratic" | "max_affine" | "constant",
                    "parameters": {...}},
      "schedule":  {"variant": "general_quantum" | "strongly_convex_quantum"
                               | "general_classical",
                    "T": 64, "rho": ..., "p": ..., "delta": ..., "alpha": ...,
                    "D": ..., "G": ..., "r_prime_mode": "proof_consistent"},
      "estimator": "quantum" | "classical",
      "runtime":   {"seed": 0, "trials": 10, "memory_guard": 67108864}
    }

``D`` defaults to the Euclidean diameter of the set and ``G`` to the smallest
analytic Lipschitz constant of the adversary's losses on the set enlarged by
the schedule's query margin.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import losses as L
from ..geometry import FeasibleSet, make_set, max_distance_from
from ..ogd import CLASSICAL, GENERAL_CLASSICAL, QUANTUM, Schedule
from ..qgrad import DEFAULT_MEMORY_GUARD


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    geometry: dict
    adversary: dict
    schedule: dict
    estimator: str
    runtime: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.runtime.get("seed", 0))

    @property
    def trials(self) -> int:
        return int(self.runtime.get("trials", 1))

    @property
    def memory_guard(self) -> int:
        return int(self.runtime.get("memory_guard", DEFAULT_MEMORY_GUARD))

    def with_overrides(self, *, seed=None, mode=None, memory_guard=None) -> "ExperimentConfig":
        out = copy.deepcopy(self)
        if seed is not None:
            out.runtime["seed"] = int(seed)
        if mode is not None:
            out.schedule["r_prime_mode"] = mode
        if memory_guard is not None:
            out.runtime["memory_guard"] = int(memory_guard)
        return out

    def as_dict(self) -> dict:
        return {"geometry": self.geometry, "adversary": self.adversary, "schedule": self.schedule,
                "estimator": self.estimator, "runtime": self.runtime}


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    missing = [k for k in ("geometry", "adversary", "schedule", "estimator") if k not in data]
    if missing:
        raise ConfigError(f"missing config sections: {', '.join(missing)}")
    est = data["estimator"]
    if isinstance(est, dict):
        est = est.get("kind")
    if est not in (QUANTUM, CLASSICAL):
        raise ConfigError(f"estimator must be 'quantum' or 'classical', got {est!r}")
    for key in ("geometry", "adversary", "schedule"):
        if not isinstance(data[key], dict):
            raise ConfigError(f"section {key!r} must be an object")
    runtime = data.get("runtime", {})
    if not isinstance(runtime, dict):
        raise ConfigError("section 'runtime' must be an object")
    cfg = ExperimentConfig(dict(data["geometry"]), dict(data["adversary"]), dict(data["schedule"]),
                           est, dict(runtime))
    build_experiment(cfg, cfg.seed)  # surface parameter errors now
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    return parse_config(data)


# -- building --------------------------------------------------------------

@dataclass
class Experiment:
    feasible_set: FeasibleSet
    adversary: L.Adversary
    schedule: Schedule
    estimator: str
    memory_guard: int
    seed: int


def _uniform_points(K: FeasibleSet, rng, count: int) -> list[np.ndarray]:
    return [K.sample_uniform(rng) for _ in range(count)]


def _points(value, K: FeasibleSet, T: int, rng) -> list[np.ndarray]:
    if value is None or value == "uniform":
        return _uniform_points(K, rng, T)
    pts = [np.asarray(v, dtype=float).reshape(-1) for v in value]
    if any(p.size != K.n for p in pts):
        raise ConfigError("point dimension does not match the geometry")
    if len(pts) == 1:
        pts = pts * T
    if len(pts) != T:
        raise ConfigError(f"need 1 or T={T} points, got {len(pts)}")
    return pts


def build_adversary(spec: dict, K: FeasibleSet, T: int, margin: float, seed: int) -> L.Adversary:
    power = spec.get("power", L.OBLIVIOUS)
    family = spec.get("family")
    prm = dict(spec.get("parameters", {}))
    rng = np.random.default_rng([int(prm.get("seed", seed)), 7919])
    n = K.n
    desc = {"power": power, "family": family, **{k: v for k, v in prm.items() if not isinstance(v, list)}}

    if power == L.OBLIVIOUS:
        if family == "quadratic":
            s = float(prm.get("s", 1.0))
            seq = [L.quadratic(a, s, domain=K, margin=margin) for a in _points(prm.get("centers"), K, T, rng)]
        elif family == "linear":
            scale = float(prm.get("scale", 1.0))
            if "g" in prm:
                gs = _points([prm["g"]], K, T, rng)
            else:
                gs = [scale * v / np.linalg.norm(v) for v in rng.normal(size=(T, n))]
            seq = [L.linear(g, lipschitz=prm.get("lipschitz")) for g in gs]
        elif family == "max_affine":
            if "slopes" in prm:
                seq = [L.max_affine(prm["slopes"], prm.get("intercepts"))] * T
            else:
                k = int(prm.get("pieces", 3))
                scale = float(prm.get("scale", 1.0))
                seq = []
                for _ in range(T):
                    A = rng.normal(size=(k, n))
                    A *= scale / np.linalg.norm(A, axis=1, keepdims=True)
                    seq.append(L.max_affine(A, rng.uniform(-0.5 * scale, 0.5 * scale, size=k)))
        elif family == "constant":
            seq = [L.make_family("constant", {"value": prm.get("value", 0.0),
                                              "lipschitz": prm.get("lipschitz", 1.0)}, K)] * T
        else:
            raise ConfigError(f"unknown loss family {family!r}")
        return L.oblivious(seq, desc)

    if power == L.ADAPTIVE:
        if family == "linear":
            adv = L.alternating_linear(T, n, float(prm.get("G", 1.0)))
        elif family == "quadratic":
            s = float(prm.get("s", 1.0))
            centers = _points(prm.get("centers", [list(_corner(K, 0)), list(_corner(K, 1))]), K, 2, rng) \
                if prm.get("centers") is None else [np.asarray(c, dtype=float) for c in prm["centers"]]
            G = max(s * max_distance_from(K, c, margin) for c in centers)

            def rule(t, centers=centers, s=s, G=G):
                return L.quadratic(centers[(t - 1) % len(centers)], s, lipschitz=G)

            adv = L.Adversary(L.ADAPTIVE, T, G, s, rule=rule)
        else:
            raise ConfigError(f"adaptive adversary supports linear or quadratic, not {family!r}")
        adv.description = desc
        return adv

    if power == L.COMPLETELY_ADAPTIVE:
        if family != "quadratic":
            raise ConfigError("completely adaptive adversary supports the quadratic chaser only")
        s = float(prm.get("s", 1.0))
        v = np.asarray(prm.get("offset", [0.5] * n), dtype=float)
        if v.size != n:
            raise ConfigError("chaser offset dimension does not match the geometry")
        adv = L.quadratic_chaser(T, v, s, L.chaser_lipschitz(K, v, s, margin))
        adv.description = desc
        return adv

    raise ConfigError(f"unknown adversary power {power!r}")


def _corner(K: FeasibleSet, which: int) -> np.ndarray:
    if hasattr(K, "lower"):
        return K.lower if which == 0 else K.upper
    return K.center - K.radius / np.sqrt(K.n) if which == 0 else K.center + K.radius / np.sqrt(K.n)


def _schedule(spec: dict, K: FeasibleSet, G: float) -> Schedule:
    known = {"variant", "T", "rho", "p", "delta", "alpha", "D", "G", "r_prime_mode"}
    unknown = set(spec) - known
    if unknown:
        raise ConfigError(f"unknown schedule keys: {', '.join(sorted(unknown))}")
    D = float(spec.get("D", K.diameter_l2))
    if D < K.diameter_l2 * (1 - 1e-12):
        raise ConfigError(f"D={D} is below the set diameter {K.diameter_l2}")
    return Schedule(spec.get("variant"), D, G, K.n, int(spec["T"]), float(spec.get("alpha", 0.0)),
                    spec.get("rho"), spec.get("p"), spec.get("delta"),
                    spec.get("r_prime_mode", "proof_consistent"))


def build_experiment(cfg: ExperimentConfig, seed: int) -> Experiment:
    """Resolve D, G and the query margin, then build set, adversary and schedule.

    The margin of the strongly convex schedule grows with G while G grows with
    the margin, so both are iterated from below until the declared G covers the
    margin it implies.
    """
    try:
        K = make_set(cfg.geometry)
        if "T" not in cfg.schedule:
            raise ConfigError("schedule needs T")
        T = int(cfg.schedule["T"])
        declared_G = cfg.schedule.get("G")
        margin = 0.0
        for _ in range(200):
            adv = build_adversary(cfg.adversary, K, T, margin, seed)
            G = float(declared_G) if declared_G is not None else adv.lipschitz
            if G < adv.lipschitz * (1 - 1e-12):
                raise ConfigError(f"declared G={G} is below the losses' Lipschitz constant "
                                  f"{adv.lipschitz:.6g} on the enlarged domain")
            sched = _schedule(cfg.schedule, K, G)
            needed = sched.margin()
            if needed <= margin:
                break
            margin = needed * (1 + 1e-6)
        else:
            raise ConfigError("Lipschitz constant and query margin did not settle")
        if sched.variant == GENERAL_CLASSICAL and cfg.estimator != CLASSICAL:
            raise ConfigError("the classical schedule needs the classical estimator")
        if sched.variant != GENERAL_CLASSICAL and cfg.estimator != QUANTUM:
            raise ConfigError("quantum schedules need the quantum estimator")
        if sched.variant == "strongly_convex_quantum" and adv.alpha < sched.alpha * (1 - 1e-12):
            raise ConfigError(f"losses are only {adv.alpha}-strongly convex, schedule assumes {sched.alpha}")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return Experiment(K, adv, sched, cfg.estimator, cfg.memory_guard, seed)
