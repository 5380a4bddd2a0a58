"""Seeded games, regret reports and the multi-trial runner."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cgrad import estimate_gradient_c
from ..losses import adversary_next
from ..ogd import QUANTUM, Schedule, Transcript, run_game
from ..qgrad import estimate_gradient_q
from . import bounds
from .comparator import ComparatorWarning, minimize_sum
from .config import ExperimentConfig, build_experiment
from .io import atomic_write, format_summary, transcript_to_csv


@dataclass
class RegretReport:
    regret: float
    comparator: np.ndarray
    comparator_objective: float
    bound_value: float
    bound_satisfied: bool
    lemma_exceedances: int
    seed: int | None = None
    total_queries: int = 0
    comparator_converged: bool = True


def gradient_errors(transcript: Transcript) -> np.ndarray:
    """``||grad f_t(z_t) - g~_t||_1`` per round, from the verification gradients."""
    return np.array([np.abs(f.gradient(z) - g).sum()
                     for f, z, g in zip(transcript.losses, transcript.z, transcript.grad)])


def lemma_exceedances(transcript: Transcript, schedule: Schedule) -> int:
    """Rounds whose gradient error exceeded that round's threshold."""
    L = bounds.round_errors(schedule, transcript.r, transcript.r_prime)
    return int(np.sum(gradient_errors(transcript) > L))


def regret_report(transcript: Transcript, schedule: Schedule, feasible_set) -> RegretReport:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ComparatorWarning)
        best = minimize_sum(transcript.losses, feasible_set, seed=transcript.seed or 0)
    converged = best.converged and not caught
    reg = float(np.sum(transcript.loss_value) - best.objective)
    bound = bounds.certified_bound(transcript, schedule)
    return RegretReport(reg, best.x, best.objective, bound, reg <= bound,
                        lemma_exceedances(transcript, schedule), transcript.seed,
                        transcript.total_queries, converged)


def run_one(cfg: ExperimentConfig, seed: int | None = None) -> tuple[Transcript, RegretReport]:
    """Play one seeded game and score it."""
    seed = cfg.seed if seed is None else int(seed)
    exp = build_experiment(cfg, seed)
    tr = run_game(exp.feasible_set, exp.adversary, exp.schedule, exp.estimator, seed, exp.memory_guard)
    return tr, regret_report(tr, exp.schedule, exp.feasible_set)


@dataclass
class TrialsReport:
    reports: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    T: int = 0
    transcripts: list = field(default_factory=list, repr=False)

    @property
    def completed(self) -> int:
        return len(self.reports)

    def aggregate(self) -> dict:
        regrets = np.array([r.regret for r in self.reports])
        ok = np.array([r.bound_satisfied for r in self.reports], dtype=bool)
        clean = np.array([r.lemma_exceedances == 0 for r in self.reports], dtype=bool)
        exceed = sum(r.lemma_exceedances for r in self.reports)
        out = {
            "trials": len(self.seeds),
            "completed": self.completed,
            "failed": len(self.failures),
            "success_fraction": float(ok.mean()) if ok.size else float("nan"),
            "clean_fraction": float(clean.mean()) if clean.size else float("nan"),
            "bound_held_when_clean": bool(np.all(ok[clean])) if clean.any() else True,
            "mean_regret": float(regrets.mean()) if regrets.size else float("nan"),
            "max_regret": float(regrets.max()) if regrets.size else float("nan"),
            "mean_bound": float(np.mean([r.bound_value for r in self.reports])) if self.reports else float("nan"),
            "exceedance_rate": exceed / (self.completed * self.T) if self.completed and self.T else float("nan"),
            "total_queries": [r.total_queries for r in self.reports],
            "seeds": list(self.seeds),
        }
        if self.failures:
            out["failed_seeds"] = sorted(self.failures)
        return out


def _reports_csv(reports: list[RegretReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "regret", "comparator_objective", "bound_value", "bound_satisfied",
                "lemma_exceedances", "total_queries", "comparator_converged"])
    for r in reports:
        w.writerow([r.seed, format(r.regret, ".17g"), format(r.comparator_objective, ".17g"),
                    format(r.bound_value, ".17g"), int(r.bound_satisfied), r.lemma_exceedances,
                    r.total_queries, int(r.comparator_converged)])
    return buf.getvalue()


def run_trials(cfg: ExperimentConfig, num_trials: int, seed_base: int | None = None,
               out_dir=None, keep_transcripts: bool = False) -> TrialsReport:
    """Run ``num_trials`` games with seeds ``seed_base, seed_base + 1, ...``.

    A trial that raises is recorded in ``failures`` and the rest continue.
    With ``out_dir`` each transcript goes to ``transcript_<seed>.csv`` next to
    ``trials.csv`` and ``summary.txt``.
    """
    if num_trials < 1:
        raise ValueError("need at least one trial")
    seed_base = cfg.seed if seed_base is None else int(seed_base)
    out = TrialsReport(T=int(cfg.schedule["T"]))
    for i in range(num_trials):
        seed = seed_base + i
        out.seeds.append(seed)
        try:
            tr, rep = run_one(cfg, seed)
        except Exception as exc:  # isolate the trial, keep going
            out.failures[seed] = f"{type(exc).__name__}: {exc}"
            continue
        out.reports.append(rep)
        if keep_transcripts:
            out.transcripts.append(tr)
        if out_dir is not None:
            atomic_write(Path(out_dir) / f"transcript_{seed}.csv", transcript_to_csv(tr))
    if out_dir is not None:
        atomic_write(Path(out_dir) / "trials.csv", _reports_csv(out.reports))
        atomic_write(Path(out_dir) / "summary.txt", trials_summary(out))
    return out


def trials_summary(rep: TrialsReport) -> str:
    agg = rep.aggregate()
    lines = [f"{agg['completed']}/{agg['trials']} trials completed",
             f"regret <= certified bound in {agg['success_fraction']:.3f} of completed trials",
             f"mean regret {agg['mean_regret']:.6g}, max regret {agg['max_regret']:.6g}",
             f"per-round gradient-error exceedance rate {agg['exceedance_rate']:.4g}"]
    lines += [f"seed {s} failed: {msg}" for s, msg in sorted(rep.failures.items())]
    return format_summary("trials", lines, agg)


def run_summary(tr: Transcript, rep: RegretReport) -> str:
    vals = {"seed": tr.seed, "T": tr.T, "n": tr.n, "estimator": tr.estimator,
            "variant": tr.schedule.get("variant"), "r_prime_mode": tr.schedule.get("r_prime_mode"),
            "regret": rep.regret, "bound": rep.bound_value, "bound_satisfied": rep.bound_satisfied,
            "lemma_exceedances": rep.lemma_exceedances, "total_queries": rep.total_queries,
            "comparator_objective": rep.comparator_objective,
            "comparator": [float(v) for v in rep.comparator],
            "comparator_converged": rep.comparator_converged}
    lines = [f"regret {rep.regret:.6g} against certified bound {rep.bound_value:.6g}",
             f"{rep.lemma_exceedances} of {tr.T} rounds exceeded their gradient-error threshold",
             f"{rep.total_queries} oracle queries"]
    return format_summary("run", lines, vals)


# -- gradient checks -------------------------------------------------------

@dataclass
class GradcheckReport:
    errors: np.ndarray
    thresholds: np.ndarray
    estimator: str
    round: int
    expected_bound: float | None = None

    @property
    def exceedance_rate(self) -> float:
        return float(np.mean(self.errors > self.thresholds))

    def sigma(self, rate: float) -> float:
        return math.sqrt(rate * (1 - rate) / self.errors.size)

    def summary(self) -> str:
        q = np.quantile(self.errors, [0.0, 0.5, 0.9, 0.99, 1.0])
        vals = {"estimator": self.estimator, "round": self.round, "trials": int(self.errors.size),
                "threshold": float(self.thresholds.max()), "exceedance_rate": self.exceedance_rate,
                "mean_error": float(self.errors.mean()),
                "error_quantiles": [float(v) for v in q]}
        if self.expected_bound is not None:
            vals["expected_error_bound"] = self.expected_bound
        lines = [f"L1 gradient error over {self.errors.size} estimates at round {self.round}",
                 "quantiles 0/50/90/99/100%: " + ", ".join(f"{v:.4g}" for v in q),
                 f"threshold {self.thresholds.max():.6g}, exceedance rate {self.exceedance_rate:.4f}"]
        return format_summary("gradcheck", lines, vals)


def gradcheck(cfg: ExperimentConfig, trials: int, seed_base: int | None = None,
              round_index: int = 1) -> GradcheckReport:
    """Repeat one round's gradient estimate at a uniformly drawn point and
    compare against the verification gradient at the sampled ``z``."""
    seed_base = cfg.seed if seed_base is None else int(seed_base)
    errs, ths = np.zeros(trials), np.zeros(trials)
    exp = None
    for i in range(trials):
        exp = build_experiment(cfg, seed_base + i)
        sched, K = exp.schedule, exp.feasible_set
        rng = np.random.default_rng(seed_base + i)
        x = K.sample_uniform(rng)
        f = adversary_next(exp.adversary, round_index, x, domain=K, margin=sched.margin())
        _, r, rp = sched.params_at(round_index)
        if exp.estimator == QUANTUM:
            est = estimate_gradient_q(f, x, r, rp, sched.rho, sched.p, rng, exp.memory_guard,
                                      G=sched.G)
        else:
            est = estimate_gradient_c(f, x, r, rp, rng)
        errs[i] = np.abs(f.gradient(est.z) - est.grad).sum()
        ths[i] = float(bounds.round_errors(sched, r, rp))
    expected = None
    if exp.estimator != QUANTUM:
        expected = bounds.classical_expected_error(exp.schedule.n, exp.schedule.G, r, rp)
    return GradcheckReport(errs, ths, exp.estimator, round_index, expected)
