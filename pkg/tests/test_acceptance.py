"""Acceptance criteria 1-10, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import time
from functools import lru_cache
from pathlib import Path

import numpy as np

from qocolab import losses as L
from qocolab import qgrad as Q
from qocolab.cgrad import estimate_gradient_c
from qocolab.geometry import Box, EuclideanBall, norm, project
from qocolab.harness.bounds import lemma1_bound, sqrt_t_envelope
from qocolab.harness.config import build_experiment, parse_config
from qocolab.harness.io import transcript_from_csv, transcript_to_csv
from qocolab.harness.trials import run_trials
from qocolab.ogd import GENERAL_QUANTUM, PAPER_LITERAL, Schedule, run_game

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS: dict[int, str] = {}
RUNS = 50


def report(k: int, ok: bool, detail: str, started: float) -> None:
    line = f"ACCEPTANCE {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{time.time() - started:.1f}s]"
    RESULTS[k] = line
    print(line, flush=True)


def binomial_margin(p: float, n: int) -> float:
    return 3 * math.sqrt(p * (1 - p) / n)


def _config(name: str, **schedule) -> dict:
    cfg = json.loads((CONFIGS / f"{name}.json").read_text())
    cfg["schedule"].update(schedule)
    return cfg


@lru_cache(maxsize=None)
def _trials(name: str, T: int, runs: int = RUNS, seed_base: int = 1000):
    rep = run_trials(parse_config(_config(name, T=T)), runs, seed_base)
    return rep, rep.aggregate()


# -- 1 ---------------------------------------------------------------------

def test_01_backend_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(1)
    worst, resid = 1.0, 0.0
    combos = [(n, b, c) for n in (1, 2) for b in (2, 3) for c in (3, 4)]
    for i in range(50):
        n, b, c = combos[i % len(combos)]
        if rng.random() < 0.5:
            f = L.quadratic(rng.uniform(-1, 1, n), rng.uniform(0.1, 4.0), lipschitz=20.0)
        else:
            f = L.max_affine(rng.normal(size=(3, n)), rng.normal(size=3), lipschitz=20.0)
        params = Q.QGradParams.from_bits(n, 20.0, b, c, r_prime=rng.uniform(0.01, 1.0))
        z = rng.uniform(-1, 1, n)
        naive, res = Q.naive_circuit_state(f, z, params, return_residual=True)
        worst = min(worst, Q.fidelity(Q.build_phase_state(f, z, params), naive))
        resid = max(resid, res)
    ok = worst >= 1 - 1e-9 and time.time() - t0 < 10
    report(1, ok, f"min fidelity {worst:.15f} over 50 losses, max ancilla residual {resid:.1e}", t0)
    assert ok


# -- 2 ---------------------------------------------------------------------

def test_02_calibration_exactness():
    t0 = time.time()
    b, G = 5, 1.0
    N = 2**b
    worst, draws, wrong = 1.0, 0, 0
    rng = np.random.default_rng(2)
    for n in (1, 2):
        params = Q.QGradParams.from_bits(n, G, b, b + 1)
        ks = [(k,) for k in range(-N // 2, N // 2)] if n == 1 else \
            [tuple(rng.integers(-N // 2, N // 2, 2)) for _ in range(40)]
        for k in ks:
            g = 2 * G * np.array(k, dtype=float) / N
            f = L.linear(g, lipschitz=G * math.sqrt(n) + 1e-12)
            z = rng.uniform(-1, 1, n)
            worst = min(worst, Q.exact_recovery_probability(f, z, params, g))
        for seed in range(100):
            k = np.random.default_rng(seed).integers(-N // 2, N // 2, n)
            g = 2 * G * k / N
            f = L.linear(g, lipschitz=G * math.sqrt(n) + 1e-12)
            seeded = np.random.default_rng(seed)
            z = seeded.uniform(-1, 1, n)
            m = Q.measure(Q.inverse_qft_all(Q.build_phase_state(f, z, params)), seeded)
            draws += 1
            wrong += not np.array_equal(Q.decode(m, params), g)
    ok = worst >= 1 - 1e-9 and wrong == 0 and time.time() - t0 < 5
    report(2, ok, f"worst exact-recovery probability {worst:.15f}; {wrong}/{draws} seeded draws off", t0)
    assert ok


# -- 3 ---------------------------------------------------------------------

def test_03_lemma1_monte_carlo():
    t0 = time.time()
    n, rho, trials = 2, 0.1, 2000
    K = Box([0.0, 0.0], [1.0, 1.0])
    G = 2.0
    sched = Schedule(GENERAL_QUANTUM, K.diameter_l2, G, n, 1, rho=rho, p=rho)
    _, r, rp = sched.params_at(1)
    rng = np.random.default_rng(3)
    exceed, bits = 0, set()
    for _ in range(trials):
        f = L.quadratic(K.sample_uniform(rng), s=1.0, lipschitz=G)
        est = Q.estimate_gradient_q(f, K.sample_uniform(rng), r, rp, rho, rho, rng)
        bits.add((est.params.b, est.params.size))
        exceed += np.abs(f.gradient(est.z) - est.grad).sum() > lemma1_bound(est.params)
    rate = exceed / trials
    limit = rho + binomial_margin(rho, trials)
    ok = rate <= limit and bits == {(7, 2**14)}
    report(3, ok, f"exceedance rate {rate:.4f} <= {limit:.4f} over {trials} estimates, (b, amplitudes) {sorted(bits)}", t0)
    assert ok


# -- 4 ---------------------------------------------------------------------

def test_04_theorem1_n1_faithful():
    t0 = time.time()
    rep, agg = _trials("theorem1_n1_quadratic", 64)
    exp = build_experiment(parse_config(_config("theorem1_n1_quadratic")), 1000)
    s = exp.schedule
    bits = {Q.derive_params(1, s.G, s.rho, s.p, *s.params_at(t)[1:]).b for t in (1, 64)}
    delta = s.delta
    need = (1 - delta) - binomial_margin(1 - delta, RUNS)
    envelope_ok = all(r.regret <= sqrt_t_envelope(s.D, s.G, 64) for r in rep.reports if r.bound_satisfied)
    ok = agg["completed"] == RUNS and agg["success_fraction"] >= need and envelope_ok
    report(4, ok, f"regret <= certified bound in {agg['success_fraction']:.2f} of {RUNS} runs (need >= {need:.2f}); "
                  f"envelope 8(D+1)G*sqrt(T) held in all passing runs: {envelope_ok}; b in {sorted(bits)}; "
                  f"mean regret {agg['mean_regret']:.3f}", t0)
    assert ok


# -- 5 ---------------------------------------------------------------------

def test_05_theorem1_n2_relaxed():
    t0 = time.time()
    rep128, agg128 = _trials("theorem1_n2_relaxed", 128)
    rep32, agg32 = _trials("theorem1_n2_relaxed", 32)
    ratio128 = agg128["mean_regret"] / math.sqrt(128)
    ratio32 = agg32["mean_regret"] / math.sqrt(32)
    ok = agg128["completed"] == RUNS and agg128["success_fraction"] >= 0.9 and ratio128 <= ratio32
    report(5, ok, f"T=128: regret <= certified bound in {agg128['success_fraction']:.2f} of {RUNS} runs; "
                  f"mean regret/sqrt(T) {ratio32:.4f} (T=32) -> {ratio128:.4f} (T=128)", t0)
    assert ok


# -- 6 ---------------------------------------------------------------------

def test_06_theorem2_strongly_convex():
    t0 = time.time()
    rep256, agg256 = _trials("theorem2_chaser", 256)
    rep16, agg16 = _trials("theorem2_chaser", 16)
    ratio = agg256["mean_regret"] / agg16["mean_regret"]
    limit = math.log(256) / math.log(16) * 1.5
    ok = agg256["completed"] == RUNS and agg256["success_fraction"] >= 0.9 and ratio <= limit
    report(6, ok, f"T=256: regret <= certified bound in {agg256['success_fraction']:.2f} of {RUNS} runs; "
                  f"mean regret ratio T=256/T=16 {ratio:.3f} <= {limit:.1f}", t0)
    assert ok


# -- 7 ---------------------------------------------------------------------

def test_07_theorem3_classical():
    t0 = time.time()
    rep, agg = _trials("theorem3_classical_n8", 1024)
    exact = all(q == 2 * 8 * 1024 for q in agg["total_queries"])
    ok = agg["completed"] == RUNS and agg["success_fraction"] >= 0.95 and exact
    report(7, ok, f"regret <= certified bound in {agg['success_fraction']:.2f} of {RUNS} runs; "
                  f"total queries 16384 in every run: {exact}", t0)
    assert ok


# -- 8 ---------------------------------------------------------------------

def test_08_query_accounting():
    t0 = time.time()
    checks = []
    for name, T, per_round in (("theorem1_n1_quadratic", 64, 4), ("theorem2_chaser", 16, 4),
                               ("theorem2_chaser", 256, 4), ("theorem3_classical_n8", 1024, 16)):
        _, agg = _trials(name, T)
        checks.append(all(q == per_round * T for q in agg["total_queries"]) and len(agg["total_queries"]) == RUNS)
    # a quick pair outside the cached suites, including the ball geometry
    for est, variant, extra in (("quantum", "general_quantum", {"rho": 0.1, "p": 0.1}),
                                ("classical", "general_classical", {"delta": 0.1})):
        cfg = {"geometry": {"kind": "ball", "n": 3, "radius": 1.0},
               "adversary": {"power": "oblivious", "family": "max_affine", "parameters": {"pieces": 4}},
               "schedule": {"variant": variant, "T": 20, **extra}, "estimator": est}
        if est == "quantum":
            cfg["geometry"]["n"] = 1
        rep = run_trials(parse_config(cfg), 5, 0)
        per = 4 if est == "quantum" else 2 * cfg["geometry"]["n"]
        checks.append(rep.aggregate()["total_queries"] == [per * 20] * 5)
    ok = all(checks)
    report(8, ok, f"quantum 4T and classical 2nT held exactly in {sum(checks)}/{len(checks)} suites", t0)
    assert ok


# -- 9 ---------------------------------------------------------------------

def test_09_register_closed_forms():
    t0 = time.time()
    rng = np.random.default_rng(9)
    worst_b = worst_c = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 7))
        rho, p = rng.uniform(0.001, 0.5, 2)
        T = int(rng.integers(1, 10_000))
        t = int(rng.integers(1, T + 1))
        G = rng.uniform(0.1, 10)
        s = Schedule(GENERAL_QUANTUM, rng.uniform(0.5, 5), G, n, T, rho=rho, p=p, r_prime_mode=PAPER_LITERAL)
        _, r, rp = s.params_at(t)
        prm = Q.derive_params(n, G, rho, p, r, rp, memory_guard=2**200)
        cb, cc = Q.closed_form_bits(n, rho)
        worst_b = max(worst_b, abs(prm.b - cb))
        worst_c = max(worst_c, abs(prm.c - cc))
    ok = worst_b <= 1 and worst_c <= 1
    report(9, ok, f"largest |b - closed form| {worst_b:.3f}, |c - closed form| {worst_c:.3f} over 20 tuples", t0)
    assert ok


# -- 10 --------------------------------------------------------------------

def test_10_invariant_suites():
    t0 = time.time()
    rng = np.random.default_rng(10)
    failures = []

    for K in (Box([0.0, -1.0, 2.0], [1.0, 0.5, 4.0]), EuclideanBall([0.5, 0.5, 0.5], 1.3)):
        for _ in range(1000):
            y1, y2 = rng.normal(scale=3, size=3), rng.normal(scale=3, size=3)
            x = K.sample_uniform(rng)
            p1, p2 = project(K, y1), project(K, y2)
            if not np.array_equal(project(K, p1), p1):
                failures.append("idempotence")
            if norm(p1 - p2) > norm(y1 - y2) + 1e-12:
                failures.append("nonexpansive")
            if norm(p1 - x) > norm(y1 - x) + 1e-12:
                failures.append("pythagorean")

    for _ in range(50):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        A, B = Q.inverse_qft_all(Q.PhaseState(a)), Q.inverse_qft_all(Q.PhaseState(b))
        if abs(np.vdot(A.amplitudes, B.amplitudes) - np.vdot(a, b)) > 1e-9:
            failures.append("unitarity")
        f = L.quadratic(rng.uniform(size=2), rng.uniform(0.1, 3), lipschitz=10.0)
        s = Q.build_phase_state(f, rng.uniform(size=2), Q.QGradParams.from_bits(2, 10.0, 3, 5))
        if abs(s.norm() - 1) > 1e-9 or abs(Q.inverse_qft_all(s).norm() - 1) > 1e-9:
            failures.append("normalization")
        a0 = rng.uniform(size=4)
        est = estimate_gradient_c(L.quadratic(a0, lipschitz=10.0), rng.uniform(size=4), 0.1, 1e-3, rng)
        if np.max(np.abs(est.grad - (est.z - a0))) > 1e-9 or est.queries != 8:
            failures.append("central difference")

    cfg = parse_config(_config("theorem1_n1_quadratic", T=16))
    exp = build_experiment(cfg, 5)
    tr1 = run_game(exp.feasible_set, exp.adversary, exp.schedule, exp.estimator, 5)
    tr2 = run_game(exp.feasible_set, exp.adversary, exp.schedule, exp.estimator, 5)
    if not tr1.same_records(tr2):
        failures.append("determinism")
    if not transcript_from_csv(transcript_to_csv(tr1)).same_records(tr1):
        failures.append("csv round trip")

    ok = not failures
    report(10, ok, "projection, unitarity, normalization, central-difference, determinism, CSV round-trip: "
                   + ("all held" if ok else "violations " + ", ".join(sorted(set(failures)))), t0)
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
