import math

import numpy as np
import pytest

from qocolab import losses as L
from qocolab import qgrad as Q
from qocolab.geometry import Box
from qocolab.harness.bounds import lemma1_bound, phase_estimation_tail
from qocolab.ogd import Schedule


def _random_loss(rng, n):
    if rng.random() < 0.5:
        return L.quadratic(rng.uniform(-1, 1, n), rng.uniform(0.2, 3.0), lipschitz=10.0)
    return L.max_affine(rng.normal(size=(3, n)), rng.normal(size=3), lipschitz=10.0)


def test_derive_params_worked_example():
    p = Q.derive_params(2, 1.0, 0.1, 0.1, 1 / math.sqrt(2), 8.3735e-7)
    assert p.beta == pytest.approx(28.2843, abs=1e-4)
    assert p.b == 7 and p.c == 9
    assert 2 ** p.b_exact == pytest.approx(84.0, rel=1e-4)
    assert 2 ** (p.c_exact + 1) == pytest.approx(16 * math.pi * 2 / 0.1 / 2 ** (p.b - p.b_exact), rel=1e-4)


def test_derive_params_rejects_bad_inputs():
    with pytest.raises(ValueError):
        Q.derive_params(1, 1.0, 1.5, 0.1, 1.0, 1e-3)
    with pytest.raises(ValueError):
        Q.derive_params(1, -1.0, 0.1, 0.1, 1.0, 1e-3)


def test_memory_guard_reports_b():
    with pytest.raises(Q.MemoryGuardError) as info:
        Q.derive_params(2, 1.0, 0.1, 0.1, 1 / math.sqrt(2), 8.3735e-7, memory_guard=2**10)
    assert info.value.b == 7 and "b=7" in str(info.value)


def test_oracle_F_examples():
    f = L.quadratic([0.0], lipschitz=1.0)
    params = Q.QGradParams.from_bits(1, 1.0, 2, 4, r_prime=0.1)
    assert Q.oracle_F(f, [0.0], params, [3]) == pytest.approx(0.00625, rel=1e-12)
    assert Q.oracle_F(f, [0.3], params, [2]) == 0.0
    g = np.array([0.3, -0.7])
    lin = L.linear(g, lipschitz=1.0)
    p2 = Q.QGradParams.from_bits(2, 1.0, 3, 5, r_prime=0.01)
    for u in ([0, 7], [5, 1], [4, 4]):
        expected = g @ (np.array(u) - 4) / 2.0
        assert Q.oracle_F(lin, [0.1, 0.2], p2, u) == pytest.approx(expected, abs=1e-12)


def test_fixed_point_register_floor_mod():
    assert list(Q.fixed_point_register(np.array([0.0, 0.25, -0.25, 1.5, 0.1249999]), 3)) == [0, 2, 6, 4, 0]


def test_constant_loss_gives_uniform_zero_phase_state():
    f = L.linear([0.0, 0.0], lipschitz=1.0)
    params = Q.QGradParams.from_bits(2, 1.0, 3, 4)
    s = Q.build_phase_state(f, [0.5, 0.5], params)
    np.testing.assert_allclose(s.amplitudes, 1 / 8, atol=1e-15)
    naive = Q.naive_circuit_state(f, [0.5, 0.5], params)
    np.testing.assert_allclose(naive.amplitudes, s.amplitudes, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_phase_state_normalized(seed):
    rng = np.random.default_rng(seed)
    f = _random_loss(rng, 2)
    params = Q.QGradParams.from_bits(2, 10.0, 4, 6, r_prime=0.05)
    s = Q.build_phase_state(f, rng.uniform(size=2), params)
    assert abs(s.norm() - 1) <= 1e-9
    assert abs(Q.inverse_qft_all(s).norm() - 1) <= 1e-9


def test_naive_backend_disentangles():
    rng = np.random.default_rng(10)
    for _ in range(10):
        f = _random_loss(rng, 1)
        params = Q.QGradParams.from_bits(1, 10.0, 3, 4, r_prime=rng.uniform(0.01, 0.5))
        state, residual = Q.naive_circuit_state(f, rng.uniform(size=1), params, return_residual=True)
        assert residual < 1e-9
        assert abs(state.norm() - 1) < 1e-9


def test_backend_equivalence_random_n1():
    rng = np.random.default_rng(11)
    for _ in range(10):
        f = _random_loss(rng, 1)
        params = Q.QGradParams.from_bits(1, 10.0, 3, 4, r_prime=rng.uniform(0.01, 0.5))
        z = rng.uniform(size=1)
        assert Q.fidelity(Q.build_phase_state(f, z, params), Q.naive_circuit_state(f, z, params)) >= 1 - 1e-9


def test_naive_scale_guard():
    with pytest.raises(ValueError):
        Q.naive_circuit_state(L.linear([0.0, 0.0]), [0.0, 0.0], Q.QGradParams.from_bits(2, 1.0, 4, 4))


def test_qft_of_linear_phase_is_basis_state():
    b, k = 4, 5
    N = 2**b
    u = np.arange(N)
    s = Q.PhaseState(np.exp(2j * np.pi * k * u / N) / math.sqrt(N))
    probs = Q.inverse_qft_all(s).probabilities()
    assert probs[k] == pytest.approx(1.0, abs=1e-12)


def test_qft_uniform_to_zero():
    s = Q.PhaseState(np.full((8, 8), 1 / 8, dtype=complex))
    assert Q.inverse_qft_all(s).probabilities()[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_qft_unitarity():
    rng = np.random.default_rng(12)
    for _ in range(10):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        A, B = Q.inverse_qft_all(Q.PhaseState(a)), Q.inverse_qft_all(Q.PhaseState(b))
        assert abs(np.vdot(A.amplitudes, B.amplitudes) - np.vdot(a, b)) <= 1e-9
        back = Q.inverse_qft_all(A, sign=1)
        assert Q.fidelity(back, Q.PhaseState(a)) >= 1 - 1e-9


def test_measure_basis_state_and_born_rule():
    amps = np.zeros((4, 4), dtype=complex)
    amps[2, 3] = 1.0
    rng = np.random.default_rng(13)
    assert all(Q.measure(Q.PhaseState(amps), rng) == (2, 3) for _ in range(20))
    uniform = Q.PhaseState(np.full(2, 1 / math.sqrt(2), dtype=complex))
    zeros = sum(Q.measure(uniform, rng) == (0,) for _ in range(10_000))
    assert abs(zeros / 10_000 - 0.5) <= 0.02


def test_measure_deterministic():
    s = Q.PhaseState(np.full((8,), 1 / math.sqrt(8), dtype=complex))
    a = [Q.measure(s, np.random.default_rng(5)) for _ in range(3)]
    assert a[0] == a[1] == a[2]


@pytest.mark.parametrize("e", [2, 4, 8])
def test_phase_estimation_tail_below_brassard_bound(e):
    # off-grid slope; exact probabilities of the measured outcome
    b, G = 5, 1.0
    N = 2**b
    params = Q.QGradParams.from_bits(1, G, b, 30, r_prime=0.1)
    rng = np.random.default_rng(14)
    for g in rng.uniform(-0.9, 0.9, 20):
        f = L.linear([g], lipschitz=G)
        probs = Q.inverse_qft_all(Q.build_phase_state(f, [0.0], params)).probabilities()
        m = Q.centered_outcome(np.arange(N), b)
        tail = probs[np.abs(N * g / (2 * G) - m) > e].sum()
        assert tail < phase_estimation_tail(e)


def test_decode_examples():
    params = Q.QGradParams.from_bits(1, 1.0, 3, 4)
    assert Q.decode([Q.ZERO_OUTCOME], params)[0] == 0.0
    assert Q.decode([Q.ZERO_OUTCOME + 2], params)[0] == 0.5
    assert Q.decode([7], params)[0] == -0.25  # wraps into [-G, G)


def test_on_grid_slope_recovered_exactly():
    params = Q.QGradParams.from_bits(1, 1.0, 3, 5)
    f = L.linear([0.5], lipschitz=1.0)
    assert Q.exact_recovery_probability(f, [0.2], params, [0.5]) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(15)
    for _ in range(20):
        s = Q.inverse_qft_all(Q.build_phase_state(f, [0.2], params))
        assert Q.decode(Q.measure(s, rng), params)[0] == 0.5


def test_calibration_record():
    rec = Q.calibrate()
    assert rec.passed
    assert rec.transform_sign == Q.TRANSFORM_SIGN == -1
    assert rec.zero_outcome == "0"
    assert rec.window == "[-2^(b-1), 2^(b-1))"
    assert rec == Q.calibrate()


def test_calibration_negative_control():
    assert not Q.calibrate(sign=1).passed


def test_estimator_queries_and_determinism():
    f = L.quadratic([0.3, 0.6], lipschitz=2.0)
    args = ([0.5, 0.5], 0.1, 1e-4, 0.1, 0.1)
    e1 = Q.estimate_gradient_q(f, *args, np.random.default_rng(16))
    e2 = Q.estimate_gradient_q(f, *args, np.random.default_rng(16))
    assert e1.queries == Q.QUERIES_PER_ESTIMATE == 4
    assert f.queries == 8
    assert e1.evaluations == e1.params.size + 1
    assert np.array_equal(e1.z, e2.z) and e1.outcome == e2.outcome and np.array_equal(e1.grad, e2.grad)
    assert np.max(np.abs(e1.z - 0.5)) <= 0.1


def test_closed_forms_for_theorem1_params():
    sched = Schedule("general_quantum", 1.0, 1.0, 3, 10, rho=0.05, p=0.05, r_prime_mode="paper_literal")
    for t in (1, 5, 10):
        _, r, rp = sched.params_at(t)
        p = Q.derive_params(3, 1.0, 0.05, 0.05, r, rp, memory_guard=2**64)
        cb, cc = Q.closed_form_bits(3, 0.05)
        assert abs(p.b_exact - cb) < 1e-9 and abs(p.c_exact - cc) < 1 + 1e-9


def test_lemma1_monte_carlo_small():
    # the same check as the acceptance suite, at n=1 and fewer trials
    n, rho = 1, 0.1
    sched = Schedule("general_quantum", 1.0, 2.0, n, 1, rho=rho, p=rho)
    _, r, rp = sched.params_at(1)
    rng = np.random.default_rng(17)
    K = Box([0.0], [1.0])
    exceed, trials = 0, 400
    for _ in range(trials):
        f = L.quadratic(rng.uniform(0, 1, n), s=1.0, lipschitz=2.0)
        est = Q.estimate_gradient_q(f, K.sample_uniform(rng), r, rp, rho, rho, rng)
        exceed += np.abs(f.gradient(est.z) - est.grad).sum() > lemma1_bound(est.params)
    rate = exceed / trials
    assert rate <= rho + 3 * math.sqrt(rho * (1 - rho) / trials)
