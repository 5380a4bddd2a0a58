"""Statevector simulation of the phase-estimation gradient circuit.

The circuit puts ``n`` registers of ``b`` qubits in uniform superposition,
kicks the fixed-point value of

    F(u) = 2^b / (2 G r') * [f(z + r'/2^b (u - 2^(b-1))) - f(z)]

into their phase through an oracle register and a Fourier-basis ancilla,
uncomputes the oracle register, applies an inverse QFT to every register and
measures. The fast backend writes the phase directly; ``naive_circuit_state``
runs the registers explicitly and is only meant as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import as_point, sample_linf_ball
from .losses import LossOracle, linear

DEFAULT_MEMORY_GUARD = 2**26
NAIVE_QUBIT_LIMIT = 20

# Decode convention, fixed by ``calibrate``: the inverse transform uses the
# kernel exp(-2 pi i m u / 2^b) and the zero-gradient outcome is m = 0, with
# outcomes read in the window [-2^(b-1), 2^(b-1)).
TRANSFORM_SIGN = -1
ZERO_OUTCOME = 0

QUERIES_PER_ESTIMATE = 4
_CHUNK = 2**20


class MemoryGuardError(RuntimeError):
    def __init__(self, b: int, n: int, limit: int):
        self.b, self.n, self.limit = b, n, limit
        super().__init__(f"statevector of 2^(b*n) amplitudes with b={b}, n={n} "
                         f"exceeds the memory guard of {limit} amplitudes")


@dataclass(frozen=True)
class QGradParams:
    n: int
    G: float
    rho: float
    p: float
    r: float
    r_prime: float
    beta: float
    b: int
    c: int
    b_exact: float = math.nan
    c_exact: float = math.nan

    def __post_init__(self):
        if self.b < 1 or self.c < 1:
            raise ValueError(f"register widths must be >= 1 (b={self.b}, c={self.c})")

    @property
    def N(self) -> int:
        return 2**self.b

    @property
    def size(self) -> int:
        return 2 ** (self.b * self.n)

    @classmethod
    def from_bits(cls, n: int, G: float, b: int, c: int, r_prime: float = 0.1,
                  rho: float = 1.0, p: float = 1.0, r: float = 1.0) -> "QGradParams":
        """Parameters with hand-picked register widths (tests and calibration)."""
        return cls(n, float(G), rho, p, r, r_prime, n * G / (p * r), int(b), int(c))


def closed_form_bits(n: int, rho: float) -> tuple[float, float]:
    """Unrounded widths ``log2(2n(n+rho)/rho)`` and ``log2(16 pi n / rho) - 1``."""
    return math.log2(2 * n * (n + rho) / rho), math.log2(16 * math.pi * n / rho) - 1


def derive_params(n: int, G: float, rho: float, p: float, r: float, r_prime: float,
                  memory_guard: int = DEFAULT_MEMORY_GUARD) -> QGradParams:
    """Smoothness surrogate and register widths for one round."""
    for name, v in (("n", n), ("G", G), ("rho", rho), ("p", p), ("r", r), ("r_prime", r_prime)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if rho > 1 or p > 1:
        raise ValueError("rho and p must lie in (0, 1]")
    beta = n * G / (p * r)
    b_exact = math.log2(G * rho / (4 * math.pi * n**2 * beta * r_prime))
    b = max(1, math.ceil(b_exact - 1e-9))
    c_exact = math.log2(4 * G / (2**b * n * beta * r_prime)) - 1
    c = max(1, math.ceil(c_exact - 1e-9))
    if 2 ** (b * n) > memory_guard:
        raise MemoryGuardError(b, n, memory_guard)
    return QGradParams(n, G, rho, p, r, r_prime, beta, b, c, b_exact, c_exact)


@dataclass
class PhaseState:
    """Amplitudes of the ``n`` coordinate registers, shape ``(2^b,) * n``."""

    amplitudes: np.ndarray

    @property
    def n(self) -> int:
        return self.amplitudes.ndim

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def fidelity(a: PhaseState, b: PhaseState) -> float:
    """``|<a|b>|^2``, insensitive to a global phase."""
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _offsets(n: int, b: int, flat: np.ndarray) -> np.ndarray:
    """Centred grid offsets ``u - 2^(b-1)`` for flat (row-major) indices."""
    u = np.stack(np.unravel_index(flat, (2**b,) * n), axis=-1)
    return u - 2 ** (b - 1)


def _phase_values(f: LossOracle, z: np.ndarray, params: QGradParams, flat: np.ndarray) -> np.ndarray:
    step = params.r_prime / params.N
    H = _offsets(params.n, params.b, flat) * step
    return f.increments(z, H) * (params.N / (2 * params.G * params.r_prime))


def oracle_F(f: LossOracle, z, params: QGradParams, u) -> float:
    """The real value ``F(u)`` the oracle register would hold before truncation."""
    z = as_point(z, params.n)
    u = np.asarray(u, dtype=np.int64).reshape(1, params.n)
    if np.any(u < 0) or np.any(u >= params.N):
        raise ValueError("register index out of range")
    f.check_domain(z + (u[0] - params.N / 2) * params.r_prime / params.N)
    flat = np.ravel_multi_index(tuple(u.T), (params.N,) * params.n)
    return float(_phase_values(f, z, params, flat)[0])


def fixed_point_register(F: np.ndarray, c: int) -> np.ndarray:
    """``floor(F * 2^c) mod 2^c``: the c-bit register holding ``F mod 1``.

    A relative slack of 1e-9 LSB absorbs representation error in values that
    are exact multiples of ``2^-c``.
    """
    x = np.asarray(F, dtype=float) * 2.0**c
    reg = np.floor(x + 1e-9 * np.maximum(1.0, np.abs(x)))
    return np.mod(reg, 2**c).astype(np.int64)


def _check_scale(params: QGradParams, memory_guard: int) -> None:
    if params.size > memory_guard:
        raise MemoryGuardError(params.b, params.n, memory_guard)


def build_phase_state(f: LossOracle, z, params: QGradParams,
                      memory_guard: int = DEFAULT_MEMORY_GUARD) -> PhaseState:
    """State of the coordinate registers after Q_F, kickback and Q_F^-1.

    Those three steps act on the coordinate registers as the pure phase
    ``exp(2 pi i Ftilde(u))``, so the amplitudes are written directly.
    """
    _check_scale(params, memory_guard)
    z = as_point(z, params.n)
    f.check_domain(z, extent=params.r_prime / 2)
    size = params.size
    amps = np.empty(size, dtype=complex)
    scale = 1.0 / math.sqrt(size)
    M = 2**params.c
    table = scale * np.exp(2j * np.pi * np.arange(M) / M) if M <= size else None
    for start in range(0, size, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, size))
        reg = fixed_point_register(_phase_values(f, z, params, flat), params.c)
        if table is not None:
            amps[start:start + flat.size] = table[reg]
        else:
            amps[start:start + flat.size] = scale * np.exp(2j * np.pi * reg / M)
    return PhaseState(amps.reshape((params.N,) * params.n))


def _hadamard_all(psi: np.ndarray, axes) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    for ax in axes:
        psi = np.moveaxis(np.tensordot(h, psi, axes=([1], [ax])), 0, ax)
    return psi


def kickback_state(c: int) -> np.ndarray:
    """Fourier-basis eigenvector of ``|a> -> |a + y mod 2^c>`` with eigenvalue ``e^(2 pi i y/2^c)``."""
    M = 2**c
    return np.exp(-2j * np.pi * np.arange(M) / M) / math.sqrt(M)


def naive_circuit_state(f: LossOracle, z, params: QGradParams, return_residual: bool = False):
    """Register-by-register simulation including both ancilla registers.

    Qubits are stored big-endian within each register; Hadamards act qubit by
    qubit, the oracle and the modular adder act as basis permutations. Returns
    the coordinate-register state read off with the ancillas projected on
    ``|0> (x) |y0>``; with ``return_residual`` also the norm of what is left
    outside that product state.
    """
    n, b, c = params.n, params.b, params.c
    total = n * b + 2 * c
    if total > NAIVE_QUBIT_LIMIT:
        raise ValueError(f"naive backend limited to {NAIVE_QUBIT_LIMIT} qubits, needs {total}")
    z = as_point(z, n)
    f.check_domain(z, extent=params.r_prime / 2)
    K, M = params.size, 2**c

    # registers: n*b coordinate qubits, oracle register |0>, kickback register |y0>
    y0 = kickback_state(c)
    psi = np.zeros((K, M, M), dtype=complex)
    psi[0, 0, :] = y0
    psi = psi.reshape([2] * total)
    psi = _hadamard_all(psi, range(n * b)).reshape(K, M, M)

    reg = fixed_point_register(_phase_values(f, z, params, np.arange(K)), c)
    q = np.arange(M)
    # Q_F: |u>|q> -> |u>|q + reg(u)>
    psi = psi[np.arange(K)[:, None], (q[None, :] - reg[:, None]) % M, :]
    # modular adder: |q>|a> -> |q>|a + q>
    psi = psi[:, q[:, None], (q[None, :] - q[:, None]) % M]
    # Q_F^-1
    psi = psi[np.arange(K)[:, None], (q[None, :] + reg[:, None]) % M, :]

    coords = psi[:, 0, :] @ np.conj(y0)
    state = PhaseState(coords.reshape((params.N,) * n))
    if not return_residual:
        return state
    product = np.zeros_like(psi)
    product[:, 0, :] = coords[:, None] * y0[None, :]
    return state, float(np.linalg.norm(psi - product))


def inverse_qft_all(state: PhaseState, params: QGradParams | None = None,
                    sign: int = TRANSFORM_SIGN) -> PhaseState:
    """Unitary ``2^b``-point transform along every register axis.

    ``sign=-1`` uses the kernel ``exp(-2 pi i m u / 2^b) / sqrt(2^b)``.
    """
    a = state.amplitudes
    if sign == -1:
        out = np.fft.fftn(a, norm="ortho")
    elif sign == 1:
        out = np.fft.ifftn(a, norm="ortho")
    else:
        raise ValueError("sign must be +1 or -1")
    return PhaseState(out)


def measure(state: PhaseState, rng: np.random.Generator) -> tuple[int, ...]:
    """Sample an outcome tuple by inverting the sequential CDF of ``|amplitude|^2``."""
    probs = state.probabilities().ravel()
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    idx = min(idx, probs.size - 1)
    return tuple(int(i) for i in np.unravel_index(idx, state.amplitudes.shape))


def centered_outcome(m, b: int, zero_outcome: int = ZERO_OUTCOME) -> np.ndarray:
    """Map outcomes into the window ``[-2^(b-1), 2^(b-1))`` around ``zero_outcome``."""
    N = 2**b
    m = np.asarray(m, dtype=np.int64)
    return np.mod(m - zero_outcome + N // 2, N) - N // 2


def decode(m, params: QGradParams, zero_outcome: int = ZERO_OUTCOME) -> np.ndarray:
    """Gradient estimate ``(2G / 2^b) * centred(m)``."""
    return (2 * params.G / params.N) * centered_outcome(m, params.b, zero_outcome).astype(float)


class QuantumEstimate(NamedTuple):
    z: np.ndarray
    grad: np.ndarray
    queries: int
    evaluations: int
    outcome: tuple
    params: QGradParams


def estimate_gradient_q(f: LossOracle, x, r: float, r_prime: float, rho: float, p: float,
                        rng: np.random.Generator, memory_guard: int = DEFAULT_MEMORY_GUARD,
                        sign: int = TRANSFORM_SIGN, G: float | None = None) -> QuantumEstimate:
    """One run of the gradient circuit around a point sampled near ``x``.

    ``G`` sets the decoding range ``[-G, G)`` per coordinate and defaults to
    the loss's own Lipschitz constant. A partial derivative equal to ``+G``
    wraps to ``-G``, so pass a strictly larger ``G`` when that can happen.

    ``queries`` is the circuit cost (two oracle calls inside Q_F, two inside
    its inverse). ``evaluations`` is what the classical simulation spent.
    """
    x = as_point(x)
    params = derive_params(x.size, f.lipschitz if G is None else G, rho, p, r, r_prime, memory_guard)
    z = sample_linf_ball(x, r, rng)
    before = f.evaluations
    state = inverse_qft_all(build_phase_state(f, z, params, memory_guard), params, sign)
    m = measure(state, rng)
    f.charge(QUERIES_PER_ESTIMATE)
    return QuantumEstimate(z, decode(m, params), QUERIES_PER_ESTIMATE,
                           f.evaluations - before, m, params)


@dataclass(frozen=True)
class CalibrationRecord:
    transform_sign: int
    zero_outcome: str | None
    window: str | None
    bits: tuple
    worst_exact_probability: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "transform_sign": self.transform_sign,
            "zero_outcome": self.zero_outcome,
            "window": self.window,
            "bits": list(self.bits),
            "worst_exact_probability": self.worst_exact_probability,
            "passed": self.passed,
        }


def exact_recovery_probability(f: LossOracle, z, params: QGradParams, target, sign: int = TRANSFORM_SIGN,
                               zero_outcome: int = ZERO_OUTCOME) -> float:
    """Probability that the decoded estimate equals ``target`` exactly."""
    probs = inverse_qft_all(build_phase_state(f, z, params), params, sign).probabilities()
    target = np.asarray(target, dtype=float)
    grids = np.indices(probs.shape).reshape(params.n, -1).T
    est = decode(grids, params, zero_outcome)
    hit = np.all(np.abs(est - target) <= 1e-12 * max(1.0, params.G), axis=1)
    return float(probs.ravel()[hit].sum())


_CANDIDATES = {"0": lambda N: 0, "2^(b-1)": lambda N: N // 2}
_WINDOWS = {"0": "[-2^(b-1), 2^(b-1))", "2^(b-1)": "[0, 2^b)"}


def calibrate(bits=(2, 3, 4), sign: int = TRANSFORM_SIGN) -> CalibrationRecord:
    """Find the zero-gradient outcome under which linear losses decode exactly.

    For every width ``b`` and every on-grid slope ``g = 2G k / 2^b`` with
    ``k`` in ``[-2^(b-1), 2^(b-1))``, each candidate zero outcome is accepted
    only if it recovers all slopes with probability 1. The record passes when
    the accepted candidate is the one frozen in ``ZERO_OUTCOME``.
    """
    G = 1.0
    z = np.zeros(1)
    worst_seen = 0.0
    for rule, m0_of in _CANDIDATES.items():
        worst = 1.0
        for b in bits:
            params = QGradParams.from_bits(1, G, b, b + 2)
            N = 2**b
            for k in range(-N // 2, N // 2):
                g = 2 * G * k / N
                f = linear([g], lipschitz=G)
                worst = min(worst, exact_recovery_probability(f, z, params, [g], sign, m0_of(N)))
        worst_seen = max(worst_seen, worst)
        if worst >= 1 - 1e-9:
            passed = sign == TRANSFORM_SIGN and all(m0_of(2**b) == ZERO_OUTCOME for b in bits)
            return CalibrationRecord(sign, rule, _WINDOWS[rule], tuple(bits), worst, passed)
    return CalibrationRecord(sign, None, None, tuple(bits), worst_seen, False)
