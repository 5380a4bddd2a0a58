"""
One quantum gradient estimate, step by step
===========================================

Builds the phase state for a small quadratic, applies the per-register
Fourier transform, looks at the outcome distribution and decodes a sample.
"""

import numpy as np

from qocolab import losses, qgrad
from qocolab.harness.bounds import lemma1_bound
from qocolab.ogd import Schedule

rng = np.random.default_rng(0)

# a loss on the unit square and the round-1 radii of the general schedule
f = losses.quadratic([0.3, 0.8], s=1.0, lipschitz=2.0)
sched = Schedule("general_quantum", D=np.sqrt(2), G=2.0, n=2, T=1, rho=0.1, p=0.1)
eta, r, r_prime = sched.params_at(1)
params = qgrad.derive_params(2, 2.0, 0.1, 0.1, r, r_prime)
print(f"beta={params.beta:.4f}  b={params.b}  c={params.c}  amplitudes={params.size}")

# sample z near the decision and build the state the oracle sandwich leaves behind
x = np.array([0.5, 0.5])
z = x + rng.uniform(-r, r, 2)
state = qgrad.build_phase_state(f, z, params)
print("state norm", state.norm())

# the transform concentrates probability near N * grad / (2G)
probs = qgrad.inverse_qft_all(state).probabilities()
top = np.argsort(probs.ravel())[::-1][:5]
for flat in top:
    m = tuple(int(v) for v in np.unravel_index(flat, probs.shape))
    print("outcome", m, "prob %.4f" % probs.ravel()[flat], "decodes to", qgrad.decode(m, params))

# a full estimate, compared with the true gradient at the sampled point
est = qgrad.estimate_gradient_q(f, x, r, r_prime, 0.1, 0.1, rng)
err = np.abs(f.gradient(est.z) - est.grad).sum()
print("estimate", est.grad, "exact", f.gradient(est.z))
print(f"L1 error {err:.3e} against threshold {lemma1_bound(est.params):.3f}; queries {est.queries}")
