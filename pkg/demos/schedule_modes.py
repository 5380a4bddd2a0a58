"""
The two r' schedules side by side
=================================

``paper_literal`` keeps the per-round gradient-error threshold flat, while
``proof_consistent`` lets it decay as 1/sqrt(t). The register width b grows
in the second mode, which is what makes faithful runs expensive at n >= 2.
"""

from qocolab import qgrad
from qocolab.harness.bounds import quantum_round_error, schedule_chain
from qocolab.ogd import Schedule

n, G, T = 2, 1.0, 256
for mode in ("paper_literal", "proof_consistent"):
    s = Schedule("general_quantum", D=1.5, G=G, n=n, T=T, rho=0.05, p=0.05, r_prime_mode=mode)
    print(mode)
    for t in (1, 4, 16, 64, 256):
        eta, r, rp = s.params_at(t)
        b = qgrad.derive_params(n, G, s.rho, s.p, r, rp, memory_guard=2**64).b
        print(f"  t={t:3d}  r'={rp:.3e}  threshold={quantum_round_error(n, G, s.rho, s.p, r, rp):.4f}  b={b}")
    print(f"  certified chain over T={T}: {schedule_chain(s):.2f}")
