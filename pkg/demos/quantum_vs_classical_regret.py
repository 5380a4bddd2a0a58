"""
Quantum and classical players against the same losses
=====================================================

Both players face one oblivious sequence of quadratics. The quantum player
spends 4 queries per round, the classical one 2n.
"""

import numpy as np

from qocolab.harness.config import parse_config
from qocolab.harness.trials import run_one

n, T = 2, 64
base = {
    "geometry": {"kind": "box", "n": n, "low": 0.0, "high": 1.0},
    "adversary": {"power": "oblivious", "family": "quadratic", "parameters": {"s": 1.0, "seed": 11}},
    "runtime": {"seed": 5},
}
quantum = dict(base, schedule={"variant": "general_quantum", "T": T, "rho": 0.05, "p": 0.05},
               estimator="quantum")
classical = dict(base, schedule={"variant": "general_classical", "T": T, "delta": 0.1},
                 estimator="classical")

for name, cfg in (("quantum", quantum), ("classical", classical)):
    tr, rep = run_one(parse_config(cfg))
    print(f"{name:9s} regret {rep.regret:7.4f}  certified bound {rep.bound_value:8.2f}  "
          f"queries {rep.total_queries:5d}  final x {np.round(tr.x[-1], 3)}")

# the comparator is the same point for both, since the losses are the same
