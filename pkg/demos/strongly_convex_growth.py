"""
Regret against a chasing adversary
==================================

Each loss is centred just beside the point the player just chose. With the
strongly convex schedule, regret should grow roughly like log T.
"""

import numpy as np

from qocolab.harness.config import parse_config
from qocolab.harness.trials import run_trials

cfg = {
    "geometry": {"kind": "box", "n": 1, "low": 0.0, "high": 1.0},
    "adversary": {"power": "completely_adaptive", "family": "quadratic",
                  "parameters": {"s": 1.0, "offset": [0.25]}},
    "schedule": {"variant": "strongly_convex_quantum", "T": 16, "alpha": 1.0, "rho": 0.01, "p": 0.01},
    "estimator": "quantum",
}

for T in (16, 32, 64, 128):
    cfg["schedule"]["T"] = T
    agg = run_trials(parse_config(cfg), 10, 0).aggregate()
    print(f"T={T:4d}  mean regret {agg['mean_regret']:.4f}  regret/log T {agg['mean_regret'] / np.log(T):.4f}  "
          f"bound held {agg['success_fraction']:.2f}")
