"""Online convex optimization with zeroth-order (quantum and classical) gradient estimates."""

from .geometry import Box, EuclideanBall, FeasibleSet, make_set, project
from .losses import Adversary, DomainError, LossOracle
from .ogd import Schedule, Transcript, run_game, step
from .qgrad import MemoryGuardError, QGradParams, derive_params, estimate_gradient_q
from .cgrad import estimate_gradient_c

__version__ = "0.1.0"
