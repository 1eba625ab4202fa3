"""Monte Carlo simulation of a threshold-detection local hidden-variable model
of a four-qubit Mermin-Peres magic-square experiment with post-selection."""

__version__ = "0.1.0"

from .estimators import (  # noqa: E402
    ModelParams,
    SweepPoint,
    TermCounts,
    run_sweep,
    run_sweep_point,
)
from .oracle import ideal_witnesses, psi_1234  # noqa: E402

__all__ = [
    "ModelParams",
    "SweepPoint",
    "TermCounts",
    "ideal_witnesses",
    "psi_1234",
    "run_sweep",
    "run_sweep_point",
]
