"""Two-photon Dicke-Stark model: mean field, fluctuations, exact diagonalization,
trapped-ion mapping and drive dynamics."""

from .errors import *  # noqa: F401,F403
from .model import (
    ModelParams,
    PhaseLabel,
    classify_phase,
    collapse_coupling,
    critical_rabi,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "PhaseLabel",
    "classify_phase",
    "collapse_coupling",
    "critical_rabi",
    "__version__",
]
