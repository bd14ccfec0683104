"""Model parameters and mean-field phase boundaries of the two-photon Dicke-Stark model.

The Hamiltonian is

    H = omega_c a^dag a + omega_q J_z + (g/N)(J_+ + J_-)(a^2 + a^dag^2) + U a^dag a J_z

with all frequencies measured in units of ``omega_c`` unless a caller chooses
otherwise (the ion mapping uses angular kHz with the same dataclass).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import IllPosed, InvalidParameters, NegativeDiscriminant

__all__ = [
    "ModelParams",
    "PhaseLabel",
    "critical_rabi",
    "collapse_coupling",
    "classify_phase",
]


@dataclass(frozen=True)
class ModelParams:
    """The five numbers defining the model.

    Parameters
    ----------
    omega_c : float
        Cavity (bosonic mode) frequency, > 0.
    omega_q : float
        Qubit splitting, >= 0.
    g : float
        Collective two-photon Rabi coupling, >= 0.
    U : float
        Stark coupling.
    N : int
        Number of qubits, >= 1.

    Basic sign/range constraints are enforced on construction. Well-posedness
    (``U * N < 2 * omega_c``) is reported by :attr:`well_posed` and enforced by
    :meth:`require_well_posed`, since the collapse boundary is still meaningful
    (zero) exactly at ``U * N = 2 * omega_c``.
    """

    omega_q: float = 0.015
    g: float = 0.0
    U: float = 0.0
    N: int = 50
    omega_c: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise InvalidParameters(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("omega_c", "omega_q", "g", "U"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameters(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.omega_c <= 0:
            raise InvalidParameters(f"omega_c must be positive, got {self.omega_c}")
        if self.omega_q < 0:
            raise InvalidParameters(f"omega_q must be non-negative, got {self.omega_q}")
        if self.g < 0:
            raise InvalidParameters(f"g must be non-negative, got {self.g}")
        if self.N < 1:
            raise InvalidParameters(f"N must be >= 1, got {self.N}")

    @property
    def well_posed(self) -> bool:
        return self.U * self.N < 2.0 * self.omega_c

    def require_well_posed(self) -> "ModelParams":
        if not self.well_posed:
            raise IllPosed(
                f"U*N = {self.U * self.N:g} must be below 2*omega_c = {2 * self.omega_c:g}"
            )
        return self

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def normalized(self) -> "ModelParams":
        """Same physics with every frequency divided by ``omega_c``."""
        w = self.omega_c
        return ModelParams(
            omega_q=self.omega_q / w, g=self.g / w, U=self.U / w, N=self.N, omega_c=1.0
        )


class PhaseLabel(str, enum.Enum):
    NORMAL = "NormalPhase"
    SUPERRADIANT = "SuperradiantPhase"
    COLLAPSE = "CollapseRegion"

    def __str__(self):
        return self.value


def critical_rabi(params: ModelParams) -> float:
    """Coupling ``g_t`` at which the normal phase loses stability.

    ``g_t = sqrt(omega_c omega_q N - U omega_q N^2 / 2) / 2``
    """
    p = params
    radicand = p.omega_c * p.omega_q * p.N - p.U * p.omega_q * p.N**2 / 2.0
    if radicand < 0:
        raise NegativeDiscriminant(
            f"g_t undefined: omega_c*omega_q*N - U*omega_q*N^2/2 = {radicand:g} < 0"
        )
    return math.sqrt(radicand) / 2.0


def collapse_coupling(params: ModelParams) -> float:
    """Coupling ``g_c = sqrt(omega_c^2 - U^2 N^2 / 4) / 2`` where the spectrum collapses."""
    p = params
    radicand = p.omega_c**2 - (p.U * p.N) ** 2 / 4.0
    if radicand < 0:
        raise NegativeDiscriminant(
            f"g_c undefined: omega_c^2 - U^2 N^2/4 = {radicand:g} < 0"
        )
    return math.sqrt(radicand) / 2.0


def classify_phase(params: ModelParams) -> PhaseLabel:
    """Mean-field phase of ``params``.

    Ties go to the higher phase: ``g == g_t`` is superradiant and ``g == g_c``
    is collapse.
    """
    params.require_well_posed()
    if params.g >= collapse_coupling(params):
        return PhaseLabel.COLLAPSE
    if params.g >= critical_rabi(params):
        return PhaseLabel.SUPERRADIANT
    return PhaseLabel.NORMAL
