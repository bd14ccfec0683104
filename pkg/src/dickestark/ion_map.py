"""Trapped-ion realization: drive parameters <-> model parameters.

Three lasers act on each ion: red and blue second sidebands at
``omega_0 -/+ 2 omega + delta_{r,b}`` and a resonant carrier with Rabi
frequency ``Omega_S``. After the Lamb-Dicke expansion, a rotation at
``Omega sigma_x / 2`` and a rotating frame at ``omega_c`` for the phonons,
the single-ion Hamiltonian becomes the two-photon Rabi-Stark model with

    U       = eta^2 Omega_S / 2
    lambda  = (eta^2 Omega_r / 8) (1 - 2 epsilon_S),   epsilon_S = Omega_S / omega
    omega_q = -Omega_0 - Omega,                          Omega_0 = Omega_S (1 - eta^2 / 2)

and ``g = N lambda`` for ``N`` ions, provided the blue Rabi frequency is
balanced, ``Omega_b = Omega_r (1 - 2 eps) / (1 + 2 eps)``.

Detuning convention
-------------------
The pair operators ``a^2`` and ``a^dag^2`` rotate at ``-/+ 2 omega_c`` in the
phonon frame, so a static two-photon term needs

    delta_r = Omega + 2 omega_c,    delta_b = Omega - 2 omega_c.

With ``Omega +/- omega_c`` the phonons come out at ``omega_c / 2``; full-drive
simulations (see :mod:`dickestark.dynamics`) confirm the factor of two.
:data:`PAIR_DETUNING_FACTOR` holds it.

All frequencies are angular (rad per ms when built from kHz literals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .config import Field, format_config, parse_config, parse_float, parse_int
from .errors import (
    DegenerateBalance,
    Infeasible,
    InconsistentDetunings,
    InvalidParameters,
)
from .model import ModelParams

__all__ = [
    "TWO_PI",
    "PAIR_DETUNING_FACTOR",
    "RABI_CEILING",
    "IonDriveParams",
    "Check",
    "MappedModel",
    "forward_map",
    "balanced_blue_rabi",
    "inverse_map",
    "rwa_diagnostics",
    "drive_to_config",
    "drive_from_config",
    "DRIVE_SCHEMA",
]

TWO_PI = 2 * math.pi
PAIR_DETUNING_FACTOR = 2
RABI_CEILING = TWO_PI * 500.0  # 2 pi x 500 kHz
ETA_MAX = 0.3
DETUNING_RTOL = 1e-9

# diagnostic thresholds (ratios)
RABI_RATIO_MAX = 0.1
DETUNING_RATIO_MAX = 0.1
BREATHING_MARGIN_MIN = 0.1
LAMB_DICKE_PASS = 0.3
LAMB_DICKE_MARGINAL = 0.6
BALANCE_RTOL = 1e-3


def _khz(x):
    return TWO_PI * x


@dataclass(frozen=True)
class IonDriveParams:
    """Laser-level parameters of the three-drive scheme (angular frequencies).

    ``Omega_big`` is the frequency of the ``sigma_x`` rotating frame.
    ``eta = 0`` is allowed so that the recoil-free limit can be evaluated.
    """

    eta: float
    omega_trap: float
    Omega_r: float
    Omega_b: float
    Omega_S: float
    Omega_big: float
    delta_r: float
    delta_b: float
    N_ions: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "N_ions":
                if isinstance(v, bool) or int(v) != v or v < 1:
                    raise InvalidParameters(f"N_ions must be a positive integer, got {v!r}")
                object.__setattr__(self, "N_ions", int(v))
            else:
                v = float(v)
                if not math.isfinite(v):
                    raise InvalidParameters(f"{f.name} must be finite")
                object.__setattr__(self, f.name, v)
        if not 0 <= self.eta <= ETA_MAX:
            raise InvalidParameters(f"eta must lie in [0, {ETA_MAX}], got {self.eta}")
        if self.omega_trap <= 0:
            raise InvalidParameters("omega_trap must be positive")
        for name in ("Omega_r", "Omega_b", "Omega_S"):
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} must be non-negative")

    @classmethod
    def from_2pi_khz(
        cls,
        eta,
        omega_trap,
        Omega_r,
        Omega_b,
        Omega_S,
        Omega_big,
        delta_r,
        delta_b,
        N_ions=1,
    ) -> "IonDriveParams":
        """Build from ``2 pi x kHz`` literals, e.g. ``omega_trap=4980`` for 2 pi x 4.98 MHz."""
        return cls(
            eta,
            _khz(omega_trap),
            _khz(Omega_r),
            _khz(Omega_b),
            _khz(Omega_S),
            _khz(Omega_big),
            _khz(delta_r),
            _khz(delta_b),
            N_ions,
        )

    @property
    def epsilon_S(self) -> float:
        return self.Omega_S / self.omega_trap

    @property
    def Omega_0(self) -> float:
        """Carrier Rabi frequency dressed by the Debye-Waller factor."""
        return self.Omega_S * (1 - self.eta**2 / 2)

    @property
    def omega_c(self) -> float:
        """Phonon frequency in the final frame, read from the detuning splitting."""
        return (self.delta_r - self.delta_b) / (2 * PAIR_DETUNING_FACTOR)

    def replace(self, **changes) -> "IonDriveParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class Check:
    """One validity diagnostic: ``value`` compared against ``threshold``."""

    name: str
    value: float
    threshold: float
    status: str  # "pass" | "marginal" | "fail"
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class MappedModel:
    """Model parameters realized by a drive, in angular units.

    ``lam`` is the single-ion two-photon coupling; ``lam_imbalance`` is the
    coefficient of the unwanted ``i sigma_y (a^2 - a^dag^2)`` term left over
    when ``Omega_b`` is not balanced (zero when it is).
    """

    params: ModelParams
    epsilon_S: float
    lam: float
    lam_imbalance: float
    drive: IonDriveParams
    diagnostics: tuple = field(default_factory=tuple)

    def dimensionless(self) -> ModelParams:
        return self.params.normalized()

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.diagnostics)


def balanced_blue_rabi(Omega_r: float, epsilon_S: float) -> float:
    """``Omega_b = Omega_r (1 - 2 eps) / (1 + 2 eps)``, which cancels the Stark-induced imbalance."""
    if epsilon_S >= 0.5:
        raise DegenerateBalance(f"epsilon_S = {epsilon_S:g} >= 1/2 leaves no balanced Omega_b")
    if epsilon_S < 0:
        raise InvalidParameters("epsilon_S must be non-negative")
    return Omega_r * (1 - 2 * epsilon_S) / (1 + 2 * epsilon_S)


def forward_map(drive: IonDriveParams, target_omega_c: float | None = None, n_bar: float = 0.0) -> MappedModel:
    """Model parameters produced by ``drive``.

    ``omega_c`` is read from the detunings. When ``target_omega_c`` is given,
    the detunings must reproduce it to ``1e-9`` relative.

    Raises
    ------
    InconsistentDetunings
        Detunings not centred on ``Omega_big`` or not matching ``target_omega_c``.
    """
    d = drive
    scale = max(abs(d.delta_r), abs(d.delta_b), abs(d.Omega_big), 1e-300)
    centre = (d.delta_r + d.delta_b) / 2
    if abs(centre - d.Omega_big) > DETUNING_RTOL * scale:
        raise InconsistentDetunings(
            f"(delta_r + delta_b)/2 = {centre:g} differs from Omega = {d.Omega_big:g}"
        )
    omega_c = d.omega_c
    if target_omega_c is not None:
        want = 2 * PAIR_DETUNING_FACTOR * target_omega_c
        got = d.delta_r - d.delta_b
        if abs(got - want) > DETUNING_RTOL * max(abs(want), 1e-300):
            raise InconsistentDetunings(
                f"delta_r - delta_b = {got:g} but {2 * PAIR_DETUNING_FACTOR} omega_c = {want:g}"
            )
        omega_c = float(target_omega_c)
    if omega_c <= 0:
        raise InconsistentDetunings(f"detunings give non-positive omega_c = {omega_c:g}")

    eps = d.epsilon_S
    U = d.eta**2 * d.Omega_S / 2
    lam = d.eta**2 * d.Omega_r / 8 * (1 - 2 * eps)
    c_r = d.eta**2 * d.Omega_r / 16 * (1 - 2 * eps)
    c_b = d.eta**2 * d.Omega_b / 16 * (1 + 2 * eps)
    omega_q = -d.Omega_0 - d.Omega_big
    try:
        params = ModelParams(omega_q=omega_q, g=d.N_ions * lam, U=U, N=d.N_ions, omega_c=omega_c)
    except InvalidParameters as exc:
        raise InconsistentDetunings(f"drive does not realize a valid model: {exc}") from None
    return MappedModel(
        params=params,
        epsilon_S=eps,
        lam=lam,
        lam_imbalance=c_r - c_b,
        drive=d,
        diagnostics=tuple(rwa_diagnostics(d, n_bar=n_bar)),
    )


def inverse_map(
    target: ModelParams,
    eta: float,
    omega_trap: float,
    N_ions: int | None = None,
    rabi_ceiling: float = RABI_CEILING,
) -> IonDriveParams:
    """Drive that realizes ``target`` (angular units) on ``N_ions`` ions.

    ``N_ions`` defaults to ``target.N`` and must equal it.

    Raises
    ------
    Infeasible
        Named after the binding constraint: ``"eta"``, ``"Omega_S"``,
        ``"epsilon_S"``, ``"Omega_r"`` or ``"Omega_b"``.
    """
    target.require_well_posed()
    n_ions = target.N if N_ions is None else int(N_ions)
    if n_ions != target.N:
        raise InvalidParameters(f"N_ions = {n_ions} differs from target N = {target.N}")
    if not 0 < eta <= ETA_MAX:
        raise Infeasible("eta", f"eta = {eta:g} outside (0, {ETA_MAX}]")
    if target.U < 0:
        raise Infeasible("Omega_S", "negative U needs a negative carrier Rabi frequency")
    Omega_S = 2 * target.U / eta**2
    if Omega_S > rabi_ceiling:
        raise Infeasible("Omega_S", f"Omega_S = {Omega_S:g} exceeds ceiling {rabi_ceiling:g}")
    eps = Omega_S / omega_trap
    if eps >= 0.5:
        raise Infeasible("epsilon_S", f"epsilon_S = {eps:g} >= 1/2")
    lam = target.g / n_ions
    Omega_r = 8 * lam / (eta**2 * (1 - 2 * eps))
    if Omega_r > rabi_ceiling:
        raise Infeasible("Omega_r", f"Omega_r = {Omega_r:g} exceeds ceiling {rabi_ceiling:g}")
    Omega_b = balanced_blue_rabi(Omega_r, eps)
    Omega_0 = Omega_S * (1 - eta**2 / 2)
    Omega = -(Omega_0 + target.omega_q)
    shift = PAIR_DETUNING_FACTOR * target.omega_c
    return IonDriveParams(
        eta=eta,
        omega_trap=omega_trap,
        Omega_r=Omega_r,
        Omega_b=Omega_b,
        Omega_S=Omega_S,
        Omega_big=Omega,
        delta_r=Omega + shift,
        delta_b=Omega - shift,
        N_ions=n_ions,
    )


def _status(ok, marginal=False):
    return "pass" if ok else ("marginal" if marginal else "fail")


def rwa_diagnostics(drive: IonDriveParams, n_bar: float = 0.0) -> list[Check]:
    """Margins of the approximations behind the effective model.

    * ``rabi_vs_trap``: ``max(Omega_r, Omega_b, Omega_S) / omega`` below 0.1.
    * ``detuning_vs_trap``: ``max |delta_{r,b}| / omega`` below 0.1.
    * ``breathing_mode``: smallest distance, in units of ``omega``, between a
      sideband drive offset (``-2 omega + delta_r``, ``2 omega + delta_b``)
      and a breathing-mode sideband at ``+/- sqrt(3) omega`` or
      ``+/- 2 sqrt(3) omega``; must exceed 0.1.
    * ``lamb_dicke``: ``eta sqrt(n_bar + 1)``; pass below 0.3, marginal below 0.6.
    * ``blue_balance``: relative deviation of ``Omega_b`` from the balanced value.
    """
    d = drive
    w = d.omega_trap
    checks = []
    rabi = max(d.Omega_r, d.Omega_b, d.Omega_S) / w
    checks.append(Check("rabi_vs_trap", rabi, RABI_RATIO_MAX, _status(rabi < RABI_RATIO_MAX)))
    det = max(abs(d.delta_r), abs(d.delta_b)) / w
    checks.append(Check("detuning_vs_trap", det, DETUNING_RATIO_MAX, _status(det < DETUNING_RATIO_MAX)))

    w2 = math.sqrt(3) * w
    resonances = (w2, -w2, 2 * w2, -2 * w2)
    offsets = {"red": -2 * w + d.delta_r, "blue": 2 * w + d.delta_b}
    margin, worst = math.inf, ""
    for label, off in offsets.items():
        for res in resonances:
            dist = abs(off - res) / w
            if dist < margin:
                margin, worst = dist, f"{label} drive vs breathing sideband at {res / w:+.4f} omega"
    checks.append(
        Check("breathing_mode", margin, BREATHING_MARGIN_MIN, _status(margin > BREATHING_MARGIN_MIN), worst)
    )

    ld = d.eta * math.sqrt(n_bar + 1)
    checks.append(
        Check("lamb_dicke", ld, LAMB_DICKE_PASS, _status(ld < LAMB_DICKE_PASS, ld < LAMB_DICKE_MARGINAL))
    )

    eps = d.epsilon_S
    if eps < 0.5 and d.Omega_r > 0:
        want = balanced_blue_rabi(d.Omega_r, eps)
        dev = abs(d.Omega_b - want) / want
    else:
        dev = 0.0 if d.Omega_r == d.Omega_b == 0 else math.inf
    checks.append(Check("blue_balance", dev, BALANCE_RTOL, _status(dev < BALANCE_RTOL)))
    return checks


# config I/O -----------------------------------------------------------------

DRIVE_SCHEMA = {
    "eta": Field(parse_float, None, "Lamb-Dicke parameter"),
    "omega_trap_2pi_khz": Field(parse_float, None, "trap (COM) frequency"),
    "Omega_r_2pi_khz": Field(parse_float, None, "red second-sideband Rabi frequency"),
    "Omega_b_2pi_khz": Field(parse_float, None, "blue second-sideband Rabi frequency"),
    "Omega_S_2pi_khz": Field(parse_float, None, "carrier Rabi frequency"),
    "Omega_2pi_khz": Field(parse_float, None, "sigma_x frame frequency"),
    "delta_r_2pi_khz": Field(parse_float, None, "red detuning"),
    "delta_b_2pi_khz": Field(parse_float, None, "blue detuning"),
    "N_ions": Field(parse_int, 1, "number of ions"),
}

_DRIVE_KEYS = {
    "eta": "eta",
    "omega_trap_2pi_khz": "omega_trap",
    "Omega_r_2pi_khz": "Omega_r",
    "Omega_b_2pi_khz": "Omega_b",
    "Omega_S_2pi_khz": "Omega_S",
    "Omega_2pi_khz": "Omega_big",
    "delta_r_2pi_khz": "delta_r",
    "delta_b_2pi_khz": "delta_b",
    "N_ions": "N_ions",
}


def drive_to_config(drive: IonDriveParams) -> str:
    values = {}
    for key, attr in _DRIVE_KEYS.items():
        v = getattr(drive, attr)
        values[key] = v / TWO_PI if key.endswith("_2pi_khz") else v
    return format_config(values, header="trapped-ion drive, frequencies in 2 pi x kHz")


def drive_from_config(text: str) -> IonDriveParams:
    from .errors import ConfigError

    values = parse_config(text, DRIVE_SCHEMA)
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    kwargs = {}
    for key, attr in _DRIVE_KEYS.items():
        v = values[key]
        kwargs[attr] = v * TWO_PI if key.endswith("_2pi_khz") else v
    try:
        return IonDriveParams(**kwargs)
    except InvalidParameters as exc:
        raise ConfigError(str(exc)) from None
