"""Quantum fluctuations above mean field.

The spin fluctuation mode ``d`` (Holstein-Primakoff boson displaced by the
order parameter) obeys a quadratic Hamiltonian in each phase once the cavity
is projected onto its squeezed vacuum. This module builds those quadratic
forms, diagonalizes them, and turns the squeezing into collective-spin
means and variances.

Quadrature conventions: ``X = (d + d^dag)/2``, ``P = (d - d^dag)/(2i)``,
vacuum variance 1/4, and for squeezing parameter ``r``

    var X = exp(-2 r) / 4,    var P = exp(2 r) / 4,

so ``r < 0`` means ``P`` is the squeezed quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import optimize

from .errors import BogoliubovUnstable, DomainError, WrongPhase
from .meanfield import order_parameter_closed_form
from .model import ModelParams, PhaseLabel, classify_phase

__all__ = [
    "PAIR",
    "QUADRATURE",
    "QuadraticBosonForm",
    "BogoliubovResult",
    "SpEffectiveParams",
    "SpinMoments",
    "bogoliubov_diagonalize",
    "quadrature_variances",
    "np_effective",
    "np_squeezing",
    "sp_effective",
    "sp_squeezing",
    "spin_moments",
]

PAIR = "pair"  # lam * (d^2 + d^dag^2)
QUADRATURE = "quadrature"  # lam * (d + d^dag)^2

LINEAR_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class QuadraticBosonForm:
    """``omega d^dag d + lam * shape + constant`` for one bosonic mode."""

    omega: float
    lam: float
    constant: float = 0.0
    shape: str = PAIR

    def __post_init__(self):
        if self.shape not in (PAIR, QUADRATURE):
            raise ValueError(f"shape must be {PAIR!r} or {QUADRATURE!r}, got {self.shape!r}")

    def to_pair(self) -> "QuadraticBosonForm":
        # (d + d^dag)^2 = d^2 + d^dag^2 + 2 d^dag d + 1
        if self.shape == PAIR:
            return self
        return QuadraticBosonForm(
            self.omega + 2 * self.lam, self.lam, self.constant + self.lam, PAIR
        )

    def to_quadrature(self) -> "QuadraticBosonForm":
        if self.shape == QUADRATURE:
            return self
        return QuadraticBosonForm(
            self.omega - 2 * self.lam, self.lam, self.constant - self.lam, QUADRATURE
        )

    @property
    def stable(self) -> bool:
        p = self.to_pair()
        return p.omega > 0 and abs(2 * p.lam) < p.omega


@dataclass(frozen=True)
class BogoliubovResult:
    excitation_energy: float
    squeeze_r: float
    ground_shift: float


def bogoliubov_diagonalize(form: QuadraticBosonForm) -> BogoliubovResult:
    """Diagonalize a single-mode quadratic form.

    In pair shape ``omega n + lam (d^2 + d^dag^2) + c`` the result is
    ``eps (n' + 1/2) - omega/2 + c`` with ``eps = sqrt(omega^2 - 4 lam^2)``
    and ``tanh(2 r) = 2 lam / omega``.

    Raises
    ------
    BogoliubovUnstable
        If ``|2 lam| >= omega``.
    """
    p = form.to_pair()
    if p.omega <= 0 or abs(2 * p.lam) >= p.omega:
        raise BogoliubovUnstable(
            f"|2 lam| = {abs(2 * p.lam):g} >= omega = {p.omega:g} after normal-form reduction"
        )
    eps = math.sqrt((p.omega - 2 * p.lam) * (p.omega + 2 * p.lam))
    r = 0.5 * math.atanh(2 * p.lam / p.omega)
    return BogoliubovResult(eps, r, (eps - p.omega) / 2 + p.constant)


def quadrature_variances(r: float) -> tuple[float, float]:
    """``(var X, var P)`` of the squeezed vacuum with parameter ``r``."""
    return math.exp(-2 * r) / 4, math.exp(2 * r) / 4


def _require(params, phase):
    got = classify_phase(params)
    if got is not phase:
        raise WrongPhase(f"expected {phase}, parameters are in {got}")


def np_effective(params: ModelParams) -> QuadraticBosonForm:
    """Normal-phase effective Hamiltonian for the spin fluctuation mode.

    ``H_NP = omega_q d^dag d - 2 g^2 / (N (2 omega_c - N U)) (d + d^dag)^2 - omega_q N / 2``

    The quadrature coefficient comes from eliminating virtual photon pairs at
    second order; its ``1/N`` makes the gap close exactly at ``g_t``.
    """
    p = params.require_well_posed()
    _require(p, PhaseLabel.NORMAL)
    lam = -2 * p.g**2 / (p.N * (2 * p.omega_c - p.N * p.U))
    return QuadraticBosonForm(p.omega_q, lam, -p.omega_q * p.N / 2, QUADRATURE)


def np_squeezing(params: ModelParams) -> float:
    """``r = ln(1 - 8 g^2 / (omega_q N (2 omega_c - U N))) / 4``; never positive."""
    p = params.require_well_posed()
    if p.omega_q == 0:
        # g_t = 0 here, so there is no normal phase to squeeze
        raise DomainError("squeezing undefined for omega_q = 0")
    _require(p, PhaseLabel.NORMAL)
    arg = 1 - 8 * p.g**2 / (p.omega_q * p.N * (2 * p.omega_c - p.U * p.N))
    if arg <= 0:
        raise DomainError(f"log argument {arg:g} <= 0")
    return 0.25 * math.log(arg)


@dataclass(frozen=True)
class SpEffectiveParams:
    """Coefficients of the superradiant-phase fluctuation Hamiltonian.

    All ``lambda*`` and ``omega*`` are in units of ``energy_scale = 2 omega_c'``
    (the Hamiltonian is divided by it before the cavity squeezing).

    ``beta_meanfield`` is the minimizer of ``E_G``. ``alpha`` is the value
    actually used; it differs from ``beta_meanfield / sqrt(N)`` only when the
    linear term at the mean-field point exceeded ``LINEAR_RESIDUAL_TOL`` and
    ``alpha`` was re-solved to cancel it (``resolved`` is then True). Both
    residuals are kept.
    """

    alpha: float
    chi: float
    delta: float
    omega_c_prime: float
    x: float
    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float
    lambda6: float
    alpha_prime: float
    omega1: float
    omega2: float
    beta_meanfield: float
    residual_meanfield: float
    residual: float
    resolved: bool = False

    @property
    def r_a(self) -> float:
        return self.x / 2

    @property
    def energy_scale(self) -> float:
        return 2 * self.omega_c_prime



def _sp_coefficients(p: ModelParams, alpha: float) -> dict:
    N = p.N
    beta = alpha * math.sqrt(N)
    chi = math.sqrt(1 - alpha**2)
    delta = 1 - beta**2 / (N - beta**2)
    wcp = p.omega_c + p.U * beta**2 - p.U * N / 2
    arg = p.g * alpha / (wcp * N * chi) + 4 * p.g * alpha * chi / wcp
    if wcp <= 0 or abs(arg) >= 1:
        raise BogoliubovUnstable(f"cavity squeezing argument {arg:g} outside (-1, 1)")
    x = math.atanh(arg)
    ch, sh = math.cosh(x), math.sinh(x)
    lam0 = ch - arg * sh
    lam1 = (p.omega_q - p.U / 2) * N * alpha / (2 * wcp)
    lam2 = p.g * chi * delta / wcp * ch - alpha * p.U * N / (2 * wcp) * sh
    lam3 = -2 * p.g * chi * delta / wcp * sh + alpha * p.U * N / wcp * ch
    lam4 = p.omega_q * N / (2 * wcp)
    lam5 = p.U * N / wcp * ch
    lam6 = p.U * N / (2 * wcp) * sh
    ap = alpha / (2 * chi) + alpha**3 / (4 * chi**3)
    w1 = lam4 / N + p.g * alpha / (2 * wcp * chi * N) * sh + lam5 / (4 * N) - p.U / (4 * wcp)
    w2 = p.g * ap / (2 * wcp * N) * sh - lam2**2 / (2 * N * lam0)
    return dict(
        alpha=alpha, chi=chi, delta=delta, omega_c_prime=wcp, x=x,
        lambda0=lam0, lambda1=lam1, lambda2=lam2, lambda3=lam3, lambda4=lam4,
        lambda5=lam5, lambda6=lam6, alpha_prime=ap, omega1=w1, omega2=w2,
    )


def _linear_residual(c: dict) -> float:
    # (d + d^dag) coefficient after projecting <K0'> = 1/4
    return c["lambda1"] + c["lambda3"] / 4


def sp_effective(params: ModelParams, beta: float | None = None):
    """Superradiant-phase effective Hamiltonian ``lambda0/4 + omega1 n + omega2 (d + d^dag)^2``.

    Parameters
    ----------
    params : ModelParams
        Must be in the superradiant phase.
    beta : float, optional
        Order parameter; defaults to the closed-form mean-field value.

    Returns
    -------
    (SpEffectiveParams, QuadraticBosonForm)
        The form is in units of ``2 omega_c'``.
    """
    p = params.require_well_posed()
    _require(p, PhaseLabel.SUPERRADIANT)
    if beta is None:
        beta = order_parameter_closed_form(p)
    alpha0 = abs(beta) / math.sqrt(p.N)
    if not 0 < alpha0 < 1:
        raise DomainError(f"alpha = beta/sqrt(N) = {alpha0:g} must lie in (0, 1)")
    c = _sp_coefficients(p, alpha0)
    res0 = _linear_residual(c)
    res = res0
    resolved = abs(res0) > LINEAR_RESIDUAL_TOL
    if resolved:
        alpha = _resolve_alpha(p, alpha0)
        c = _sp_coefficients(p, alpha)
        res = _linear_residual(c)
    sp = SpEffectiveParams(
        **c, beta_meanfield=abs(beta), residual_meanfield=res0, residual=res, resolved=resolved
    )
    form = QuadraticBosonForm(sp.omega1, sp.omega2, sp.lambda0 / 4, QUADRATURE)
    return sp, form


def _resolve_alpha(p, alpha0):
    def f(a):
        return _linear_residual(_sp_coefficients(p, a))

    f0 = f(alpha0)
    # expand a bracket geometrically around the mean-field value
    # close to g_t the root can sit several times away from alpha0 because
    # the mean-field value goes to zero faster than the residual does
    for width in (1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4):
        lo, hi = alpha0 / (1 + width), min(alpha0 * (1 + width), 1 - 1e-9)
        for other in (lo, hi):
            try:
                fo = f(other)
            except BogoliubovUnstable:
                continue
            if fo * f0 < 0:
                a, b = sorted((alpha0, other))
                return optimize.brentq(f, a, b, xtol=1e-15)
    raise DomainError("no alpha near the mean-field value cancels the linear term")


def sp_squeezing(params: ModelParams, beta: float | None = None) -> float:
    """Squeezing of the superradiant fluctuation vacuum, ``ln(1 + 4 omega2/omega1) / 4``."""
    _, form = sp_effective(params, beta)
    return bogoliubov_diagonalize(form).squeeze_r


@dataclass(frozen=True)
class SpinMoments:
    mean_Jx: float
    mean_Jy: float
    mean_Jz: float
    var_Jx: float
    var_Jy: float
    var_Jz: float
    squeeze_r: float

    @property
    def ellipse_axes(self) -> tuple[float, float]:
        """Fluctuation ellipse semi-axes ``(sqrt var Jx, sqrt var Jy)``."""
        return math.sqrt(self.var_Jx), math.sqrt(self.var_Jy)


def spin_moments(params: ModelParams) -> SpinMoments:
    """Collective-spin means and leading-order variances from the fluctuation vacuum.

    Normal phase: ``J_x ~ sqrt(N) X``, ``J_y ~ sqrt(N) P`` and ``J_z = n - N/2``.
    Superradiant phase, linearizing ``J_x = beta sqrt(N - beta^2) + sqrt(N) chi delta X``,
    ``J_y = sqrt(N) chi P`` and ``J_z = beta^2 - N/2 + 2 beta X``.
    """
    phase = classify_phase(params)
    N = params.N
    if phase is PhaseLabel.NORMAL:
        r = np_squeezing(params)
        vx, vp = quadrature_variances(r)
        return SpinMoments(0.0, 0.0, -N / 2, N * vx, N * vp, math.sinh(2 * r) ** 2 / 2, r)
    if phase is PhaseLabel.SUPERRADIANT:
        beta = order_parameter_closed_form(params)
        sp, form = sp_effective(params, beta)
        r = bogoliubov_diagonalize(form).squeeze_r
        vx, vp = quadrature_variances(r)
        alpha = beta / math.sqrt(N)
        chi = math.sqrt(1 - alpha**2)
        delta = 1 - alpha**2 / chi**2
        return SpinMoments(
            beta * math.sqrt(N - beta**2), 0.0, beta**2 - N / 2,
            N * chi**2 * delta**2 * vx, N * chi**2 * vp, 4 * beta**2 * vx, r,
        )
    raise WrongPhase("spin moments are undefined in the collapse region")
