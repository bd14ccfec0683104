"""Mean-field energy functional, order parameter and phase-diagram sweeps.

After the Holstein-Primakoff mapping ``J_z = b^dag b - N/2`` and the
displacement ``b -> beta + d`` the zeroth-order Hamiltonian is quadratic in the
cavity mode,

    H0 = omega_beta a^dag a + g'(a^2 + a^dag^2) + omega_q beta^2 - omega_q N/2

with ``omega_beta = omega_c + U (beta^2 - N/2)`` and
``g' = 2 g beta sqrt(N - beta^2) / N``. Its Bogoliubov vacuum energy is the
mean-field ground-state energy ``E_G(beta)``; minimizing over real ``beta``
gives the order parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import BelowThreshold, BogoliubovUnstable, DomainError, LandscapeUnstable
from .model import (
    ModelParams,
    PhaseLabel,
    classify_phase,
    collapse_coupling,
    critical_rabi,
)

__all__ = [
    "AuxCoefficients",
    "MeanFieldSolution",
    "LandscapePoint",
    "PhaseDiagram",
    "omega_beta",
    "g_prime",
    "squeeze_r_beta",
    "ground_energy",
    "ground_energy_derivative",
    "order_parameter_closed_form",
    "order_parameter_numeric",
    "solve",
    "energy_landscape",
    "phase_diagram",
]

GRID_STEP = 1e-3
BETA_TOL = 1e-10
_EDGE = 1.0 - 1e-9


def omega_beta(params: ModelParams, beta):
    return params.omega_c + params.U * (np.square(beta) - params.N / 2.0)


def g_prime(params: ModelParams, beta):
    beta = np.asarray(beta, dtype=float)
    inside = np.clip(params.N - beta**2, 0.0, None)
    out = 2.0 * params.g * beta * np.sqrt(inside) / params.N
    return float(out) if out.ndim == 0 else out


def _check_domain(params, beta):
    if np.any(np.abs(beta) > math.sqrt(params.N) * (1 + 1e-12)):
        raise DomainError(f"|beta| must not exceed sqrt(N) = {math.sqrt(params.N):g}")


def squeeze_r_beta(params: ModelParams, beta: float) -> float:
    """Bogoliubov parameter of the cavity mode, ``tanh(2 r) = 2 g' / omega_beta``."""
    _check_domain(params, beta)
    w = omega_beta(params, beta)
    gp = g_prime(params, beta)
    if w <= 0 or abs(2 * gp) >= w:
        raise BogoliubovUnstable(f"2|g'| = {abs(2 * gp):g} >= omega_beta = {w:g}")
    return 0.5 * math.atanh(2 * gp / w)


def ground_energy(params: ModelParams, beta: float) -> float:
    """Mean-field ground-state energy ``E_G(beta)``.

    Written in the cosh form

        E_G = (omega_beta^2 - 4 g'^2) / (2 omega_beta) * cosh(2 r_beta)
              + (omega_q - U/2) beta^2 - omega_q N/2 - omega_c/2 + U N/4

    with ``r_beta = artanh(2 g' / omega_beta) / 2``; the first term then equals
    ``sqrt(omega_beta^2 - 4 g'^2) / 2``.

    Raises
    ------
    BogoliubovUnstable
        If ``2|g'| >= omega_beta`` at this ``beta``.
    """
    p = params
    r = squeeze_r_beta(p, beta)
    w = omega_beta(p, beta)
    gp = g_prime(p, beta)
    b2 = beta * beta
    return (
        (w * w - 4 * gp * gp) / (2 * w) * math.cosh(2 * r)
        + (p.omega_q - p.U / 2) * b2
        - p.omega_q * p.N / 2
        - p.omega_c / 2
        + p.U * p.N / 4
    )


def _energy_array(params, betas):
    """Vectorized ``E_G``; unstable points come back as +inf."""
    p = params
    w = omega_beta(p, betas)
    gp = g_prime(p, betas)
    disc = w * w - 4 * gp * gp
    ok = (w > 0) & (disc > 0)
    e = np.full(np.shape(betas), np.inf)
    e[ok] = (
        0.5 * np.sqrt(disc[ok])
        + (p.omega_q - p.U / 2) * betas[ok] ** 2
        - p.omega_q * p.N / 2
        - p.omega_c / 2
        + p.U * p.N / 4
    )
    return e


def ground_energy_derivative(params: ModelParams, beta: float) -> float:
    """Analytic ``dE_G/dbeta`` (Hellmann-Feynman form)."""
    p = params
    w = omega_beta(p, beta)
    gp = g_prime(p, beta)
    root = math.sqrt(w * w - 4 * gp * gp)
    rest = math.sqrt(max(p.N - beta * beta, 0.0))
    if rest == 0.0:
        raise DomainError("derivative undefined at |beta| = sqrt(N)")
    dgp = 2 * p.g / p.N * (rest - beta * beta / rest)
    return p.U * beta * w / root - dgp * 2 * gp / root + 2 * (p.omega_q - p.U / 2) * beta


@dataclass(frozen=True)
class AuxCoefficients:
    """Polynomial shorthands used by the closed-form order parameter."""

    u0: float
    u1: float
    u2: float
    u3: float
    u4: float
    u5: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "AuxCoefficients":
        p = params
        n2 = float(p.N) ** 2
        u1 = p.g**2 * n2
        u2 = p.U**2 * n2
        u3 = p.omega_q**2 * n2
        u4 = p.g * p.omega_q * n2
        u5 = p.U * p.omega_q * n2
        u0 = u2 * (4 * u5 - u2 - 4 * u3 + 4 * p.omega_c**2 - 16 * p.g**2)
        return cls(u0, u1, u2, u3, u4, u5)


def order_parameter_closed_form(params: ModelParams) -> float:
    """Positive superradiant order parameter from the stationarity quadratic.

    Setting ``dE_G/d(beta^2) = 0`` and squaring gives a quadratic in
    ``beta^2`` whose relevant root is

        beta^2 = N (16 g^2 + u2 - 2 omega_c U N) / (2 (16 g^2 + u2))
                 + sgn(U - 2 omega_q) sqrt(A),
        A = u1 [u0 + 64 g^2 (u5 - u3) + 16 omega_c^2 (u3 - u5)]
            / ((16 g^2 + u2)^2 (4 g^2 + u5 - u3)).

    The degenerate partner is ``-beta``.

    Raises
    ------
    BelowThreshold
        If ``g <= g_t``; ``beta = 0`` is then the unique minimum.
    DomainError
        If the radicand or the resulting ``beta^2`` leaves its domain.
    """
    p = params.require_well_posed()
    if p.g <= critical_rabi(p):
        raise BelowThreshold(f"g = {p.g:g} <= g_t = {critical_rabi(p):g}")
    c = AuxCoefficients.from_params(p)
    s16 = 16 * p.g**2 + c.u2
    tail = 4 * p.g**2 + c.u5 - c.u3
    numer = c.u1 * (c.u0 + 64 * p.g**2 * (c.u5 - c.u3) + 16 * p.omega_c**2 * (c.u3 - c.u5))
    linear = p.N * (s16 - 2 * p.omega_c * p.U * p.N) / (2 * s16)
    sign = np.sign(p.U - 2 * p.omega_q)
    if sign == 0:
        beta2 = linear
    else:
        if tail == 0 or numer / tail < 0:
            raise DomainError("closed-form radicand is negative for these parameters")
        beta2 = linear + sign * math.sqrt(numer / (s16**2 * tail))
    if not 0 < beta2 < p.N:
        raise DomainError(f"closed form gives beta^2 = {beta2:g} outside (0, N)")
    return math.sqrt(beta2)


def order_parameter_numeric(params: ModelParams, step: float = GRID_STEP) -> float:
    """Global minimizer of ``E_G`` over ``beta`` in ``[0, sqrt(N))``.

    Grid scan at spacing ``step``, golden-section refinement inside the best
    grid cell, then a Brent root polish of the analytic derivative.
    Independent of :func:`order_parameter_closed_form`.
    """
    p = params.require_well_posed()
    top = math.sqrt(p.N) * _EDGE
    grid = np.append(np.arange(0.0, top, step), top)
    energies = _energy_array(p, grid)
    if not np.isfinite(energies).any():
        raise LandscapeUnstable("Bogoliubov-unstable across the whole beta domain")
    i = int(np.argmin(energies))
    tiny = step * 1e-9
    if i == 0:
        # beta = 0 is a minimum unless the curvature there is negative
        if ground_energy_derivative(p, tiny) >= 0:
            return 0.0
        lo, hi = tiny, grid[1]
    else:
        lo, hi = grid[i - 1], grid[min(i + 1, grid.size - 1)]

    def f(b):
        return _energy_array(p, np.array([b]))[0]

    if i == 0 or i == grid.size - 1:
        res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                       options={"xatol": BETA_TOL})
    else:
        res = optimize.minimize_scalar(f, bracket=(lo, grid[i], hi), method="golden",
                                       options={"xtol": BETA_TOL})
    beta = float(res.x)
    # golden section stalls near sqrt(eps) on the flat minimum; polish on dE/dbeta
    lo = max(lo, tiny)
    try:
        d_lo = ground_energy_derivative(p, lo)
        d_hi = ground_energy_derivative(p, hi)
    except (DomainError, ValueError):
        return beta
    if d_lo < 0 < d_hi:
        beta = optimize.brentq(lambda b: ground_energy_derivative(p, b), lo, hi,
                               xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return beta


@dataclass(frozen=True)
class MeanFieldSolution:
    """Mean-field ground state at one parameter point.

    ``beta`` is the non-negative branch; ``-beta`` is degenerate with it.
    In the collapse region ``beta`` is NaN and ``energy`` is ``-inf``.
    """

    beta: float
    omega_beta: float
    g_prime: float
    r_beta: float
    energy: float
    phase: PhaseLabel

    @property
    def degenerate_betas(self):
        return (self.beta, -self.beta)


def solve(params: ModelParams, method: str = "closed") -> MeanFieldSolution:
    """Mean-field solution using the closed form (``"closed"``) or the numeric minimizer."""
    phase = classify_phase(params)
    if phase is PhaseLabel.COLLAPSE:
        nan = float("nan")
        return MeanFieldSolution(nan, nan, nan, nan, float("-inf"), phase)
    if phase is PhaseLabel.NORMAL:
        beta = 0.0
    elif method == "closed":
        beta = order_parameter_closed_form(params)
    elif method == "numeric":
        beta = order_parameter_numeric(params)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MeanFieldSolution(
        beta=beta,
        omega_beta=float(omega_beta(params, beta)),
        g_prime=float(g_prime(params, beta)),
        r_beta=squeeze_r_beta(params, beta),
        energy=ground_energy(params, beta),
        phase=phase,
    )


@dataclass(frozen=True)
class LandscapePoint:
    beta: float
    energy: float | None
    stable: bool


def energy_landscape(params: ModelParams, beta_grid: Sequence[float]) -> list[LandscapePoint]:
    """Pointwise ``E_G`` on ``beta_grid``.

    Points where the cavity mode is Bogoliubov-unstable are kept with
    ``energy=None`` and ``stable=False``.
    """
    betas = np.asarray(beta_grid, dtype=float)
    _check_domain(params, betas)
    out = []
    for b in betas:
        try:
            out.append(LandscapePoint(float(b), ground_energy(params, float(b)), True))
        except BogoliubovUnstable:
            out.append(LandscapePoint(float(b), None, False))
    return out


@dataclass(frozen=True)
class PhaseDiagram:
    """Labels on a ``(U, g)`` grid plus the two boundary curves.

    ``labels[i, j]`` belongs to ``U_values[i]`` and ``g_values[j]``.
    """

    U_values: np.ndarray
    g_values: np.ndarray
    labels: np.ndarray
    g_t: np.ndarray
    g_c: np.ndarray


def phase_diagram(
    U_values: Sequence[float],
    g_values: Sequence[float],
    omega_q: float = 0.015,
    N: int = 50,
    omega_c: float = 1.0,
) -> PhaseDiagram:
    U_values = np.asarray(U_values, dtype=float)
    g_values = np.asarray(g_values, dtype=float)
    labels = np.empty((U_values.size, g_values.size), dtype=object)
    g_t = np.empty(U_values.size)
    g_c = np.empty(U_values.size)
    for i, U in enumerate(U_values):
        base = ModelParams(omega_q=omega_q, U=U, N=N, omega_c=omega_c).require_well_posed()
        g_t[i] = critical_rabi(base)
        g_c[i] = collapse_coupling(base)
        for j, g in enumerate(g_values):
            labels[i, j] = classify_phase(base.replace(g=g))
    return PhaseDiagram(U_values, g_values, labels, g_t, g_c)
