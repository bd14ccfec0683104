"""Single-ion dynamics: full three-drive Hamiltonian versus the effective model.

State space is qubit (x) Fock(0..n_max), flat index ``q * (n_max + 1) + n``
with ``q = 0`` the excited state ``|e>`` and ``sigma_z = diag(1, -1)``.

The full drive is written in the interaction picture of the bare qubit and
trap Hamiltonian, to second order in the Lamb-Dicke parameter. Every term
has the form ``A exp(-i f t) + h.c.``:

==================  =====================================  ==================
tag                 amplitude                              frequency ``f``
==================  =====================================  ==================
``sp_a2``           ``-i eta^2 Omega_r / 4``               ``delta_r``
``sp_ad2``          ``-i eta^2 Omega_b / 4``               ``delta_b``
``sp``              ``-Omega_0 / 2``                       0
``sp_n``            ``eta^2 Omega_S / 2``                  0
``sp_a_red``        ``-eta Omega_r / 2``                   ``delta_r - omega``
``sp_ad_blue``      ``-eta Omega_b / 2``                   ``omega + delta_b``
``sp_a_car``        ``-i eta Omega_S / 2``                 ``omega``
``sp_ad_car``       ``-i eta Omega_S / 2``                 ``-omega``
==================  =====================================  ==================

(``sp`` stands for ``sigma_+``.) The last four are the off-resonant first
sidebands whose second-order cross terms produce the Stark-dependent
correction of the two-photon amplitude.

Integration defaults to the fourth-order commutator-free Magnus scheme,
which is unitary by construction; classical RK4 is available for
comparison.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmall, InvalidParameters, NormDrift, StepTooLarge
from .ion_map import MappedModel, forward_map, IonDriveParams

__all__ = [
    "DriveTerm",
    "TimeDependentHamiltonian",
    "Trajectory",
    "VerificationReport",
    "NORM_TOL",
    "STEPS_PER_PERIOD",
    "build_full_drive",
    "build_effective",
    "effective_couplings",
    "evolve",
    "frame_transform",
    "rotating_frame",
    "qubit_basis_rotation",
    "fidelity",
    "odd_population",
    "ground_product_state",
    "verify_effective",
    "compare_effective",
    "trajectory_rows",
    "trajectory_to_csv",
]

NORM_TOL = 1e-8
STEPS_PER_PERIOD = 20

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)
_SP = np.array([[0, 1], [0, 0]], dtype=complex)  # |e><g|


def _ladder(n_max):
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)
    return a, a.conj().T, np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


@dataclass(frozen=True)
class DriveTerm:
    """``amplitude * operator * exp(-i frequency t)`` plus its Hermitian conjugate."""

    tag: str
    operator: np.ndarray
    amplitude: complex
    frequency: float

    def matrix(self, t: float) -> np.ndarray:
        x = self.amplitude * np.exp(-1j * self.frequency * t) * self.operator
        return x + x.conj().T


class TimeDependentHamiltonian:
    """Sum of :class:`DriveTerm` objects, evaluated quickly from a stacked array."""

    def __init__(self, terms, dim: int):
        self.terms = tuple(terms)
        self.dim = dim
        if self.terms:
            self._stack = np.array([t.amplitude * t.operator for t in self.terms])
            self._freqs = np.array([t.frequency for t in self.terms])
        else:
            self._stack = np.zeros((0, dim, dim), dtype=complex)
            self._freqs = np.zeros(0)

    def __call__(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self._freqs * t)
        x = np.tensordot(phases, self._stack, axes=1) if len(phases) else np.zeros((self.dim,) * 2, complex)
        return x + x.conj().T

    def combinations(self, times, weights) -> np.ndarray:
        """``sum_j weights[i, j] H(times[j])`` for each row ``i``, in one product."""
        phases = np.exp(-1j * np.outer(times, self._freqs))  # (n_times, n_terms)
        coef = np.asarray(weights, dtype=float) @ phases
        x = (coef @ self._stack.reshape(len(self.terms), -1)).reshape(-1, self.dim, self.dim)
        return x + x.conj().transpose(0, 2, 1)

    def tags(self) -> list[str]:
        return [t.tag for t in self.terms]

    def term(self, tag: str) -> DriveTerm:
        for t in self.terms:
            if t.tag == tag:
                return t
        raise KeyError(tag)

    @property
    def max_frequency(self) -> float:
        """Fastest angular frequency: term oscillation plus an operator-norm bound."""
        if not self.terms:
            return 0.0
        osc = float(np.max(np.abs(self._freqs)))
        norm = sum(2 * abs(t.amplitude) * np.linalg.norm(t.operator, 2) for t in self.terms)
        return max(osc, norm)


def build_full_drive(drive: IonDriveParams, n_max: int = 20) -> TimeDependentHamiltonian:
    """Single-ion Lamb-Dicke Hamiltonian of the three drives (see module table)."""
    if n_max < 4:
        raise CutoffTooSmall(f"n_max = {n_max} < 4")
    a, ad, n = _ladder(n_max)
    eye = np.eye(n_max + 1)
    d = drive
    e2 = d.eta**2
    w = d.omega_trap

    def op(x):
        return np.kron(_SP, x)

    spec = [
        ("sp_a2", a @ a, -1j * e2 * d.Omega_r / 4, d.delta_r),
        ("sp_ad2", ad @ ad, -1j * e2 * d.Omega_b / 4, d.delta_b),
        ("sp", eye, -d.Omega_0 / 2, 0.0),
        ("sp_n", n, e2 * d.Omega_S / 2, 0.0),
        ("sp_a_red", a, -d.eta * d.Omega_r / 2, d.delta_r - w),
        ("sp_ad_blue", ad, -d.eta * d.Omega_b / 2, w + d.delta_b),
        ("sp_a_car", a, -1j * d.eta * d.Omega_S / 2, w),
        ("sp_ad_car", ad, -1j * d.eta * d.Omega_S / 2, -w),
    ]
    terms = [DriveTerm(tag, op(x), complex(amp), float(f)) for tag, x, amp, f in spec if amp != 0]
    return TimeDependentHamiltonian(terms, 2 * (n_max + 1))


def effective_couplings(drive: IonDriveParams, denominators: str = "approx") -> dict:
    """Two-photon amplitudes of the effective model.

    ``g_r, g_b`` are the second-order (carrier x first-sideband) amplitudes.
    With ``denominators="approx"`` they are ``eta^2 Omega_S Omega_{r,b} / (4 omega)``;
    ``"exact"`` keeps ``1/(omega -/+ delta)`` for the partner term. The
    returned ``lam`` multiplies ``sigma_x (a^2 + a^dag^2)`` and ``lam_minus``
    multiplies ``sigma_y i (a^2 - a^dag^2)`` in the final frame.
    """
    d = drive
    e2, w = d.eta**2, d.omega_trap
    if denominators == "approx":
        g_r = e2 * d.Omega_S * d.Omega_r / (4 * w)
        g_b = e2 * d.Omega_S * d.Omega_b / (4 * w)
    elif denominators == "exact":
        g_r = e2 * d.Omega_S * d.Omega_r / 8 * (1 / w + 1 / (w - d.delta_r))
        g_b = e2 * d.Omega_S * d.Omega_b / 8 * (1 / w + 1 / (w + d.delta_b))
    else:
        raise InvalidParameters(f"denominators must be 'approx' or 'exact', got {denominators!r}")
    c_r = e2 * d.Omega_r / 16 - g_r / 2
    c_b = e2 * d.Omega_b / 16 + g_b / 2
    return {"g_r": g_r, "g_b": g_b, "lam": c_r + c_b, "lam_minus": c_r - c_b}


def build_effective(
    mapped: MappedModel,
    n_max: int = 20,
    denominators: str | None = None,
) -> np.ndarray:
    """Static two-photon Rabi-Stark Hamiltonian of one ion.

    ``H = omega_c n + (omega_q / 2) sigma_z + lam sigma_x (a^2 + a^dag^2) + U n sigma_z``

    With ``denominators=None`` the coupling is ``mapped.lam``, the balanced
    closed form. With ``"approx"`` or ``"exact"`` the coupling is recomputed
    from the drive, and any blue/red imbalance adds
    ``lam_minus sigma_y i (a^2 - a^dag^2)``.
    """
    if n_max < 2:
        raise CutoffTooSmall(f"n_max = {n_max} < 2")
    p = mapped.params
    a, ad, n = _ladder(n_max)
    i2 = np.eye(2)
    pair = a @ a + ad @ ad
    lam, lam_minus = mapped.lam, 0.0
    if denominators is not None:
        c = effective_couplings(mapped.drive, denominators)
        lam, lam_minus = c["lam"], c["lam_minus"]
    H = (
        p.omega_c * np.kron(i2, n)
        + p.omega_q / 2 * np.kron(_SZ, np.eye(n_max + 1))
        + lam * np.kron(_SX, pair)
        + p.U * np.kron(_SZ, n)
    )
    if lam_minus:
        H = H + lam_minus * np.kron(_SY, 1j * (a @ a - ad @ ad))
    return H


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    norms: np.ndarray
    dt: float
    steps: int
    method: str

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))


def _expm_herm(H, dt):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _taylor_order(x: float, eps: float = 1e-17) -> int:
    # smallest K with x^(K+1)/(K+1)! < eps, x = ||H|| dt
    k, term = 0, 1.0
    while term >= eps:
        k += 1
        term *= x / k
    return k


def _expm_apply(H, h, v, order):
    """``exp(-i H h) v`` by a Taylor series of fixed ``order``."""
    out = v.copy()
    term = v
    for k in range(1, order + 1):
        term = (-1j * h / k) * (H @ term)
        out += term
    return out


_C1, _C2 = 0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6
_A1, _A2 = 0.25 + math.sqrt(3) / 6, 0.25 - math.sqrt(3) / 6


def evolve(
    H,
    psi0: np.ndarray,
    T: float,
    dt: float,
    method: str = "cfm4",
    samples: int = 201,
    norm_tol: float = NORM_TOL,
    check_step: bool = True,
) -> Trajectory:
    """Integrate ``i d psi/dt = H(t) psi`` with a fixed step.

    Parameters
    ----------
    H : ndarray or TimeDependentHamiltonian
        Static matrix or callable ``H(t)``.
    dt : float
        Requested step; rounded down so that ``T`` is an integer number of steps.
    method : {"cfm4", "rk4"}
        ``cfm4`` is the two-exponential commutator-free Magnus scheme with
        Gauss-Legendre nodes (4th order, exactly unitary). ``rk4`` is the
        classical Runge-Kutta scheme with midpoint evaluations.
    samples : int
        Approximate number of stored states (always including 0 and ``T``).

    Raises
    ------
    StepTooLarge
        ``dt > 1 / (20 f_max)`` with ``f_max`` the fastest frequency in Hz units
        of the time axis.
    NormDrift
        The norm left ``1 +/- norm_tol``.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    if abs(np.linalg.norm(psi) - 1) > 1e-12:
        raise InvalidParameters("psi0 must be normalized")
    if T < 0 or dt <= 0:
        raise InvalidParameters("need T >= 0 and dt > 0")
    static = not callable(H)
    if static:
        H = np.asarray(H, dtype=complex)
        omega_max = float(np.max(np.abs(np.linalg.eigvalsh(H)))) if H.size else 0.0
    else:
        omega_max = H.max_frequency
    f_max = omega_max / (2 * math.pi)
    if check_step and f_max > 0 and dt > 1 / (STEPS_PER_PERIOD * f_max) * (1 + 1e-12):
        raise StepTooLarge(
            f"dt = {dt:g} exceeds 1/({STEPS_PER_PERIOD} f_max) = {1 / (STEPS_PER_PERIOD * f_max):g}"
        )
    steps = max(1, int(math.ceil(T / dt - 1e-9))) if T > 0 else 0
    h = T / steps if steps else 0.0
    every = max(1, steps // max(1, samples - 1)) if steps else 1

    times, states, norms = [0.0], [psi.copy()], [1.0]
    if method == "cfm4":
        if static:
            U = _expm_herm(H, h) if steps else None

            def step(t, v):
                return U @ v
        elif omega_max * h < 0.5:
            # exponentials of small matrices applied by Taylor series; the
            # truncation error per step is below 1e-17, far under the norm gate
            order = _taylor_order(omega_max * h)
            # first factor leans on the early node, second on the late one
            weights = np.array([[_A1, _A2], [_A2, _A1]])

            if isinstance(H, TimeDependentHamiltonian) and H.terms:
                def step(t, v):
                    M = H.combinations((t + _C1 * h, t + _C2 * h), weights)
                    return _expm_apply(M[1], h, _expm_apply(M[0], h, v, order), order)
            else:
                def step(t, v):
                    H1, H2 = H(t + _C1 * h), H(t + _C2 * h)
                    v = _expm_apply(_A1 * H1 + _A2 * H2, h, v, order)
                    return _expm_apply(_A2 * H1 + _A1 * H2, h, v, order)
        else:
            def step(t, v):
                H1, H2 = H(t + _C1 * h), H(t + _C2 * h)
                return _expm_herm(_A2 * H1 + _A1 * H2, h) @ (_expm_herm(_A1 * H1 + _A2 * H2, h) @ v)
    elif method == "rk4":
        def f(t, v):
            return -1j * ((H if static else H(t)) @ v)

        def step(t, v):
            k1 = f(t, v)
            k2 = f(t + h / 2, v + h / 2 * k1)
            k3 = f(t + h / 2, v + h / 2 * k2)
            k4 = f(t + h, v + h * k3)
            return v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise InvalidParameters(f"unknown method {method!r}")

    for s in range(steps):
        psi = step(s * h, psi)
        if (s + 1) % every == 0 or s + 1 == steps:
            nrm = float(np.linalg.norm(psi))
            if abs(nrm - 1) > norm_tol:
                raise NormDrift(f"norm {nrm:.12f} at t = {(s + 1) * h:g} (tolerance {norm_tol:g})")
            times.append((s + 1) * h)
            states.append(psi.copy())
            norms.append(nrm)
    return Trajectory(np.array(times), np.array(states), np.array(norms), h, steps, method)


def qubit_basis_rotation() -> np.ndarray:
    """Fixed qubit unitary ``V`` with ``V sx V^dag = sz`` and ``V sy V^dag = sx``.

    A rotation by ``-2 pi / 3`` about ``(1, 1, 1) / sqrt(3)``.
    """
    theta = -2 * math.pi / 3
    nsig = (_SX + _SY + _SZ) / math.sqrt(3)
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * nsig


def rotating_frame(drive: IonDriveParams, t: float, n_max: int, omega_c: float | None = None) -> np.ndarray:
    """``exp(-i omega_c t n) exp(+i Omega t sigma_x / 2)`` as a diagonal-in-Fock product."""
    wc = drive.omega_c if omega_c is None else omega_c
    th = drive.Omega_big * t / 2
    qubit = math.cos(th) * np.eye(2) + 1j * math.sin(th) * _SX
    phon = np.diag(np.exp(-1j * wc * t * np.arange(n_max + 1)))
    return np.kron(qubit, phon)


def frame_transform(state: np.ndarray, drive: IonDriveParams, t: float, n_max: int | None = None,
                    omega_c: float | None = None) -> np.ndarray:
    """Map a full-drive state at time ``t`` into the frame of the effective model."""
    state = np.asarray(state, dtype=complex)
    if n_max is None:
        n_max = state.shape[-1] // 2 - 1
    V = np.kron(qubit_basis_rotation(), np.eye(n_max + 1))
    return V @ (rotating_frame(drive, t, n_max, omega_c) @ state)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def odd_population(state: np.ndarray, n_max: int) -> float:
    """Weight on odd phonon numbers."""
    p = np.abs(np.asarray(state).reshape(2, n_max + 1)) ** 2
    return float(p[:, 1::2].sum())


def ground_product_state(n_max: int) -> np.ndarray:
    """``|g> (x) |0>``."""
    psi = np.zeros(2 * (n_max + 1), dtype=complex)
    psi[n_max + 1] = 1.0
    return psi


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one full-versus-effective comparison.

    ``top_population`` is the weight of the effective state on the two
    highest Fock levels, a truncation monitor. ``trajectory`` holds the
    full-drive run (lab interaction picture) when it was requested.
    """

    fidelity: float
    T: float
    dt: float
    steps: int
    norm_drift: float
    top_population: float
    odd_population_effective: float
    denominators: str
    lam: float
    trajectory: Trajectory | None = None


def compare_effective(
    drive: IonDriveParams,
    n_max: int = 20,
    T: float | None = None,
    dt: float | None = None,
    variants=(None,),
    method: str = "cfm4",
    samples: int = 2,
) -> list[VerificationReport]:
    """Fidelity between full-drive and effective evolution of ``|g, 0>``.

    The full state is propagated once in the lab interaction picture and
    mapped with :func:`frame_transform`; each effective variant (``None``
    for the balanced closed form, ``"approx"`` or ``"exact"`` denominators)
    starts from the same transformed initial state. ``T`` defaults to
    ``2 pi / (10 lam)`` and ``dt`` to the largest step allowed by the
    resolution rule. Only the first ion of the drive is simulated.
    """
    single = drive.replace(N_ions=1)
    mapped = forward_map(single)
    lam = mapped.lam
    if T is None:
        if lam <= 0:
            raise InvalidParameters("default duration needs lam > 0")
        T = 2 * math.pi / (10 * lam)
    full = build_full_drive(single, n_max)
    if dt is None:
        dt = 2 * math.pi / (STEPS_PER_PERIOD * full.max_frequency)
    psi0 = ground_product_state(n_max)
    traj = evolve(full, psi0, T, dt, method=method, samples=samples)
    phi = frame_transform(traj.final, single, T, n_max)
    start = frame_transform(psi0, single, 0.0, n_max)
    reports = []
    for variant in variants:
        Heff = build_effective(mapped, n_max, variant)
        eff = evolve(Heff, start, T, T, check_step=False, samples=2).final
        top = float(np.sum(np.abs(eff.reshape(2, n_max + 1)[:, -2:]) ** 2))
        reports.append(
            VerificationReport(
                fidelity=fidelity(eff, phi),
                T=T,
                dt=traj.dt,
                steps=traj.steps,
                norm_drift=traj.max_norm_drift,
                top_population=top,
                odd_population_effective=odd_population(eff, n_max),
                denominators=variant or "balanced",
                lam=lam,
                trajectory=traj if samples > 2 else None,
            )
        )
    return reports


def verify_effective(
    drive: IonDriveParams,
    n_max: int = 20,
    T: float | None = None,
    dt: float | None = None,
    denominators: str | None = None,
    method: str = "cfm4",
) -> VerificationReport:
    """Single-variant shortcut for :func:`compare_effective`."""
    return compare_effective(drive, n_max, T, dt, (denominators,), method)[0]


TRAJECTORY_COLUMNS = ("t_ms", "pop_excited", "mean_n", "pop_odd_n", "norm")


def trajectory_rows(traj: Trajectory, n_max: int):
    """``(t, excited population, mean phonon number, odd population, norm)`` per sample."""
    nums = np.arange(n_max + 1)
    for t, psi, nrm in zip(traj.times, traj.states, traj.norms):
        p = np.abs(psi.reshape(2, n_max + 1)) ** 2
        yield (float(t), float(p[0].sum()), float(p.sum(axis=0) @ nums), float(p[:, 1::2].sum()), float(nrm))


def trajectory_to_csv(traj: Trajectory, n_max: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for row in trajectory_rows(traj, n_max):
        w.writerow([repr(x) for x in row])
    return buf.getvalue()
