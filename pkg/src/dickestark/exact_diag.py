"""Exact diagonalization in the symmetric Dicke sector times a truncated Fock space.

Basis states are ``|n> (x) |j = N/2, m - N/2>`` with photon number
``n = 0..n_max`` and ``m = 0..N`` counting excited qubits. The flat index is
``n * (N + 1) + m``, so a state vector reshapes to an ``(n_max + 1, N + 1)``
array with photons along axis 0.

A finite system cannot break the Z4 parity, so ``<J_x>`` vanishes in every
parity eigenstate. Superradiance shows up instead in ``<n>`` and ``<J_x^2>``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CutoffTooSmall, InvalidParameters, NoConvergence
from .lanczos import GroundStateResult, lanczos_ground_state
from .model import ModelParams
from .sparse import SparseMatrix

__all__ = [
    "HilbertSpace",
    "SparseMatrix",
    "GroundStateResult",
    "MatrixFreeHamiltonian",
    "Observables",
    "CollapseReport",
    "CONVERGED",
    "DIVERGING",
    "INDETERMINATE",
    "build_hamiltonian",
    "build_parity",
    "ground_state",
    "parity_sectors",
    "solve",
    "observables",
    "collapse_scan",
    "converged_cutoff",
    "dense_ground_energy",
]

CONVERGED = "Converged"
DIVERGING = "Diverging"
INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class HilbertSpace:
    """Product of the Fock space ``0..n_max`` and the ``N + 1`` Dicke states."""

    n_max: int
    N: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise InvalidParameters(f"n_max must be a non-negative integer, got {self.n_max!r}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameters(f"N must be a positive integer, got {self.N!r}")

    @property
    def n_dim(self) -> int:
        return self.n_max + 1

    @property
    def m_dim(self) -> int:
        return self.N + 1

    @property
    def dim(self) -> int:
        return self.n_dim * self.m_dim

    @property
    def j(self) -> float:
        return self.N / 2

    def index(self, n: int, m: int) -> int:
        if not (0 <= n <= self.n_max and 0 <= m <= self.N):
            raise IndexError(f"(n={n}, m={m}) outside the basis")
        return n * self.m_dim + m

    def label(self, idx: int) -> tuple[int, int]:
        if not 0 <= idx < self.dim:
            raise IndexError(f"index {idx} outside 0..{self.dim - 1}")
        return divmod(idx, self.m_dim)

    # per-axis ingredients --------------------------------------------------
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.n_dim, dtype=float)

    def m_tilde(self) -> np.ndarray:
        """Eigenvalues of ``J_z`` along the spin axis."""
        return np.arange(self.m_dim, dtype=float) - self.N / 2

    def raise_coefficients(self) -> np.ndarray:
        """``c[m] = <m+1|J_+|m> = sqrt(j(j+1) - mt(mt+1))``; zero at the top."""
        mt = self.m_tilde()
        return np.sqrt(np.clip(self.j * (self.j + 1) - mt * (mt + 1), 0.0, None))

    def pair_coefficients(self) -> np.ndarray:
        """``s[n] = <n-2|a^2|n> = sqrt(n(n-1))``."""
        n = self.photon_numbers()
        return np.sqrt(n * np.clip(n - 1, 0.0, None))

    def diagonal(self, params: ModelParams) -> np.ndarray:
        n = self.photon_numbers()[:, None]
        mt = self.m_tilde()[None, :]
        return (params.omega_c * n + params.omega_q * mt + params.U * n * mt).ravel()


def _check(params: ModelParams, space: HilbertSpace):
    if space.n_max < 2:
        raise CutoffTooSmall(f"n_max = {space.n_max} < 2 cannot hold a photon pair")
    if params.N != space.N:
        raise InvalidParameters(f"params.N = {params.N} differs from space.N = {space.N}")


def build_hamiltonian(params: ModelParams, space: HilbertSpace) -> SparseMatrix:
    """Sparse matrix of the two-photon Dicke-Stark Hamiltonian on ``space``.

    Off-diagonal elements, with ``mt = m - N/2``::

        <n-2, m+1|H|n, m> = (g/N) sqrt(j(j+1) - mt(mt+1)) sqrt(n(n-1))

    and the three partners obtained from ``J_-`` and ``a^dag^2``.
    """
    _check(params, space)
    nd, md = space.n_dim, space.m_dim
    c_up = space.raise_coefficients()
    s2 = space.pair_coefficients()
    coef = params.g / params.N

    # J_+ a^2 : (n, m) -> (n-2, m+1); the other three terms are its adjoint
    # (J_- a^dag^2) and the pair (J_+ a^dag^2, J_- a^2).
    n = np.arange(nd)[:, None]
    m = np.arange(md)[None, :]
    rows, cols, vals = [np.arange(space.dim)], [np.arange(space.dim)], [space.diagonal(params)]

    def add(n_src, m_src, n_dst, m_dst, value):
        mask = value != 0
        src = (n_src * md + m_src)[mask]
        dst = (n_dst * md + m_dst)[mask]
        v = value[mask]
        rows.extend([dst, src])
        cols.extend([src, dst])
        vals.extend([v, v])

    if coef != 0:
        nn = np.broadcast_to(n, (nd, md))
        mm = np.broadcast_to(m, (nd, md))
        up_ok = (mm < md - 1)
        # J_+ a^2 and its adjoint
        ok = up_ok & (nn >= 2)
        add(nn[ok], mm[ok], nn[ok] - 2, mm[ok] + 1, coef * c_up[mm[ok]] * s2[nn[ok]])
        # J_+ a^dag^2 and its adjoint J_- a^2
        ok = up_ok & (nn + 2 <= nd - 1)
        add(nn[ok], mm[ok], nn[ok] + 2, mm[ok] + 1, coef * c_up[mm[ok]] * s2[nn[ok] + 2])

    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.dim, space.dim),
    )
    return SparseMatrix(H)


def build_parity(space: HilbertSpace) -> SparseMatrix:
    """Diagonal Z4 parity ``(-1)^N prod_j sigma_z^(j) exp(i pi n / 2)``.

    On a Dicke state with ``m`` excited qubits the spin string gives
    ``(-1)^(N - m)``, so the phase is ``(-1)^m i^n``.
    """
    n = np.arange(space.n_dim)[:, None]
    m = np.arange(space.m_dim)[None, :]
    phase = (1j ** (n % 4)) * ((-1.0) ** m)
    # 1j ** k is exact for k in 0..3
    return SparseMatrix(sp.diags(phase.ravel().astype(np.complex128)), check_hermitian=False)


class MatrixFreeHamiltonian:
    """Applies the Hamiltonian without storing it.

    The state is treated as an ``(n_max + 1, N + 1)`` array; output rows are
    computed in independent blocks, optionally on a thread pool (numpy
    releases the GIL for the array arithmetic).
    """

    def __init__(self, params: ModelParams, space: HilbertSpace, threads: int = 1):
        _check(params, space)
        self.params = params
        self.space = space
        self.threads = max(1, int(threads))
        self.dim = space.dim
        self._diag = space.diagonal(params).reshape(space.n_dim, space.m_dim)
        self._coef = params.g / params.N
        c_up = space.raise_coefficients()
        # padded so that index shifts never leave the array
        self._c_up_pad = np.concatenate([[0.0], c_up, [0.0]])
        self._s2_pad = np.concatenate([[0.0, 0.0], space.pair_coefficients(), [0.0, 0.0]])

    def _rows(self, Vp, out, lo, hi):
        # Vp is V padded by 2 rows and 1 column on each side: Vp[n+2, m+1] = V[n, m]
        md = self.space.m_dim
        k = self._coef
        cu = self._c_up_pad  # cu[m+1] = c_up[m]
        s2 = self._s2_pad  # s2[n+2] = sqrt(n(n-1))
        n = np.arange(lo, hi)
        acc = self._diag[lo:hi] * Vp[lo + 2 : hi + 2, 1 : md + 1]
        if k != 0:
            c_from_below = cu[0:md][None, :]  # c_up[m-1]
            c_from_above = cu[1 : md + 1][None, :]  # c_dn[m+1] = c_up[m]
            s_here = s2[n + 2][:, None]  # sqrt(n(n-1))
            s_above = s2[n + 4][:, None]  # sqrt((n+2)(n+1))
            acc = acc + k * (
                c_from_below * s_above * Vp[lo + 4 : hi + 4, 0:md]
                + c_from_below * s_here * Vp[lo : hi, 0:md]
                + c_from_above * s_above * Vp[lo + 4 : hi + 4, 2 : md + 2]
                + c_from_above * s_here * Vp[lo : hi, 2 : md + 2]
            )
        out[lo:hi] = acc

    def matvec(self, v: np.ndarray) -> np.ndarray:
        sp_ = self.space
        V = np.asarray(v).reshape(sp_.n_dim, sp_.m_dim)
        Vp = np.zeros((sp_.n_dim + 4, sp_.m_dim + 2), dtype=np.result_type(V, np.complex128))
        Vp[2:-2, 1:-1] = V
        out = np.empty((sp_.n_dim, sp_.m_dim), dtype=Vp.dtype)
        if self.threads == 1 or sp_.n_dim < 2 * self.threads:
            self._rows(Vp, out, 0, sp_.n_dim)
        else:
            edges = np.linspace(0, sp_.n_dim, self.threads + 1).astype(int)
            with ThreadPoolExecutor(self.threads) as pool:
                list(pool.map(lambda b: self._rows(Vp, out, edges[b], edges[b + 1]), range(self.threads)))
        return out.ravel()

    __matmul__ = matvec


def parity_sectors(space: HilbertSpace) -> list[np.ndarray]:
    """Flat indices of the four Z4 sectors, ordered by eigenvalue ``1, i, -1, -i``."""
    n = np.arange(space.n_dim)[:, None]
    m = np.arange(space.m_dim)[None, :]
    k = ((n + 2 * m) % 4).ravel()  # exponent of i in (-1)^m i^n
    return [np.flatnonzero(k == q) for q in range(4)]


def ground_state(
    H,
    tol: float = 1e-9,
    max_iter: int = 20000,
    seed: int = 0,
    raise_on_failure: bool = True,
    sectors=None,
) -> GroundStateResult:
    """Lowest eigenpair of ``H`` (a :class:`SparseMatrix` or :class:`MatrixFreeHamiltonian`).

    Diagonal matrices are answered directly. Everything else goes through
    restarted Lanczos with full reorthogonalization.

    ``sectors`` optionally lists disjoint index sets that ``H`` does not
    connect (for instance :func:`parity_sectors`). Each block is then solved
    on its own and the lowest result is embedded back. This matters in the
    superradiant phase, where the ground states of different parity sectors
    are nearly degenerate and a single Krylov space converges very slowly.
    ``max_iter`` applies per block.
    """
    if isinstance(H, SparseMatrix) and H.is_diagonal():
        d = H.diagonal().real
        i = int(np.argmin(d))
        vec = np.zeros(H.dim, dtype=np.complex128)
        vec[i] = 1.0
        return GroundStateResult(float(d[i]), vec, 0.0, True, 0)
    if sectors is None:
        return lanczos_ground_state(
            H, H.dim, tol=tol, max_iter=max_iter, seed=seed, raise_on_failure=raise_on_failure
        )
    csr = H.csr if isinstance(H, SparseMatrix) else None
    if csr is None:
        raise TypeError("sector-resolved solves need an explicit SparseMatrix")
    best, used = None, 0
    for idx in sectors:
        if len(idx) == 0:
            continue
        block = csr[idx][:, idx]
        res = lanczos_ground_state(
            block, len(idx), tol=tol, max_iter=max_iter, seed=seed,
            raise_on_failure=raise_on_failure,
        )
        used += res.iterations
        if best is None or res.energy < best[0].energy:
            best = (res, idx)
    res, idx = best
    vec = np.zeros(H.dim, dtype=np.complex128)
    vec[idx] = res.vector
    return GroundStateResult(res.energy, vec, res.residual, res.converged, used)


def solve(
    params: ModelParams,
    space: HilbertSpace,
    tol: float = 1e-9,
    max_iter: int = 20000,
    seed: int = 0,
) -> GroundStateResult:
    """Build the Hamiltonian and return its ground state, resolved by parity sector."""
    return ground_state(
        build_hamiltonian(params, space), tol=tol, max_iter=max_iter, seed=seed,
        sectors=parity_sectors(space),
    )


@dataclass(frozen=True)
class Observables:
    mean_n: float
    mean_Jz: float
    mean_Jx: float
    mean_Jy: float
    mean_Jx2: float
    mean_Jy2: float
    var_Jx: float
    var_Jy: float
    parity_expectation: complex

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def observables(state: GroundStateResult | np.ndarray, space: HilbertSpace) -> Observables:
    """Photon number, collective-spin moments and parity of a state."""
    vec = state.vector if isinstance(state, GroundStateResult) else np.asarray(state)
    psi = vec.reshape(space.n_dim, space.m_dim)
    prob = np.abs(psi) ** 2
    norm = prob.sum()
    n = space.photon_numbers()
    mean_n = float(prob.sum(axis=1) @ n / norm)
    mean_Jz = float(prob.sum(axis=0) @ space.m_tilde() / norm)

    c_up = space.raise_coefficients()
    jp = np.zeros_like(psi)  # J_+ psi
    jp[:, 1:] = psi[:, :-1] * c_up[:-1]
    jm = np.zeros_like(psi)  # J_- psi
    jm[:, :-1] = psi[:, 1:] * c_up[:-1]
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    mean_Jx = float(np.vdot(psi, jx).real / norm)
    mean_Jy = float(np.vdot(psi, jy).real / norm)
    mean_Jx2 = float(np.vdot(jx, jx).real / norm)
    mean_Jy2 = float(np.vdot(jy, jy).real / norm)
    parity = build_parity(space).diagonal().reshape(psi.shape)
    par = complex(np.sum(prob * parity) / norm)
    return Observables(
        mean_n, mean_Jz, mean_Jx, mean_Jy, mean_Jx2, mean_Jy2,
        mean_Jx2 - mean_Jx**2, mean_Jy2 - mean_Jy**2, par,
    )


DENSE_LIMIT = 2500


def _lowest_energy(H: SparseMatrix, space: HilbertSpace) -> float:
    # Near the collapse point the low spectrum is quasi-continuous and Lanczos
    # stalls, so small spaces go to the dense solver and larger ones accept the
    # best Ritz value (an upper bound, which is all the verdict needs).
    if H.dim <= DENSE_LIMIT:
        return dense_ground_energy(H)
    return ground_state(H, raise_on_failure=False, sectors=parity_sectors(space)).energy



@dataclass(frozen=True)
class CollapseReport:
    """Ground energy versus Fock cutoff.

    ``differences[k] = energies[k] - energies[k+1]`` (non-negative, since the
    truncated spaces are nested). ``divergence_rate`` is the energy drop per
    added Fock level over the last step.
    """

    cutoffs: tuple
    energies: tuple
    differences: tuple
    verdict: str
    divergence_rate: float
    tolerance: float = field(default=1e-8)


def collapse_scan(
    params: ModelParams,
    space_ladder,
    tol: float = 1e-8,
    growth: float = 0.9,
) -> CollapseReport:
    """Classify whether the ground energy converges as the cutoff grows.

    Verdict rules on the successive differences ``d_k``:

    * ``Converged`` when the last difference is below ``tol``;
    * ``Diverging`` when it exceeds ``tol`` and the differences do not shrink
      (ratio of the last two ``>= growth``, cutoffs being roughly doubled);
    * ``Indeterminate`` otherwise, e.g. the slow algebraic convergence
      exactly at the collapse point.
    """
    ladder = [int(c) for c in space_ladder]
    if len(ladder) < 2:
        raise InvalidParameters("collapse_scan needs at least two cutoffs")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InvalidParameters(f"cutoffs must be strictly ascending, got {ladder}")
    energies = []
    for n_max in ladder:
        space = HilbertSpace(n_max, params.N)
        energies.append(_lowest_energy(build_hamiltonian(params, space), space))
    diffs = [a - b for a, b in zip(energies, energies[1:])]
    last = diffs[-1]
    rate = last / (ladder[-1] - ladder[-2])
    if abs(last) < tol:
        verdict = CONVERGED
    elif len(diffs) >= 2 and diffs[-2] > 0 and last / diffs[-2] >= growth:
        verdict = DIVERGING
    else:
        verdict = INDETERMINATE
    return CollapseReport(tuple(ladder), tuple(energies), tuple(diffs), verdict, rate, tol)


def converged_cutoff(
    params: ModelParams,
    start: int = 20,
    tol: float = 1e-8,
    ceiling: int = 640,
) -> tuple[int, GroundStateResult]:
    """Double ``n_max`` until the ground energy moves by less than ``tol``.

    Raises
    ------
    NoConvergence
        The ceiling was reached first (typically close to the collapse point).
    """
    n_max = max(2, start)
    prev = solve(params, HilbertSpace(n_max, params.N))
    while 2 * n_max <= ceiling:
        n_max *= 2
        cur = solve(params, HilbertSpace(n_max, params.N))
        if abs(prev.energy - cur.energy) < tol:
            return n_max, cur
        prev = cur
    raise NoConvergence(
        f"ground energy still moving at n_max = {n_max} (ceiling {ceiling})",
        iterations=n_max,
        residual=float("nan"),
    )


def dense_ground_energy(H: SparseMatrix) -> float:
    """Lowest eigenvalue by full dense diagonalization (small spaces only)."""
    return float(np.linalg.eigvalsh(H.to_dense())[0])
