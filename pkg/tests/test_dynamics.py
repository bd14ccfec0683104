import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dickestark import CutoffTooSmall, InvalidParameters, NormDrift, StepTooLarge
from dickestark.dynamics import (
    TRAJECTORY_COLUMNS,
    DriveTerm,
    TimeDependentHamiltonian,
    build_effective,
    build_full_drive,
    compare_effective,
    effective_couplings,
    evolve,
    fidelity,
    frame_transform,
    ground_product_state,
    odd_population,
    qubit_basis_rotation,
    rotating_frame,
    trajectory_rows,
    trajectory_to_csv,
)
from dickestark.ion_map import forward_map

from operating_points import drive
from oracles import exact_propagator, ladder

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_full_drive_terms_at_operating_point():
    d = drive()
    H = build_full_drive(d, 20)
    assert set(H.tags()) == {"sp_a2", "sp_ad2", "sp", "sp_n", "sp_a_red", "sp_ad_blue", "sp_a_car", "sp_ad_car"}
    assert H.term("sp_n").amplitude == pytest.approx(d.eta**2 * d.Omega_S / 2)
    assert H.term("sp_a2").amplitude == pytest.approx(-1j * d.eta**2 * d.Omega_r / 4)
    assert H.term("sp_a2").frequency == d.delta_r
    assert H.term("sp_ad_blue").frequency == pytest.approx(d.omega_trap + d.delta_b)


def test_full_drive_without_carrier():
    H = build_full_drive(drive().replace(Omega_S=0.0), 20)
    assert not {"sp_a_car", "sp_ad_car", "sp_n"} & set(H.tags())


def test_full_drive_cutoff():
    with pytest.raises(CutoffTooSmall):
        build_full_drive(drive(), 3)


@given(st.floats(0.0, 10.0))
def test_full_drive_is_hermitian(t):
    H = build_full_drive(drive(), 8)
    M = H(t)
    assert np.abs(M - M.conj().T).max() < 1e-12
    C = H.combinations([t, 2 * t], [[1.0, 0.0], [0.5, 0.5]])
    np.testing.assert_allclose(C[0], M, atol=1e-12)
    np.testing.assert_allclose(C[1], (M + H(2 * t)) / 2, atol=1e-12)


def test_coupling_audit():
    d = drive()
    c = effective_couplings(d, "approx")
    assert c["g_r"] == pytest.approx(d.eta**2 * d.Omega_S * d.Omega_r / (4 * d.omega_trap), rel=1e-14)
    assert c["lam"] == pytest.approx(forward_map(d).lam, rel=1e-12)
    assert abs(c["lam_minus"]) < 1e-12 * c["lam"]
    e = effective_couplings(d, "exact")
    assert e["lam"] == pytest.approx(c["lam"], rel=1e-3)
    with pytest.raises(InvalidParameters):
        effective_couplings(d, "bogus")


def test_effective_model_matches_independent_construction():
    m = forward_map(drive())
    p = m.params
    n_max = 20
    a, ad = ladder(n_max)
    ref = (
        p.omega_c * np.kron(np.eye(2), ad @ a)
        + p.omega_q / 2 * np.kron(SZ, np.eye(n_max + 1))
        + m.lam * np.kron(SX, a @ a + ad @ ad)
        + p.U * np.kron(SZ, ad @ a)
    )
    H = build_effective(m, n_max)
    np.testing.assert_allclose(H, ref, atol=1e-12)
    assert np.linalg.eigvalsh(H)[0] == pytest.approx(np.linalg.eigvalsh(ref)[0], abs=1e-12)


def test_effective_decoupled_spectrum():
    m = forward_map(drive().replace(Omega_r=0.0, Omega_b=0.0))
    H = build_effective(m, 10)
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


@pytest.mark.parametrize("variant", [None, "approx", "exact"])
def test_effective_dynamics_keeps_even_phonon_numbers(variant):
    m = forward_map(drive())
    H = build_effective(m, 20, variant)
    T = 2 * math.pi / (10 * m.lam)
    traj = evolve(H, ground_product_state(20), T, T / 50, samples=11, check_step=False)
    for psi in traj.states:
        assert odd_population(psi, 20) < 1e-10
    assert traj.max_norm_drift < 1e-8


def test_zero_hamiltonian_is_identity():
    psi = np.array([0.6, 0.8j])
    traj = evolve(np.zeros((2, 2)), psi, 3.0, 0.1)
    np.testing.assert_allclose(traj.final, psi, atol=1e-15)


def test_diagonal_hamiltonian_phases():
    E = np.array([0.0, 1.0, 2.5])
    psi = np.ones(3) / math.sqrt(3)
    traj = evolve(np.diag(E), psi, 2.0, 0.01)
    np.testing.assert_allclose(traj.final, np.exp(-1j * E * 2.0) * psi, atol=1e-12)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (A + A.conj().T) / 4


def test_static_matches_dense_propagator():
    H = random_hermitian(12, 0)
    psi = np.zeros(12, complex)
    psi[0] = 1
    traj = evolve(H, psi, 5.0, 0.01)
    np.testing.assert_allclose(traj.final, exact_propagator(H, 5.0) @ psi, atol=1e-8)


def test_rk4_converges_at_fourth_order():
    H = random_hermitian(8, 1)
    psi = np.zeros(8, complex)
    psi[0] = 1
    exact = exact_propagator(H, 4.0) @ psi
    err = []
    for dt in (0.1, 0.05, 0.025):
        out = evolve(H, psi, 4.0, dt, method="rk4", norm_tol=1e-2, check_step=False).final
        err.append(1 - fidelity(out, exact) ** 0.5 + np.linalg.norm(out - exact))
    assert err[0] / err[1] == pytest.approx(16, rel=0.25)
    assert err[1] / err[2] == pytest.approx(16, rel=0.25)


def driven_two_level():
    sp = np.array([[0, 1], [0, 0]], complex)
    return TimeDependentHamiltonian(
        [DriveTerm("z", SZ, 0.5, 0.0), DriveTerm("x", sp, 0.7, 1.3)], 2
    )


def test_cfm4_converges_at_fourth_order():
    H = driven_two_level()
    psi = np.array([1, 0], complex)
    ref = evolve(H, psi, 6.0, 0.6 / 256, check_step=False).final
    err = [np.linalg.norm(evolve(H, psi, 6.0, dt, check_step=False).final - ref) for dt in (0.6, 0.3, 0.15)]
    assert err[0] / err[1] == pytest.approx(16, rel=0.3)
    assert err[1] / err[2] == pytest.approx(16, rel=0.3)


def test_cfm4_agrees_with_rk4_on_driven_system():
    H = driven_two_level()
    psi = np.array([1, 0], complex)
    a = evolve(H, psi, 6.0, 0.005).final
    b = evolve(H, psi, 6.0, 0.005, method="rk4").final
    assert fidelity(a, b) == pytest.approx(1.0, abs=1e-10)


def test_step_resolution_rule():
    H = build_full_drive(drive(), 8)
    dt_max = 2 * math.pi / (20 * H.max_frequency)
    with pytest.raises(StepTooLarge):
        evolve(H, ground_product_state(8), 10 * dt_max, 1.5 * dt_max)


def test_norm_drift_is_reported():
    H = random_hermitian(6, 2) * 10
    psi = np.zeros(6, complex)
    psi[0] = 1
    with pytest.raises(NormDrift):
        evolve(H, psi, 1.0, 0.2, method="rk4", check_step=False)


def test_input_validation():
    with pytest.raises(InvalidParameters):
        evolve(np.eye(2), np.array([1.0, 1.0]), 1.0, 0.1)
    with pytest.raises(InvalidParameters):
        evolve(np.eye(2), np.array([1.0, 0.0]), 1.0, 0.1, method="euler")


def test_qubit_rotation_maps_axes():
    V = qubit_basis_rotation()
    np.testing.assert_allclose(V @ V.conj().T, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(V @ SX @ V.conj().T, SZ, atol=1e-15)
    np.testing.assert_allclose(V @ SY @ V.conj().T, SX, atol=1e-15)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_rotating_frames_compose(t1, t2):
    d = drive()
    R = rotating_frame
    np.testing.assert_allclose(R(d, t1, 6) @ R(d, t2, 6), R(d, t1 + t2, 6), atol=1e-12)
    M = R(d, t1, 6)
    np.testing.assert_allclose(M @ M.conj().T, np.eye(14), atol=1e-12)


def test_frame_transform_at_zero_is_the_qubit_rotation():
    psi = ground_product_state(6)
    V = np.kron(qubit_basis_rotation(), np.eye(7))
    np.testing.assert_allclose(frame_transform(psi, drive(), 0.0), V @ psi, atol=1e-15)


def test_short_full_versus_effective():
    d = drive()
    lam = forward_map(d).lam
    (rep,) = compare_effective(d, 12, T=2 * math.pi / (100 * lam))
    assert rep.fidelity > 0.999
    assert rep.norm_drift < 1e-8
    assert rep.odd_population_effective < 1e-10


def test_trajectory_export():
    H = driven_two_level()
    traj = evolve(H, np.array([0, 1], complex), 1.0, 0.01, samples=11)
    # a one-mode layout: treat the 2-vector as qubit x (n_max = 0)
    rows = list(trajectory_rows(traj, 0))
    assert len(rows) == len(traj.times) == 11
    text = trajectory_to_csv(traj, 0)
    lines = text.strip().splitlines()
    assert lines[0].split(",") == list(TRAJECTORY_COLUMNS)
    assert len(lines) == 12
    assert float(lines[-1].split(",")[-1]) == pytest.approx(1.0, abs=1e-12)
