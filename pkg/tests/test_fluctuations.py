import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dickestark import BogoliubovUnstable, DomainError, WrongPhase
from dickestark.fluctuations import (
    PAIR,
    QUADRATURE,
    QuadraticBosonForm,
    _sp_coefficients,
    bogoliubov_diagonalize,
    np_effective,
    np_squeezing,
    quadrature_variances,
    sp_effective,
    sp_squeezing,
    spin_moments,
)
from dickestark.meanfield import order_parameter_closed_form
from dickestark.model import ModelParams, collapse_coupling, critical_rabi

from oracles import quadratic_form_spectrum

stable_forms = st.builds(
    lambda w, ratio, c, shape: (w, ratio, c, shape),
    st.floats(0.05, 3.0),
    st.floats(-0.6, 0.6),
    st.floats(-2.0, 2.0),
    st.sampled_from([PAIR, QUADRATURE]),
)


def make_form(w, ratio, c, shape):
    """A form whose pair-shape version has ``2 lam / omega = ratio``."""
    if shape == PAIR:
        return QuadraticBosonForm(w, ratio * w / 2, c, PAIR)
    # pair omega = w_q + 2 lam; want 2 lam = ratio (w_q + 2 lam)
    lam = ratio * w / (2 * (1 - ratio))
    return QuadraticBosonForm(w, lam, c, QUADRATURE)


def test_textbook_examples():
    r = bogoliubov_diagonalize(QuadraticBosonForm(1.0, 0.25, 0.0, PAIR))
    assert r.excitation_energy == pytest.approx(math.sqrt(0.75), abs=1e-14)
    assert r.squeeze_r == pytest.approx(0.5 * math.atanh(0.5), abs=1e-14)
    assert r.squeeze_r == pytest.approx(0.27465, abs=1e-5)
    free = bogoliubov_diagonalize(QuadraticBosonForm(0.7, 0.0, 0.0, PAIR))
    assert (free.excitation_energy, free.squeeze_r, free.ground_shift) == (0.7, 0.0, 0.0)


def test_unstable_forms_raise():
    with pytest.raises(BogoliubovUnstable):
        bogoliubov_diagonalize(QuadraticBosonForm(1.0, 0.5, 0.0, PAIR))
    with pytest.raises(BogoliubovUnstable):
        bogoliubov_diagonalize(QuadraticBosonForm(1.0, -0.3, 0.0, QUADRATURE))  # pair omega 0.4
    assert not QuadraticBosonForm(1.0, -0.3, 0.0, QUADRATURE).stable


def test_unknown_shape_rejected():
    with pytest.raises(ValueError):
        QuadraticBosonForm(1.0, 0.1, 0.0, "cubic")


@given(stable_forms)
def test_shape_conversion_is_exact(args):
    f = make_form(*args)
    a = bogoliubov_diagonalize(f)
    for g in (f.to_pair(), f.to_quadrature(), f.to_pair().to_quadrature()):
        b = bogoliubov_diagonalize(g)
        assert b.excitation_energy == pytest.approx(a.excitation_energy, rel=1e-12, abs=1e-15)
        assert b.squeeze_r == pytest.approx(a.squeeze_r, rel=1e-12, abs=1e-15)
        assert b.ground_shift == pytest.approx(a.ground_shift, rel=1e-12, abs=1e-14)


@given(stable_forms)
def test_excitation_energy_identity(args):
    p = make_form(*args).to_pair()
    eps = bogoliubov_diagonalize(p).excitation_energy
    assert eps >= 0
    assert eps**2 == pytest.approx(p.omega**2 - 4 * p.lam**2, rel=1e-12)


@given(stable_forms)
def test_matches_truncated_fock_oracle(args):
    f = make_form(*args)
    res = bogoliubov_diagonalize(f)
    e80, gap80, vx, vp = quadratic_form_spectrum(f.omega, f.lam, f.constant, f.shape, 80)
    e120, gap120, _, _ = quadratic_form_spectrum(f.omega, f.lam, f.constant, f.shape, 120)
    assert abs(gap120 - gap80) < 1e-8
    assert res.excitation_energy == pytest.approx(gap120, abs=1e-8)
    assert res.ground_shift == pytest.approx(e120, abs=1e-8)
    want_x, want_p = quadrature_variances(res.squeeze_r)
    assert vx == pytest.approx(want_x, abs=1e-8)
    assert vp == pytest.approx(want_p, abs=1e-8)


@given(st.floats(-2.0, 2.0))
def test_variance_product_is_minimal(r):
    vx, vp = quadrature_variances(r)
    assert vx * vp == pytest.approx(1 / 16, rel=1e-14)


# normal phase -------------------------------------------------------------

def test_np_effective_reference_point():
    f = np_effective(ModelParams(0.015, 0.2, 0.0168, 50))
    assert f.shape == QUADRATURE
    assert f.omega == 0.015 and f.constant == pytest.approx(-0.375)
    assert f.lam == pytest.approx(-2 * 0.04 / (50 * (2 - 0.84)), rel=1e-14)
    assert f.lam == pytest.approx(-0.0013793, abs=1e-7)


def test_np_squeezing_reference_point():
    r = np_squeezing(ModelParams(0.015, 0.2, 0.0168, 50))
    assert r == pytest.approx(0.25 * math.log(1 - 0.32 / (0.75 * 1.16)), rel=1e-14)
    assert r == pytest.approx(-0.11464, abs=1e-5)


def test_np_decoupled_limit():
    p = ModelParams(0.015, 0.0, 0.0168, 50)
    assert np_effective(p).lam == 0.0
    assert np_squeezing(p) == 0.0
    with pytest.raises(DomainError):
        np_squeezing(ModelParams(0.0, 0.0, 0.0, 50))


def test_np_effective_refuses_other_phases():
    with pytest.raises(WrongPhase):
        np_effective(ModelParams(0.015, 0.45, 0.0, 50))


@given(U=st.floats(0.0, 0.03), frac=st.floats(0.0, 0.999))
def test_np_squeezing_formula_matches_diagonalizer(U, frac):
    p = ModelParams(0.015, 0.0, U, 50)
    p = p.replace(g=frac * critical_rabi(p))
    r = np_squeezing(p)
    assert r <= 0
    assert r == pytest.approx(bogoliubov_diagonalize(np_effective(p)).squeeze_r, abs=1e-10)


@pytest.mark.parametrize("U", [0.0, 0.0168, 0.03])
def test_gap_closes_at_threshold(U):
    base = ModelParams(0.015, 0.0, U, 50)
    gt = critical_rabi(base)
    gaps = [
        bogoliubov_diagonalize(np_effective(base.replace(g=gt * (1 - 10.0**-k)))).excitation_energy
        for k in (2, 3, 4)
    ]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


# superradiant phase -------------------------------------------------------

def sp_point(U, frac):
    base = ModelParams(0.015, 0.0, U, 50)
    gt, gc = critical_rabi(base), collapse_coupling(base)
    return base.replace(g=gt + frac * (gc - gt))


@given(U=st.floats(0.0, 0.03), frac=st.floats(0.02, 0.9))
def test_sp_auxiliary_invariants(U, frac):
    p = sp_point(U, frac)
    sp, form = sp_effective(p)
    N = p.N
    beta = sp.alpha * math.sqrt(N)
    assert 0 < sp.alpha < 1
    assert sp.chi == pytest.approx(math.sqrt(1 - sp.alpha**2), rel=1e-14)
    assert sp.delta == pytest.approx(1 - beta**2 / (N - beta**2), rel=1e-12, abs=1e-14)
    assert sp.omega_c_prime == pytest.approx(p.omega_c + p.U * beta**2 - p.U * N / 2, rel=1e-14)
    assert abs(sp.residual) < 1e-6
    assert form.omega == sp.omega1 and form.lam == sp.omega2
    assert sp.energy_scale == 2 * sp.omega_c_prime


def test_sp_resolve_reports_both_values():
    sp, _ = sp_effective(sp_point(0.0168, 0.3))
    assert sp.resolved
    assert abs(sp.residual_meanfield) > 1e-6
    assert sp.beta_meanfield == pytest.approx(order_parameter_closed_form(sp_point(0.0168, 0.3)))
    assert sp.alpha * math.sqrt(50) != pytest.approx(sp.beta_meanfield, rel=1e-6)


def test_sp_lambda0_is_one_without_cavity_squeezing():
    c = _sp_coefficients(ModelParams(0.015, 0.0, 0.0168, 50), 0.3)
    assert c["x"] == 0.0 and c["lambda0"] == 1.0


@given(U=st.floats(0.0, 0.03), frac=st.floats(0.02, 0.9))
def test_sp_squeezing_is_the_stability_ratio(U, frac):
    p = sp_point(U, frac)
    sp, form = sp_effective(p)
    r = sp_squeezing(p)
    assert r == pytest.approx(0.25 * math.log(1 + 4 * sp.omega2 / sp.omega1), abs=1e-12)


def test_sp_form_matches_oracle():
    p = sp_point(0.0168, 0.5)
    _, form = sp_effective(p)
    res = bogoliubov_diagonalize(form)
    _, gap, vx, vp = quadratic_form_spectrum(form.omega, form.lam, form.constant, form.shape, 120)
    assert res.excitation_energy == pytest.approx(gap, abs=1e-9)
    assert vx * vp == pytest.approx(1 / 16, abs=1e-9)


def test_sp_unstable_next_to_collapse():
    with pytest.raises(BogoliubovUnstable):
        sp_effective(sp_point(0.0168, 0.99))


def test_sp_effective_refuses_normal_phase():
    with pytest.raises(WrongPhase):
        sp_effective(ModelParams(0.015, 0.2, 0.0, 50))


# spin moments -------------------------------------------------------------

def test_normal_phase_spin_means():
    m = spin_moments(ModelParams(0.015, 0.2, 0.0168, 50))
    assert (m.mean_Jx, m.mean_Jy, m.mean_Jz) == (0.0, 0.0, -25.0)
    assert m.var_Jx > 0 and m.var_Jy > 0 and m.var_Jz >= 0
    assert m.var_Jx * m.var_Jy == pytest.approx(50**2 / 16, rel=1e-12)
    sx, sy = m.ellipse_axes
    assert sx == pytest.approx(math.sqrt(m.var_Jx))


@given(U=st.floats(0.0, 0.03), frac=st.floats(0.02, 0.9))
def test_superradiant_spin_means(U, frac):
    p = sp_point(U, frac)
    m = spin_moments(p)
    beta = order_parameter_closed_form(p)
    assert m.mean_Jz == pytest.approx(beta**2 - 25)
    assert m.mean_Jx == pytest.approx(beta * math.sqrt(50 - beta**2))
    assert m.mean_Jy == 0.0
    assert min(m.var_Jx, m.var_Jy, m.var_Jz) >= 0


def test_normal_phase_fluctuations_grow_towards_threshold():
    base = ModelParams(0.015, 0.0, 0.0168, 50)
    gt = critical_rabi(base)
    vx = [spin_moments(base.replace(g=f * gt)).var_Jx for f in (0.0, 0.5, 0.9, 0.99)]
    assert vx == sorted(vx)
    assert vx[0] == pytest.approx(50 / 4)


def test_spin_moments_undefined_in_collapse():
    with pytest.raises(WrongPhase):
        spin_moments(ModelParams(0.015, 0.6, 0.0, 50))
