#!/usr/bin/env python3
"""
Test both r/t solvers, the lead wavefunction and spectrum sweeps
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import InvalidRange, InvalidSite, MomentumOutOfBand, SingularDelta
from four_site import (
    FourSiteParams,
    closed_form_deficit,
    folded_four_site,
    four_site_center,
    hermitian_four_site_center,
    transmission_T,
    transmission_Tprime,
)
from linalg import det
from model import LeadAttachment, assemble_delta, assemble_full_center_matrix, build_center
from scattering import (
    PointStatus,
    ScatteringSolution,
    coefficients_abc,
    current_deficit,
    dispersion,
    reconstruct_wavefunction,
    schrodinger_residual,
    schur_det,
    solve_rt_direct,
    solve_rt_formula,
    solve_rt_raw,
    spectrum,
)
from verify_suites import random_center, random_hermitian, random_lead


def uniform_chain():
    center = build_center([[0, -1], [-1, 0]])
    lead = LeadAttachment(kappa=1.0, g_left=1.0, g_right=1.0, joint_left=1, joint_right=2)
    return center, lead


def seeded_center():
    rng = np.random.default_rng(42)
    h_a = random_hermitian(rng, 3)
    h_b = random_hermitian(rng, 2)
    h_ab = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    lead = LeadAttachment(kappa=1.3, g_left=0.8 + 0.3j, g_right=1.1 - 0.5j, joint_left=1, joint_right=3)
    return build_center(h_a, h_b, h_ab), lead


def test_dispersion():
    assert dispersion(math.pi / 2, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert dispersion(math.pi / 3, 1.0) == pytest.approx(-1.0)
    for k in (1e-12, 0.0, math.pi, -0.5, 4.0):
        with pytest.raises(MomentumOutOfBand):
            dispersion(k, 1.0)


@pytest.mark.parametrize("solver", [solve_rt_formula, solve_rt_direct])
def test_uniform_chain_is_transparent(solver):
    center, lead = uniform_chain()
    for k in (0.3, 1.2, 2.5):
        sol = solver(center, lead, k)
        assert abs(sol.r) <= 1e-12
        assert abs(sol.t) == pytest.approx(1.0, abs=1e-12)
        assert sol.transmission == pytest.approx(1.0, abs=1e-12)


def test_uniform_chain_coefficients_at_band_center():
    center, lead = uniform_chain()
    abc = coefficients_abc(center, lead, math.pi / 2)
    assert abc.a == pytest.approx(0.0, abs=1e-15)
    assert abc.c == pytest.approx(0.0, abs=1e-15)
    assert abc.b == pytest.approx(-1.0)
    assert abc.b_tilde == pytest.approx(-1.0)
    assert abc.eta == pytest.approx(-2.0)


def test_abc_reality_on_random_center():
    rng = np.random.default_rng(5)
    center = random_center(rng, min_n_b=1)
    lead = random_lead(rng, center.n_a)
    abc = coefficients_abc(center, lead, 0.7)
    assert abs(abc.a.imag) <= 1e-10 * abs(abc.a)
    assert abs(abc.c.imag) <= 1e-10 * abs(abc.c)
    assert abs(abc.b_tilde - np.conj(abc.b)) <= 1e-10 * abs(abc.b)


def test_cross_solver_agreement():
    center, lead = seeded_center()
    formula = solve_rt_formula(center, lead, 1.0)
    direct = solve_rt_direct(center, lead, 1.0)
    assert abs(formula.r - direct.r) <= 1e-10
    assert abs(formula.t - direct.t) <= 1e-10
    assert_allclose(formula.alpha, direct.alpha, atol=1e-10)
    assert_allclose(formula.beta, direct.beta, atol=1e-10)
    assert abs(direct.deficit) <= 1e-10


def test_joint_amplitudes_follow_lead_rows():
    center, lead = seeded_center()
    sol = solve_rt_direct(center, lead, 1.0)
    assert sol.energy == pytest.approx(-2 * lead.kappa * math.cos(1.0))
    expected_left = lead.kappa / np.conj(lead.g_left) * (1 + sol.r)
    expected_right = lead.kappa / np.conj(lead.g_right) * sol.t
    assert abs(sol.alpha[lead.joint_left - 1] - expected_left) <= 1e-10
    assert abs(sol.alpha[lead.joint_right - 1] - expected_right) <= 1e-10


def test_substitute_back_residual():
    center, lead = seeded_center()
    for k in (0.4, 1.0, 2.2):
        sol = solve_rt_direct(center, lead, k)
        assert schrodinger_residual(center, lead, sol) <= 1e-10


def test_resonance_and_total_reflection_of_folded_ring():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    sol = solve_rt_formula(center, lead, math.pi / 3)
    assert sol.transmission == pytest.approx(1.0, abs=1e-10)

    # Delta is singular at E = 0; only the augmented system survives
    with pytest.raises(SingularDelta):
        solve_rt_formula(center, lead, math.pi / 2)
    sol = solve_rt_direct(center, lead, math.pi / 2)
    assert abs(sol.t) <= 1e-10
    assert abs(sol.r) == pytest.approx(1.0, abs=1e-10)


def test_gain_ring_deficit_matches_closed_form():
    p = FourSiteParams(2.0, 0.0)
    h, lead = four_site_center(p)
    k = math.pi / 3
    sol = solve_rt_raw(h, lead, k)
    assert sol.deficit == pytest.approx(closed_form_deficit(k, p), abs=1e-10)
    assert sol.deficit < 0
    assert current_deficit(sol) == pytest.approx(sol.deficit)


def test_solve_rt_raw_joint_outside_center():
    lead = LeadAttachment(kappa=1.0, g_left=1, g_right=1, joint_left=1, joint_right=5)
    with pytest.raises(InvalidSite):
        solve_rt_raw(np.zeros((4, 4)), lead, 1.0)


def _solution(k, r, t):
    return ScatteringSolution(k=k, energy=-2 * math.cos(k), r=r, t=t, alpha=np.zeros(1), beta=np.zeros(0), deficit=0.0)


def test_reconstruct_wavefunction():
    sol = _solution(math.pi / 2, 0.0, 1.0)
    assert reconstruct_wavefunction(sol, 2) == pytest.approx(-1.0)
    k, r = 0.8, 0.3 - 0.2j
    sol = _solution(k, r, 0.5)
    assert reconstruct_wavefunction(sol, -1) == pytest.approx(np.exp(-1j * k) + r * np.exp(1j * k))
    with pytest.raises(InvalidSite):
        reconstruct_wavefunction(sol, 0)


def test_current_deficit_of_total_reflection():
    assert current_deficit(_solution(1.0, 1.0, 0.0)) == 0.0


def test_schur_det_matches_lu_det():
    center, _ = seeded_center()
    e = -2 * math.cos(1.0)
    d = det(assemble_delta(center, e).matrix)
    assert abs(d.imag) <= 1e-10 * abs(d)
    assert schur_det(center, e) == pytest.approx(d, rel=1e-9)
    single, _ = uniform_chain()
    assert schur_det(single, 0.5) == pytest.approx(det(assemble_delta(single, 0.5).matrix))


def test_spectrum_of_uniform_chain():
    center, lead = uniform_chain()
    result = spectrum(center, lead, 0.1, math.pi - 0.1, 21)
    assert np.all(np.diff(result.ks) > 0)
    assert_allclose(result.transmissions, 1.0, atol=1e-12)
    assert all(p.status is PointStatus.ok for p in result.entries)


def test_spectrum_of_folded_ring_matches_closed_form():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    result = spectrum(center, lead, 0.1, math.pi - 0.1, 101)
    expected = np.array([transmission_T(k, 1.0) for k in result.ks])
    assert np.abs(result.transmissions - expected).max() <= 1e-10


def test_hermitian_side_coupling_never_transmits_fully():
    h, lead = hermitian_four_site_center(1.0)
    result = spectrum(h, lead, 0.1, math.pi - 0.1, 101)
    expected = np.array([transmission_Tprime(k, 1.0) for k in result.ks])
    assert np.all(result.transmissions < 1.0)
    assert np.abs(result.transmissions - expected).max() <= 1e-10


def test_spectrum_flags_singular_points():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    result = spectrum(center, lead, 0.5, math.pi - 0.5, 3, method="formula")
    statuses = [p.status for p in result.entries]
    assert statuses == [PointStatus.ok, PointStatus.singular, PointStatus.ok]
    assert math.isnan(result.entries[1].transmission)
    assert len(result.ok_entries()) == 2


def test_spectrum_order_is_independent_of_workers():
    center, lead = seeded_center()
    serial = spectrum(center, lead, 0.2, 2.9, 40, workers=1)
    parallel = spectrum(center, lead, 0.2, 2.9, 40, workers=4)
    assert serial.entries == parallel.entries


def test_spectrum_rejects_bad_ranges():
    center, lead = uniform_chain()
    with pytest.raises(InvalidRange):
        spectrum(center, lead, 1.0, 0.5, 10)
    with pytest.raises(InvalidRange):
        spectrum(center, lead, 0.0, 1.0, 10)
    with pytest.raises(InvalidRange):
        spectrum(center, lead, 0.5, 1.0, 1)
    with pytest.raises(InvalidRange):
        spectrum(assemble_full_center_matrix(center), lead, 0.5, 1.0, 5, method="formula")
