#!/usr/bin/env python3
"""
Test the wavepacket oracle: finite system, packet, RK4 and scattering runs
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from config import GAIN_NORM_RTOL, GROWTH_RATE_TOL
from errors import InvalidConfig, StepTooLarge
from four_site import FourSiteParams, closed_form_deficit, closed_form_rt, folded_four_site, four_site_center
from linalg import hermiticity_defect
from model import LeadAttachment, assemble_full_center_matrix, build_center
from scattering import solve_rt_direct
from wavepacket_oracle import (
    PROBE_COLUMNS,
    WavepacketConfig,
    build_finite_system,
    evolve,
    gaussian_packet,
    growing_modes,
    max_stable_step,
    mean_quasi_momentum,
    measure_partition,
    region_boundaries,
    run_wavepacket,
)


def uniform_chain():
    center = build_center([[0, -1], [-1, 0]])
    lead = LeadAttachment(kappa=1.0, g_left=1.0, g_right=1.0, joint_left=1, joint_right=2)
    return center, lead


def test_trivial_center_gives_uniform_chain():
    center, lead = uniform_chain()
    h = build_finite_system(center, lead, 2)
    expected = -(np.eye(6, k=1) + np.eye(6, k=-1))
    assert_array_equal(h, expected)


def test_leads_add_no_hermiticity_defect():
    center, lead = folded_four_site(FourSiteParams(0.8, 0.8))
    h = build_finite_system(center, lead, 5)
    assert hermiticity_defect(h) == pytest.approx(hermiticity_defect(assemble_full_center_matrix(center)))


def test_joint_rows_follow_lead_equations():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    n = 3
    h = build_finite_system(center, lead, n)
    assert h[n - 1, n + lead.joint_left - 1] == -np.conj(lead.g_left)
    assert h[n + lead.joint_right - 1, n + center.size] == -lead.g_right
    assert h[n - 2, n - 1] == -lead.kappa


def test_gaussian_packet():
    n, n_center = 600, 4
    psi = gaussian_packet(n, n_center, -300.0, 15.0, math.pi / 3)
    assert abs(np.linalg.norm(psi) - 1.0) <= 1e-14
    assert abs(mean_quasi_momentum(psi) - math.pi / 3) <= 0.01
    assert np.abs(psi[n:n + n_center]).max() <= 1e-12
    p_left, p_center, p_right = measure_partition(psi, region_boundaries(n, n_center))
    assert p_left == pytest.approx(1.0, abs=1e-12)
    assert p_center <= 1e-12 and p_right <= 1e-12


def test_partition_sums_to_norm():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=50) + 1j * rng.normal(size=50)
    parts = measure_partition(psi, (20, 24))
    assert sum(parts) == pytest.approx(np.linalg.norm(psi) ** 2, rel=1e-14)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        WavepacketConfig(chain_half_length=100)
    with pytest.raises(InvalidConfig):
        WavepacketConfig(sigma=2.0)
    with pytest.raises(InvalidConfig):
        WavepacketConfig(k0=0.0)
    with pytest.raises(InvalidConfig):
        WavepacketConfig(x0=10.0)
    with pytest.raises(InvalidConfig):
        WavepacketConfig(chain_half_length=200, x0=-180.0)
    config = WavepacketConfig()
    assert config.x0 == -300.0
    assert config.resolved_t_final(1.0) == pytest.approx(600.0 / (2 * math.sin(math.pi / 3)))


def test_evolve_zero_hamiltonian():
    psi0 = gaussian_packet(200, 2, -100.0, 10.0, 1.0)
    psi = evolve(np.zeros((402, 402)), psi0, 5.0, 0.1)
    assert_array_equal(psi, psi0)


def test_evolve_single_site_phase():
    u = 1.0
    psi = evolve(np.array([[u]]), np.array([1.0]), 1.0, 0.005)
    assert abs(psi[0] - np.exp(-1j * u)) <= 1e-10


def test_evolve_rejects_large_step():
    h = np.array([[2.0]])
    with pytest.raises(StepTooLarge):
        evolve(h, np.array([1.0]), 1.0, 0.1)
    assert max_stable_step(h) == pytest.approx(0.025)


def test_norm_conserved_on_hermitian_chain():
    center, lead = uniform_chain()
    n = 200
    h = build_finite_system(center, lead, n)
    psi0 = gaussian_packet(n, center.size, -100.0, 10.0, math.pi / 3)
    psi = evolve(h, psi0, 20.0, max_stable_step(h))
    assert abs(np.linalg.norm(psi) ** 2 - 1.0) <= 1e-8


@pytest.mark.parametrize("k0", [math.pi / 3, math.pi / 2 - 0.3, math.pi / 2 + 0.3])
def test_folded_ring_scattering_matches_plane_waves(k0):
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    result = run_wavepacket(center, lead, WavepacketConfig(chain_half_length=600, sigma=15.0, k0=k0))
    plane_wave = solve_rt_direct(center, lead, k0)
    assert abs(result.p_right - plane_wave.transmission) <= 2e-2
    assert abs(result.p_left - plane_wave.reflection) <= 2e-2
    assert abs(result.p_left + result.p_right - 1.0) <= 2e-2


def test_resonant_packet_is_transmitted():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    _, t = closed_form_rt(math.pi / 3, FourSiteParams(1.0, 1.0))
    result = run_wavepacket(center, lead, WavepacketConfig(k0=math.pi / 3), probe_every=500)
    assert abs(result.p_right - abs(t) ** 2) <= 2e-2
    assert abs(result.p_left) <= 2e-2
    assert list(result.probes.columns) == PROBE_COLUMNS
    assert result.probes["time"].iloc[0] == 0.0
    assert result.probes["time"].iloc[-1] == pytest.approx(result.t_final)
    assert result.probes["total_norm"].iloc[0] == pytest.approx(1.0, abs=1e-12)
    assert result.total_norm == pytest.approx(1.0, abs=2e-2)


def test_gain_ring_amplifies_by_the_closed_form_factor():
    p = FourSiteParams(2.0, 0.0)
    h, lead = four_site_center(p)
    config = WavepacketConfig(chain_half_length=400, sigma=15.0, k0=math.pi / 3)
    result = run_wavepacket(h, lead, config)
    expected = 1.0 - closed_form_deficit(config.k0, p)
    assert expected > 1.0
    assert result.projected_modes >= 1
    assert np.isfinite(result.total_norm)
    assert result.total_norm > 1.0
    assert abs(result.total_norm - expected) <= GAIN_NORM_RTOL * expected


def test_projector_removes_growing_mode():
    h = np.array([[0.5j, 0.2], [0.2, -0.5j]])
    projector = growing_modes(h)
    assert projector.count == 1
    assert projector.max_rate > GROWTH_RATE_TOL
    energies, vectors = np.linalg.eig(h)
    growing = vectors[:, np.argmax(energies.imag)]
    decaying = vectors[:, np.argmin(energies.imag)]
    assert np.abs(projector(growing)).max() <= 1e-12
    assert np.abs(projector(decaying) - decaying).max() <= 1e-12


def test_hermitian_system_has_no_growing_modes():
    center, lead = uniform_chain()
    projector = growing_modes(build_finite_system(center, lead, 20))
    assert projector.count == 0
    assert projector.interval(0.01) is None
    psi = np.arange(42, dtype=complex)
    assert projector(psi) is psi


def test_folded_ring_has_a_bound_growing_mode():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    rates = [growing_modes(build_finite_system(center, lead, n)).max_rate for n in (80, 160)]
    assert rates[0] == pytest.approx(0.26527, abs=1e-4)
    assert rates[1] == pytest.approx(rates[0], abs=1e-6)


def test_evolution_stays_bounded_with_projection():
    center, lead = folded_four_site(FourSiteParams(1.0, 1.0))
    result = run_wavepacket(center, lead, WavepacketConfig(chain_half_length=200, sigma=10.0, x0=-80.0))
    assert result.max_growth_rate == pytest.approx(0.26527, abs=1e-4)
    assert result.total_norm == pytest.approx(1.0, abs=2e-2)
