#!/usr/bin/env python3
"""
Test center validation, matrix assembly and the network spec document
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_array_equal

from errors import DimensionMismatch, InvalidLead, NotHermitian, ParseError, ValidationError
from four_site import FourSiteParams, folded_four_site
from model import (
    LeadAttachment,
    assemble_delta,
    assemble_full_center_matrix,
    build_center,
    check_lead,
    load_network_spec,
    parse_network_spec,
    serialize_network_spec,
)
from verify_suites import random_center, random_lead

SPECS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "specs")

MINIMAL = """{
  "kappa": 1.0,
  "g_left": [1.0, 0.0],
  "g_right": [1.0, 0.0],
  "joint_left": 1,
  "joint_right": 2,
  "H_A": [[[0.0, 0.0], [-1.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0]]],
  "H_B": [],
  "H_AB": []
}"""


def test_two_site_center_without_cluster_b():
    center = build_center([[0, -1], [-1, 0]])
    assert (center.n_a, center.n_b, center.size) == (2, 0, 2)
    assert_array_equal(assemble_full_center_matrix(center), [[0, -1], [-1, 0]])


def test_non_hermitian_block_rejected():
    with pytest.raises(NotHermitian) as info:
        build_center([[0, 1], [0, 0]])
    assert info.value.block == "H_A"
    assert info.value.defect == pytest.approx(1.0)
    with pytest.raises(NotHermitian):
        build_center([[0]], [[1j]], [[1]])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        build_center([[0, 1]])
    with pytest.raises(DimensionMismatch):
        build_center(np.eye(2), np.eye(1), np.ones((1, 1)))


def test_center_is_immutable():
    center = build_center(np.eye(2))
    with pytest.raises(ValueError):
        center.h_a[0, 0] = 5


def test_folded_four_site_blocks_are_valid():
    center, _ = folded_four_site(FourSiteParams(1.0, 1.0))
    assert (center.n_a, center.n_b) == (3, 1)


def test_imaginary_coupling_block():
    gamma = 0.7
    center = build_center(np.zeros((2, 2)), np.zeros((2, 2)), 1j * gamma * np.eye(2))
    full = assemble_full_center_matrix(center)
    assert_array_equal(full[2:, :2], 1j * gamma * np.eye(2))


def test_hermitian_and_anti_hermitian_parts():
    rng = np.random.default_rng(4)
    center = random_center(rng, min_n_b=1)
    m = assemble_full_center_matrix(center)
    n_a = center.n_a
    herm = (m + m.conj().T) / 2
    anti = (m - m.conj().T) / 2
    assert np.abs(herm[:n_a, n_a:]).max() == 0.0
    assert np.abs(anti[:n_a, :n_a]).max() <= 1e-12
    assert np.abs(anti[n_a:, n_a:]).max() <= 1e-12
    np.testing.assert_allclose(anti[:n_a, n_a:], center.h_ab)
    np.testing.assert_allclose(anti[n_a:, :n_a], -center.h_ab.conj().T)


def test_assemble_delta():
    rng = np.random.default_rng(2)
    center = random_center(rng)
    assert_array_equal(assemble_delta(center, 0.0).matrix, assemble_full_center_matrix(center))
    e = -2 * np.cos(1.0)
    delta = assemble_delta(center, e)
    assert delta.energy == e
    assert_array_equal(delta.matrix, assemble_full_center_matrix(center) - e * np.eye(center.size))
    single = build_center([[0.3]])
    assert_array_equal(assemble_delta(single, 1.0).matrix, [[0.3 - 1.0]])


def test_lead_validation():
    with pytest.raises(InvalidLead):
        LeadAttachment(kappa=1.0, g_left=1, g_right=1, joint_left=1, joint_right=1)
    with pytest.raises(InvalidLead):
        LeadAttachment(kappa=0.0, g_left=1, g_right=1, joint_left=1, joint_right=2)
    with pytest.raises(InvalidLead):
        LeadAttachment(kappa=1j, g_left=1, g_right=1, joint_left=1, joint_right=2)
    with pytest.raises(InvalidLead):
        LeadAttachment(kappa=1.0, g_left=0, g_right=1, joint_left=1, joint_right=2)
    with pytest.raises(InvalidLead):
        LeadAttachment(kappa=1.0, g_left=1, g_right=1, joint_left=0, joint_right=2)


def test_lead_on_cluster_b_rejected():
    center, _ = folded_four_site(FourSiteParams(1.0, 1.0))
    lead = LeadAttachment(kappa=1.0, g_left=1, g_right=1, joint_left=1, joint_right=4)
    with pytest.raises(InvalidLead):
        check_lead(center, lead)


def test_parse_minimal_document():
    center, lead = parse_network_spec(MINIMAL)
    assert center.n_b == 0
    assert (lead.joint_left, lead.joint_right) == (1, 2)
    assert lead.g_left == 1.0


def test_parse_errors():
    with pytest.raises(ValidationError):
        parse_network_spec(MINIMAL.replace('"joint_right": 2', '"joint_right": 1'))
    with pytest.raises(ParseError) as info:
        parse_network_spec(MINIMAL.replace('"kappa": 1.0', '"kappa": 1.0, "extra": 3'))
    assert info.value.field == "extra"
    with pytest.raises(ParseError) as info:
        parse_network_spec(MINIMAL.replace('"kappa": 1.0', '"kappa": "one"'))
    assert info.value.field == "kappa"
    assert info.value.line == 2
    with pytest.raises(ParseError):
        parse_network_spec("{ not json")
    document = json.loads(MINIMAL)
    del document["H_B"]
    with pytest.raises(ParseError):
        parse_network_spec(json.dumps(document))


def test_shipped_four_site_spec_matches_constructor():
    center, lead = load_network_spec(os.path.join(SPECS, "four_site.json"))
    expected, expected_lead = folded_four_site(FourSiteParams(1.0, 1.0))
    assert center == expected
    assert lead == expected_lead


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_serialize_parse_round_trip(seed):
    rng = np.random.default_rng(seed)
    center = random_center(rng)
    lead = random_lead(rng, center.n_a)
    parsed, parsed_lead = parse_network_spec(serialize_network_spec(center, lead))
    assert parsed == center
    assert parsed_lead == lead
