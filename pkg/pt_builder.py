"""
Parity-symmetric graphs with PT-symmetric on-site potentials, and the fold
to the two-cluster block form.

Site order of H_PT is (axis sites 1..n1, mirror sites n1+1..n1+n2, their
images n1+n2+1..n1+2n2). The fold basis is (axis sites, symmetric
combinations, antisymmetric combinations); the first two groups form
cluster A and the antisymmetric combinations form cluster B.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from config import HERMITICITY_TOL
from errors import DimensionMismatch, JointOutsideAxis, NotHermitian, ParseError, ValidationError
from linalg import as_complex_matrix, hermiticity_defect
from model import (
    LeadAttachment,
    build_center,
    complex_pair,
    line_of,
    load_document,
    matrix_rows,
    parse_complex,
    parse_int,
    parse_matrix,
    parse_number,
)

logger = logging.getLogger(__name__)

PT_FIELDS = (
    "n1", "n2", "H_gamma", "H_alpha", "H_alpha_beta", "H_gamma_alpha", "V", "generalized",
    "kappa", "g_left", "g_right", "joint_left", "joint_right",
)
PT_REQUIRED = ("n1", "n2", "H_gamma", "H_alpha", "H_alpha_beta", "H_gamma_alpha", "V")


@dataclass(frozen=True, eq=False)
class PTGraphSpec:
    """
    Real parity-symmetric graph. On-axis potentials U_j sit on the diagonal of
    h_gamma; V_j sits on mirror site n1+j and V_j^* on its image.
    """

    n1: int
    n2: int
    h_gamma: np.ndarray
    h_alpha: np.ndarray
    h_gamma_alpha: np.ndarray
    h_alpha_beta: np.ndarray
    v: np.ndarray

    generalized = False

    @property
    def size(self):
        return self.n1 + 2 * self.n2

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (self.n1, self.n2) == (other.n1, other.n2) and all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("h_gamma", "h_alpha", "h_gamma_alpha", "h_alpha_beta", "v")
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GeneralPTGraphSpec(PTGraphSpec):
    """Same layout with complex Hermitian blocks and a complex h_gamma_alpha."""

    generalized = True


def _frozen(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def _check_shape(block, shape, name):
    if block.shape != shape:
        raise DimensionMismatch(f"{name} must be {shape[0]}x{shape[1]}, got {block.shape}")


def _validate_blocks(n1, n2, h_gamma, h_alpha, h_gamma_alpha, h_alpha_beta, v, generalized):
    if n1 < 1 or n2 < 1:
        raise DimensionMismatch(f"need n1 >= 1 and n2 >= 1, got n1={n1}, n2={n2}")
    blocks = {
        "H_gamma": as_complex_matrix(h_gamma, "H_gamma"),
        "H_alpha": as_complex_matrix(h_alpha, "H_alpha"),
        "H_gamma_alpha": as_complex_matrix(h_gamma_alpha, "H_gamma_alpha"),
        "H_alpha_beta": as_complex_matrix(h_alpha_beta, "H_alpha_beta"),
    }
    _check_shape(blocks["H_gamma"], (n1, n1), "H_gamma")
    _check_shape(blocks["H_alpha"], (n2, n2), "H_alpha")
    _check_shape(blocks["H_gamma_alpha"], (n1, n2), "H_gamma_alpha")
    _check_shape(blocks["H_alpha_beta"], (n2, n2), "H_alpha_beta")
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape != (n2,) or not np.all(np.isfinite(v)):
        raise DimensionMismatch(f"V must hold {n2} finite entries, got {v.shape}")

    for name in ("H_gamma", "H_alpha", "H_alpha_beta"):
        defect = hermiticity_defect(blocks[name])
        if defect > HERMITICITY_TOL:
            raise NotHermitian(name, defect)
    if not generalized:
        for name, block in blocks.items():
            if np.max(np.abs(block.imag), initial=0.0) > HERMITICITY_TOL:
                raise ValidationError(f"{name} must be real for a PT-symmetric graph")
    return blocks, v


def build_pt_spec(n1, n2, h_gamma, h_alpha, h_gamma_alpha, h_alpha_beta, v):
    blocks, v = _validate_blocks(n1, n2, h_gamma, h_alpha, h_gamma_alpha, h_alpha_beta, v, False)
    return PTGraphSpec(
        n1, n2,
        _frozen(blocks["H_gamma"].real), _frozen(blocks["H_alpha"].real),
        _frozen(blocks["H_gamma_alpha"].real), _frozen(blocks["H_alpha_beta"].real),
        _frozen(v),
    )


def build_general_pt_spec(n1, n2, h_gamma, h_alpha, h_gamma_alpha, h_alpha_beta, v):
    blocks, v = _validate_blocks(n1, n2, h_gamma, h_alpha, h_gamma_alpha, h_alpha_beta, v, True)
    return GeneralPTGraphSpec(
        n1, n2,
        _frozen(blocks["H_gamma"]), _frozen(blocks["H_alpha"]),
        _frozen(blocks["H_gamma_alpha"]), _frozen(blocks["H_alpha_beta"]),
        _frozen(v),
    )


def h_delta(spec):
    """diag(i Im V_j)."""
    return np.diag(1j * spec.v.imag)


def alpha_block(spec):
    """H_alpha with Re(V) added to its diagonal."""
    return spec.h_alpha + np.diag(spec.v.real)


def assemble_hpt(spec):
    """
    [[H_g, H_ga, H_ga], [H_ga^+, H_a + H_d, H_ab], [H_ga^+, H_ab^*, H_a - H_d]].
    For a real spec H_ab^* = H_ab.
    """
    h_a = alpha_block(spec)
    h_d = h_delta(spec)
    h_ga = spec.h_gamma_alpha
    return np.block([
        [spec.h_gamma, h_ga, h_ga],
        [h_ga.conj().T, h_a + h_d, spec.h_alpha_beta],
        [h_ga.conj().T, spec.h_alpha_beta.conj(), h_a - h_d],
    ])


def parity_matrix(spec):
    """Permutation fixing the axis and swapping each mirror site with its image."""
    n = spec.size
    p = np.zeros((n, n), dtype=np.complex128)
    for j in range(spec.n1):
        p[j, j] = 1.0
    for j in range(spec.n1, spec.n1 + spec.n2):
        p[j, j + spec.n2] = 1.0
        p[j + spec.n2, j] = 1.0
    return p


def check_pt_symmetry(h, p):
    """max |P conj(H) P^T - H|; zero exactly when H commutes with PT."""
    h = as_complex_matrix(h, "H")
    p = as_complex_matrix(p, "P")
    if h.shape != p.shape or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"H {h.shape} and P {p.shape} must be square and equal in size")
    if h.size == 0:
        return 0.0
    return float(np.max(np.abs(p @ h.conj() @ p.T - h)))


def fold_unitary(spec):
    """Real orthogonal U; rows are axis sites, (|j> + |j~>)/sqrt2, then (|j> - |j~>)/sqrt2."""
    n1, n2 = spec.n1, spec.n2
    u = np.zeros((spec.size, spec.size))
    s = 1.0 / np.sqrt(2.0)
    u[:n1, :n1] = np.eye(n1)
    for j in range(n2):
        mirror, image = n1 + j, n1 + n2 + j
        u[n1 + j, mirror] = s
        u[n1 + j, image] = s
        u[n1 + n2 + j, mirror] = s
        u[n1 + n2 + j, image] = -s
    return u


def folded_lead(spec, lead):
    """Joints keep their indices under the fold but must be axis sites."""
    for name in ("joint_left", "joint_right"):
        joint = getattr(lead, name)
        if joint > spec.n1:
            raise JointOutsideAxis(f"{name}={joint} is a mirror site; leads must attach to axis sites 1..{spec.n1}")
    return lead


def _fold_blocks(spec):
    n1, n2 = spec.n1, spec.n2
    h_a_mirror = alpha_block(spec)
    sqrt2 = np.sqrt(2.0)
    cluster_a = np.block([
        [spec.h_gamma, sqrt2 * spec.h_gamma_alpha],
        [sqrt2 * spec.h_gamma_alpha.conj().T, h_a_mirror + spec.h_alpha_beta.real],
    ])
    cluster_b = h_a_mirror - spec.h_alpha_beta.real
    coupling = np.vstack([
        np.zeros((n1, n2), dtype=np.complex128),
        h_delta(spec) - 1j * spec.h_alpha_beta.imag,
    ])
    return cluster_a, cluster_b, coupling


def fold(spec, lead=None):
    """
    Fold H_PT into the two-cluster form: H_A = [[H_g, sqrt2 H_ga], [sqrt2 H_ga^+, H_a + H_ab]],
    H_B = H_a - H_ab, H_AB = [0; H_d]. The coupling is anti-Hermitian since H_d^+ = -H_d.
    """
    if spec.generalized:
        return fold_generalized(spec, lead)
    if lead is not None:
        folded_lead(spec, lead)
    center = build_center(*_fold_blocks(spec))
    logger.debug(f"folded PT graph n1={spec.n1}, n2={spec.n2} into n_a={center.n_a}, n_b={center.n_b}")
    return center


def fold_generalized(spec, lead=None):
    """
    Fold the Hermitian-block variant whose lower mirror block is H_ab^*:
    H_A gets H_a + Re(H_ab), H_B = H_a - Re(H_ab) and H_AB = [0; H_d - i Im(H_ab)].
    i Im(H_ab) is Hermitian, so the coupling stays anti-Hermitian.
    """
    if lead is not None:
        folded_lead(spec, lead)
    return build_center(*_fold_blocks(spec))


# --- PT spec document ---

def parse_pt_spec(text):
    """Parse a PT spec JSON document into (PTGraphSpec or GeneralPTGraphSpec, LeadAttachment)."""
    document = load_document(text, PT_FIELDS, PT_REQUIRED)
    generalized = document.get("generalized", False)
    if not isinstance(generalized, bool):
        raise ParseError("expected true or false", line_of(text, "generalized"), "generalized")

    n1 = parse_int(document["n1"], "n1", text)
    n2 = parse_int(document["n2"], "n2", text)
    blocks = {
        key: parse_matrix(document[key], key, text, complex_entries=generalized)
        for key in ("H_gamma", "H_alpha", "H_gamma_alpha", "H_alpha_beta")
    }
    if not isinstance(document["V"], list):
        raise ParseError("expected an array of [re, im] pairs", line_of(text, "V"), "V")
    v = np.array([parse_complex(entry, "V", text) for entry in document["V"]], dtype=np.complex128)

    build = build_general_pt_spec if generalized else build_pt_spec
    spec = build(n1, n2, blocks["H_gamma"], blocks["H_alpha"], blocks["H_gamma_alpha"], blocks["H_alpha_beta"], v)

    lead = LeadAttachment(
        kappa=parse_number(document.get("kappa", 1.0), "kappa", text),
        g_left=parse_complex(document.get("g_left", [1.0, 0.0]), "g_left", text),
        g_right=parse_complex(document.get("g_right", [1.0, 0.0]), "g_right", text),
        joint_left=parse_int(document.get("joint_left", 1), "joint_left", text),
        joint_right=parse_int(document.get("joint_right", n1), "joint_right", text),
    )
    folded_lead(spec, lead)
    return spec, lead


def _real_rows(m):
    return [[float(x.real) for x in row] for row in m]


def serialize_pt_spec(spec, lead=None):
    rows = matrix_rows if spec.generalized else _real_rows
    document = {
        "n1": spec.n1,
        "n2": spec.n2,
        "H_gamma": rows(spec.h_gamma),
        "H_alpha": rows(spec.h_alpha),
        "H_alpha_beta": rows(spec.h_alpha_beta),
        "H_gamma_alpha": rows(spec.h_gamma_alpha),
        "V": [complex_pair(z) for z in spec.v],
    }
    if spec.generalized:
        document["generalized"] = True
    if lead is not None:
        folded_lead(spec, lead)
        document.update({
            "kappa": float(lead.kappa),
            "g_left": complex_pair(lead.g_left),
            "g_right": complex_pair(lead.g_right),
            "joint_left": lead.joint_left,
            "joint_right": lead.joint_right,
        })
    return json.dumps(document, indent=2)


def load_pt_spec(path):
    with open(path, encoding="utf-8") as f:
        return parse_pt_spec(f.read())
