"""
Scattering center and lead data, assembly of H_C and Delta, and the
network spec JSON document.

The center is two Hermitian clusters A and B joined by a coupling block
H_AB; the lower-left block is always computed as -H_AB^dagger, so the
anti-Hermitian coupling is structural.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from config import HERMITICITY_TOL
from errors import DimensionMismatch, InvalidLead, NotHermitian, ParseError
from linalg import as_complex_matrix, hermiticity_defect

logger = logging.getLogger(__name__)

NETWORK_FIELDS = ("kappa", "g_left", "g_right", "joint_left", "joint_right", "H_A", "H_B", "H_AB")


def _frozen(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScatteringCenter:
    h_a: np.ndarray
    h_b: np.ndarray
    h_ab: np.ndarray

    @property
    def n_a(self):
        return self.h_a.shape[0]

    @property
    def n_b(self):
        return self.h_b.shape[0]

    @property
    def size(self):
        return self.n_a + self.n_b

    def __eq__(self, other):
        if not isinstance(other, ScatteringCenter):
            return NotImplemented
        return (
            np.array_equal(self.h_a, other.h_a)
            and np.array_equal(self.h_b, other.h_b)
            and np.array_equal(self.h_ab, other.h_ab)
        )

    __hash__ = None


@dataclass(frozen=True)
class LeadAttachment:
    """Waveguide hopping kappa, joint couplings g_L, g_R and 1-based joint sites in cluster A."""

    kappa: float
    g_left: complex
    g_right: complex
    joint_left: int
    joint_right: int

    def __post_init__(self):
        kappa = complex(self.kappa)
        if kappa.imag != 0.0 or not np.isfinite(kappa.real) or kappa.real == 0.0:
            raise InvalidLead(f"kappa must be real and nonzero, got {self.kappa}")
        object.__setattr__(self, "kappa", float(kappa.real))
        for name in ("g_left", "g_right"):
            g = complex(getattr(self, name))
            if g == 0 or not np.isfinite(g):
                raise InvalidLead(f"{name} must be finite and nonzero, got {g}")
            object.__setattr__(self, name, g)
        for name in ("joint_left", "joint_right"):
            joint = getattr(self, name)
            if isinstance(joint, bool) or int(joint) != joint or joint < 1:
                raise InvalidLead(f"{name} must be a positive 1-based index, got {joint}")
            object.__setattr__(self, name, int(joint))
        if self.joint_left == self.joint_right:
            raise InvalidLead(f"joint_left and joint_right coincide at site {self.joint_left}")


@dataclass(frozen=True, eq=False)
class DeltaMatrix:
    energy: float
    matrix: np.ndarray


def build_center(h_a, h_b=None, h_ab=None):
    """Validate the three blocks and return an immutable ScatteringCenter."""
    h_a = as_complex_matrix(h_a, "H_A")
    n_a = h_a.shape[0]
    if n_a < 1 or h_a.shape[1] != n_a:
        raise DimensionMismatch(f"H_A must be square with at least one site, got {h_a.shape}")

    h_b = np.zeros((0, 0)) if h_b is None or np.size(h_b) == 0 else h_b
    h_b = as_complex_matrix(h_b, "H_B")
    n_b = h_b.shape[0]
    if h_b.shape[1] != n_b:
        raise DimensionMismatch(f"H_B must be square, got {h_b.shape}")

    if h_ab is None or (np.size(h_ab) == 0 and n_b == 0):
        h_ab = np.zeros((n_a, n_b))
    h_ab = as_complex_matrix(h_ab, "H_AB")
    if h_ab.shape != (n_a, n_b):
        raise DimensionMismatch(f"H_AB must be {n_a}x{n_b}, got {h_ab.shape}")

    for name, block in (("H_A", h_a), ("H_B", h_b)):
        defect = hermiticity_defect(block)
        if defect > HERMITICITY_TOL:
            raise NotHermitian(name, defect)

    return ScatteringCenter(_frozen(h_a), _frozen(h_b), _frozen(h_ab))


def check_lead(center, lead):
    """Both joints must be sites of cluster A."""
    for name in ("joint_left", "joint_right"):
        joint = getattr(lead, name)
        if joint > center.n_a:
            raise InvalidLead(f"{name}={joint} is not a site of cluster A (n_a={center.n_a})")


def assemble_full_center_matrix(center):
    """H_C = [[H_A, H_AB], [-H_AB^dagger, H_B]]."""
    if center.n_b == 0:
        return np.array(center.h_a, copy=True)
    return np.block([
        [center.h_a, center.h_ab],
        [-center.h_ab.conj().T, center.h_b],
    ])


def assemble_delta(center, e):
    full = assemble_full_center_matrix(center)
    return DeltaMatrix(float(e), full - e * np.eye(center.size))


# --- network spec document ---

def line_of(text, key):
    marker = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if marker in line:
            return number
    return None


def parse_number(value, field, text):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", line_of(text, field), field)
    return float(value)


def parse_complex(value, field, text):
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"expected [re, im], got {value!r}", line_of(text, field), field)
    re, im = (parse_number(part, field, text) for part in value)
    return complex(re, im)


def parse_int(value, field, text):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", line_of(text, field), field)
    return value


def parse_matrix(value, field, text, complex_entries=True):
    if not isinstance(value, list):
        raise ParseError("expected an array of rows", line_of(text, field), field)
    if not value:
        return np.zeros((0, 0), dtype=np.complex128)
    rows = []
    width = None
    for index, row in enumerate(value, start=1):
        if not isinstance(row, list):
            raise ParseError(f"row {index} is not an array", line_of(text, field), field)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row {index} has {len(row)} entries, expected {width}", line_of(text, field), field)
        if complex_entries:
            rows.append([parse_complex(entry, field, text) for entry in row])
        else:
            rows.append([parse_number(entry, field, text) for entry in row])
    return np.array(rows, dtype=np.complex128).reshape(len(rows), width)


def load_document(text, allowed, required):
    """Decode a JSON object and enforce its field set."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from e
    if not isinstance(document, dict):
        raise ParseError("top level must be a JSON object", line=1)
    for key in document:
        if key not in allowed:
            raise ParseError("unknown field", line_of(text, key), key)
    for key in required:
        if key not in document:
            raise ParseError("missing required field", field=key)
    return document


def parse_network_spec(text):
    """Parse a network spec JSON document into (ScatteringCenter, LeadAttachment)."""
    document = load_document(text, NETWORK_FIELDS, NETWORK_FIELDS)

    h_a = parse_matrix(document["H_A"], "H_A", text)
    h_b = parse_matrix(document["H_B"], "H_B", text)
    h_ab = parse_matrix(document["H_AB"], "H_AB", text)
    if h_ab.size == 0 and h_b.size == 0:
        h_ab = np.zeros((h_a.shape[0], 0), dtype=np.complex128)

    center = build_center(h_a, h_b, h_ab)
    lead = LeadAttachment(
        kappa=parse_number(document["kappa"], "kappa", text),
        g_left=parse_complex(document["g_left"], "g_left", text),
        g_right=parse_complex(document["g_right"], "g_right", text),
        joint_left=parse_int(document["joint_left"], "joint_left", text),
        joint_right=parse_int(document["joint_right"], "joint_right", text),
    )
    check_lead(center, lead)
    logger.debug(f"parsed network spec with n_a={center.n_a}, n_b={center.n_b}")
    return center, lead


def complex_pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_rows(m):
    if m.shape[0] == 0 or m.shape[1] == 0:
        return []
    return [[complex_pair(z) for z in row] for row in m]


def network_document(center, lead):
    return {
        "kappa": float(lead.kappa),
        "g_left": complex_pair(lead.g_left),
        "g_right": complex_pair(lead.g_right),
        "joint_left": lead.joint_left,
        "joint_right": lead.joint_right,
        "H_A": matrix_rows(center.h_a),
        "H_B": matrix_rows(center.h_b),
        "H_AB": matrix_rows(center.h_ab),
    }


def serialize_network_spec(center, lead):
    check_lead(center, lead)
    return json.dumps(network_document(center, lead), indent=2)


def load_network_spec(path):
    with open(path, encoding="utf-8") as f:
        return parse_network_spec(f.read())
