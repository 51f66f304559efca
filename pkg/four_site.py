"""
Exactly solvable 4-site ring: sites 1-2-3-4-1 with hopping -kappa, gain
+i gamma1 on site 2 and loss -i gamma2 on site 4, leads attached at sites 1
and 3. kappa is fixed to 1 throughout this module.

The fold basis is (1, 3, A, B) with A = (|2> + |4>)/sqrt2 and
B = (|2> - |4>)/sqrt2.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config import DEGENERATE_TOL, POLE_TOL, ZETA_POLE_TOL
from errors import DegenerateDenominator, InvalidConfig, NotInConservingClass, PoleAtK, ZetaPole
from model import LeadAttachment, build_center
from pt_builder import build_pt_spec
from scattering import dispersion

logger = logging.getLogger(__name__)

KAPPA = 1.0


@dataclass(frozen=True)
class FourSiteParams:
    gamma1: float
    gamma2: float

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise InvalidConfig(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))

    @property
    def balanced(self):
        return self.gamma1 == self.gamma2


def ring_lead():
    return LeadAttachment(kappa=KAPPA, g_left=KAPPA, g_right=KAPPA, joint_left=1, joint_right=3)


def _ring(potentials):
    h = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        j = (i + 1) % 4
        h[i, j] = h[j, i] = -KAPPA
    h[np.diag_indices(4)] = potentials
    return h


def four_site_center(p):
    """Raw 4x4 ring and its lead. Raw because for gamma1 != gamma2 no two-cluster form exists."""
    return _ring([0.0, 1j * p.gamma1, 0.0, -1j * p.gamma2]), ring_lead()


def hermitian_four_site_center(gamma):
    """The ring after gamma -> i gamma: real potentials -gamma on site 2 and +gamma on site 4."""
    return _ring([0.0, -gamma, 0.0, gamma]), ring_lead()


def ring_parity():
    """Swap of sites 2 and 4."""
    return np.eye(4, dtype=np.complex128)[[0, 3, 2, 1]]


def fold_basis_unitary():
    s = 1.0 / np.sqrt(2.0)
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, s, 0.0, s],
        [0.0, s, 0.0, -s],
    ])


def folded_four_site_matrix(p):
    """The ring in basis (1, 3, A, B)."""
    s2 = np.sqrt(2.0) * KAPPA
    diag = 0.5j * (p.gamma1 - p.gamma2)
    link = 0.5j * (p.gamma1 + p.gamma2)
    return np.array([
        [0.0, 0.0, -s2, 0.0],
        [0.0, 0.0, -s2, 0.0],
        [-s2, -s2, diag, link],
        [0.0, 0.0, link, diag],
    ], dtype=np.complex128)


def folded_four_site(p):
    """
    Validated center for gamma1 == gamma2 = gamma: cluster A spans (1, 3, A),
    cluster B is the single site B, coupled by i gamma. The lead joints are
    A-cluster indices 1 and 2.
    """
    if not p.balanced:
        raise NotInConservingClass(
            f"gamma1={p.gamma1} != gamma2={p.gamma2}: the folded ring has imaginary on-site terms"
        )
    m = folded_four_site_matrix(p)
    center = build_center(m[:3, :3], m[3:, 3:], m[:3, 3:])
    lead = LeadAttachment(kappa=KAPPA, g_left=KAPPA, g_right=KAPPA, joint_left=1, joint_right=2)
    return center, lead


def four_site_pt_spec(gamma):
    """The balanced ring as a PT graph: axis sites (1, 3), mirror pair 2 <-> 4, V = i gamma."""
    return build_pt_spec(
        n1=2,
        n2=1,
        h_gamma=np.zeros((2, 2)),
        h_alpha=np.zeros((1, 1)),
        h_gamma_alpha=np.array([[-KAPPA], [-KAPPA]]),
        h_alpha_beta=np.zeros((1, 1)),
        v=[1j * gamma],
    )


def zeta(k, p):
    """1/(cos k + i gamma1/2) + 1/(cos k - i gamma2/2)."""
    d1 = np.cos(k) + 0.5j * p.gamma1
    d2 = np.cos(k) - 0.5j * p.gamma2
    if abs(d1) <= ZETA_POLE_TOL or abs(d2) <= ZETA_POLE_TOL:
        raise ZetaPole(f"zeta diverges at k={k:.6g} for gamma1={p.gamma1}, gamma2={p.gamma2}")
    return complex(1.0 / d1 + 1.0 / d2)


def closed_form_rt(k, p):
    z = zeta(k, p)
    denominator = np.exp(-1j * k) - z
    if abs(denominator) <= POLE_TOL:
        raise PoleAtK(f"e^(-ik) = zeta at k={k:.6g}")
    r = (z * np.cos(k) - 1.0) * np.exp(1j * k) / denominator
    t = -1j * z * np.sin(k) * np.exp(1j * k) / denominator
    return complex(r), complex(t)


def closed_form_amplitudes(k, p):
    """Ring amplitudes (h1, h2, h3, h4) from the closed-form r and t."""
    r, t = closed_form_rt(k, p)
    energy = dispersion(k, KAPPA)
    h1, h3 = 1.0 + r, t
    h2 = -(h1 + h3) / (energy - 1j * p.gamma1)
    h4 = -(h1 + h3) / (energy + 1j * p.gamma2)
    return np.array([h1, h2, h3, h4])


def closed_form_deficit(k, p):
    """1 - |r|^2 - |t|^2 = 2 Im(zeta) sin k / (1 + |zeta|^2 - 2 Re(zeta) cos k + 2 Im(zeta) sin k)."""
    z = zeta(k, p)
    denominator = 1.0 + abs(z) ** 2 - 2.0 * z.real * np.cos(k) + 2.0 * z.imag * np.sin(k)
    if abs(denominator) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"deficit denominator vanishes at k={k:.6g}")
    return float(2.0 * z.imag * np.sin(k) / denominator)


def _transmission(k, shift):
    numerator = np.sin(2.0 * k) ** 2
    denominator = numerator + (np.cos(k) ** 2 + shift) ** 2
    if denominator == 0.0:
        # 0/0, reported as total reflection
        return 0.0
    return float(numerator / denominator)


def transmission_T(k, gamma):
    """sin^2(2k) / (sin^2(2k) + (cos^2 k - gamma^2/4)^2)."""
    return _transmission(k, -gamma ** 2 / 4.0)


def transmission_Tprime(k, gamma):
    """The real side-coupling counterpart, gamma -> i gamma."""
    return _transmission(k, gamma ** 2 / 4.0)


def resonance_gamma(k):
    """gamma at which T(k) = 1."""
    return 2.0 * abs(np.cos(k))
