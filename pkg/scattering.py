"""
Reflection and transmission through a scattering center between two
semi-infinite chains.

Two independent routes give r and t:

* the closed form built from the joint elements of Delta^-1
  (`coefficients_abc` / `solve_rt_formula`);
* the augmented linear system in which r and t are unknowns next to the
  center amplitudes (`solve_rt_raw` / `solve_rt_direct`). It never forms
  Delta^-1 and therefore also works where Delta alone is singular.

The incident wave always comes from the left with unit amplitude.
"""

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from config import BAND_EDGE_TOL, MAX_WORKERS, POLE_TOL
from errors import (
    DimensionMismatch,
    InvalidRange,
    InvalidSite,
    MomentumOutOfBand,
    PoleAtK,
    SingularDelta,
    SingularMatrix,
    SingularSystem,
)
from linalg import as_complex_matrix, det, lu_solve
from model import ScatteringCenter, assemble_delta, assemble_full_center_matrix, check_lead

logger = logging.getLogger(__name__)


class PointStatus(enum.Enum):
    ok = "ok"
    pole = "pole"
    singular = "singular"


@dataclass(frozen=True)
class AbcCoefficients:
    a: complex
    b: complex
    b_tilde: complex
    c: complex
    eta: complex


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    k: float
    energy: float
    r: complex
    t: complex
    alpha: np.ndarray
    beta: np.ndarray
    deficit: float

    @property
    def transmission(self):
        return abs(self.t) ** 2

    @property
    def reflection(self):
        return abs(self.r) ** 2


@dataclass(frozen=True)
class SpectrumPoint:
    k: float
    transmission: float
    reflection: float
    deficit: float
    status: PointStatus


@dataclass
class SpectrumResult:
    entries: List[SpectrumPoint] = field(default_factory=list)

    @property
    def ks(self):
        return np.array([p.k for p in self.entries])

    @property
    def transmissions(self):
        return np.array([p.transmission for p in self.entries])

    def ok_entries(self):
        return [p for p in self.entries if p.status is PointStatus.ok]


def dispersion(k, kappa):
    """E = -2 kappa cos k for an in-band momentum k in (0, pi)."""
    if not (0.0 < k < np.pi) or np.sin(k) <= BAND_EDGE_TOL:
        raise MomentumOutOfBand(f"k={k!r} is not inside the open band (0, pi)")
    return -2.0 * kappa * np.cos(k)


def center_matrix(center):
    """Full center matrix and the number of cluster-A sites, for either input form."""
    if isinstance(center, ScatteringCenter):
        return assemble_full_center_matrix(center), center.n_a
    h_c = as_complex_matrix(center, "center")
    if h_c.shape[0] != h_c.shape[1]:
        raise DimensionMismatch(f"center matrix must be square, got {h_c.shape}")
    return h_c, h_c.shape[0]


def _delta_columns(center, lead, energy):
    """Columns L and R of Delta^-1, solved from the LU factorization of Delta."""
    delta = assemble_delta(center, energy).matrix
    n = delta.shape[0]
    unit = np.zeros((n, 2), dtype=np.complex128)
    unit[lead.joint_left - 1, 0] = 1.0
    unit[lead.joint_right - 1, 1] = 1.0
    try:
        return delta, lu_solve(delta, unit)
    except SingularMatrix as e:
        raise SingularDelta(f"Delta is singular at E={energy:.6g}: {e}", pivot=e.pivot) from e


def coefficients_abc(center, lead, k):
    """a, b, b~, c and eta from the joint elements of Delta^-1."""
    check_lead(center, lead)
    energy = dispersion(k, lead.kappa)
    _, cols = _delta_columns(center, lead, energy)
    left, right = lead.joint_left - 1, lead.joint_right - 1
    inv_ll, inv_rl = cols[left, 0], cols[right, 0]
    inv_lr, inv_rr = cols[left, 1], cols[right, 1]

    g_l, g_r, kappa = lead.g_left, lead.g_right, lead.kappa
    a = inv_ll * abs(g_l) ** 2 / kappa
    c = inv_rr * abs(g_r) ** 2 / kappa
    b = inv_lr * np.conj(g_l) * g_r / kappa
    b_tilde = inv_rl * g_l * np.conj(g_r) / kappa
    phase = np.exp(1j * k)
    eta = (b * b_tilde - a * c) * phase ** 2 + (a + c) * phase - 1.0
    return AbcCoefficients(complex(a), complex(b), complex(b_tilde), complex(c), complex(eta))


def _source(n, lead, k, r, t):
    """Right-hand side of Delta x = e_L g_L f_-1 + e_R g_R f_1."""
    src = np.zeros(n, dtype=np.complex128)
    src[lead.joint_left - 1] += lead.g_left * (np.exp(-1j * k) + r * np.exp(1j * k))
    src[lead.joint_right - 1] += lead.g_right * t * np.exp(1j * k)
    return src


def current_deficit(sol):
    """1 - |r|^2 - |t|^2."""
    return float(1.0 - abs(sol.r) ** 2 - abs(sol.t) ** 2)


def _solution(k, energy, r, t, amplitudes, n_a):
    deficit = float(1.0 - abs(r) ** 2 - abs(t) ** 2)
    return ScatteringSolution(
        k=float(k),
        energy=float(energy),
        r=complex(r),
        t=complex(t),
        alpha=np.array(amplitudes[:n_a]),
        beta=np.array(amplitudes[n_a:]),
        deficit=deficit,
    )


def solve_rt_formula(center, lead, k):
    """r and t from the closed form in a, b, b~, c, eta; amplitudes from one more Delta solve."""
    abc = coefficients_abc(center, lead, k)
    if abs(abc.eta) <= POLE_TOL:
        raise PoleAtK(f"|eta|={abs(abc.eta):.3e} at k={k:.6g}")
    a, b, b_tilde, c, eta = abc.a, abc.b, abc.b_tilde, abc.c, abc.eta
    r = (-b * b_tilde + a * c - a * np.exp(-1j * k) - c * np.exp(1j * k) + 1.0) / eta
    t = 2j * b_tilde * np.sin(k) / eta

    energy = dispersion(k, lead.kappa)
    delta = assemble_delta(center, energy).matrix
    try:
        amplitudes = lu_solve(delta, _source(center.size, lead, k, r, t))
    except SingularMatrix as e:
        raise SingularDelta(str(e), pivot=e.pivot) from e
    return _solution(k, energy, r, t, amplitudes, center.n_a)


def augmented_system(h_c, lead, k):
    """
    The (N+2) x (N+2) system for (psi_center, r, t): N center rows plus the
    Schrodinger rows of lead sites -1 and 1.
    """
    n = h_c.shape[0]
    energy = dispersion(k, lead.kappa)
    kappa = lead.kappa
    left, right = lead.joint_left - 1, lead.joint_right - 1
    e1, e2 = np.exp(1j * k), np.exp(2j * k)
    em1, em2 = np.exp(-1j * k), np.exp(-2j * k)

    system = np.zeros((n + 2, n + 2), dtype=np.complex128)
    rhs = np.zeros(n + 2, dtype=np.complex128)

    system[:n, :n] = h_c - energy * np.eye(n)
    system[left, n] = -lead.g_left * e1
    system[right, n + 1] = -lead.g_right * e1
    rhs[left] += lead.g_left * em1

    # -kappa f_-2 - g_L^* alpha_L = E f_-1
    system[n, left] = -np.conj(lead.g_left)
    system[n, n] = -kappa * e2 - energy * e1
    rhs[n] = kappa * em2 + energy * em1

    # -kappa f_2 - g_R^* alpha_R = E f_1
    system[n + 1, right] = -np.conj(lead.g_right)
    system[n + 1, n + 1] = -kappa * e2 - energy * e1
    return system, rhs, energy


def solve_rt_raw(h_c, lead, k):
    """Direct augmented solve for any square center matrix; alpha holds every center site."""
    h_c = as_complex_matrix(h_c, "center")
    n = h_c.shape[0]
    for name in ("joint_left", "joint_right"):
        if getattr(lead, name) > n:
            raise InvalidSite(f"{name}={getattr(lead, name)} outside the {n}-site center")
    system, rhs, energy = augmented_system(h_c, lead, k)
    try:
        x = lu_solve(system, rhs)
    except SingularMatrix as e:
        raise SingularSystem(f"augmented system singular at k={k:.6g}: {e}", pivot=e.pivot) from e
    r, t = x[n], x[n + 1]
    return _solution(k, energy, r, t, x[:n], n)


def solve_rt_direct(center, lead, k):
    check_lead(center, lead)
    sol = solve_rt_raw(assemble_full_center_matrix(center), lead, k)
    amplitudes = np.concatenate([sol.alpha, sol.beta])
    return _solution(sol.k, sol.energy, sol.r, sol.t, amplitudes, center.n_a)


def reconstruct_wavefunction(sol, site):
    """Lead amplitude f_j: e^{ikj} + r e^{-ikj} on the left (j <= -1), t e^{ikj} on the right (j >= 1)."""
    if site == 0:
        raise InvalidSite("lead sites are numbered ... -2, -1 | 1, 2 ...; j = 0 does not exist")
    if site < 0:
        return complex(np.exp(1j * sol.k * site) + sol.r * np.exp(-1j * sol.k * site))
    return complex(sol.t * np.exp(1j * sol.k * site))


def schrodinger_residual(h_c, lead, sol):
    """Max residual of the center rows and both joint lead rows for a solved state."""
    if isinstance(h_c, ScatteringCenter):
        h_c = assemble_full_center_matrix(h_c)
    n = h_c.shape[0]
    psi = np.concatenate([sol.alpha, sol.beta])
    f_m1, f_m2 = reconstruct_wavefunction(sol, -1), reconstruct_wavefunction(sol, -2)
    f_1, f_2 = reconstruct_wavefunction(sol, 1), reconstruct_wavefunction(sol, 2)
    left, right = lead.joint_left - 1, lead.joint_right - 1

    center_rows = (h_c - sol.energy * np.eye(n)) @ psi
    center_rows[left] -= lead.g_left * f_m1
    center_rows[right] -= lead.g_right * f_1
    lead_left = -lead.kappa * f_m2 - np.conj(lead.g_left) * psi[left] - sol.energy * f_m1
    lead_right = -lead.kappa * f_2 - np.conj(lead.g_right) * psi[right] - sol.energy * f_1
    return float(max(np.max(np.abs(center_rows)), abs(lead_left), abs(lead_right)))


def schur_det(center, e):
    """
    det(Delta) through the block route det(H_B - E) det[(H_A - E) + H_AB (H_B - E)^-1 H_AB^dagger].
    Requires H_B - E invertible.
    """
    a_block = center.h_a - e * np.eye(center.n_a)
    if center.n_b == 0:
        return det(a_block)
    b_block = center.h_b - e * np.eye(center.n_b)
    coupled = lu_solve(b_block, center.h_ab.conj().T)
    return det(b_block) * det(a_block + center.h_ab @ coupled)


def _spectrum_point(center, lead, k, method):
    try:
        if method == "formula":
            sol = solve_rt_formula(center, lead, k)
        elif isinstance(center, ScatteringCenter):
            sol = solve_rt_direct(center, lead, k)
        else:
            sol = solve_rt_raw(center, lead, k)
    except PoleAtK as e:
        logger.warning(f"pole at k={k:.6f}: {e}")
        return SpectrumPoint(float(k), float("nan"), float("nan"), float("nan"), PointStatus.pole)
    except SingularMatrix as e:
        logger.warning(f"singular at k={k:.6f}: {e}")
        return SpectrumPoint(float(k), float("nan"), float("nan"), float("nan"), PointStatus.singular)
    return SpectrumPoint(sol.k, sol.transmission, sol.reflection, sol.deficit, PointStatus.ok)


def spectrum(center, lead, k_min, k_max, steps, method="direct", workers=None):
    """
    Solve on a uniform grid k_min..k_max (inclusive). Poles and singular points
    are kept with their status. Points may be computed concurrently; the result
    order is always the grid order.
    """
    if not (0.0 < k_min < k_max < np.pi):
        raise InvalidRange(f"need 0 < k_min < k_max < pi, got k_min={k_min}, k_max={k_max}")
    if steps < 2:
        raise InvalidRange(f"steps must be at least 2, got {steps}")
    if method not in ("direct", "formula"):
        raise InvalidRange(f"unknown method {method!r}")
    if method == "formula" and not isinstance(center, ScatteringCenter):
        raise InvalidRange("the formula method needs a validated ScatteringCenter")
    if isinstance(center, ScatteringCenter):
        check_lead(center, lead)

    grid = np.linspace(k_min, k_max, steps)
    workers = workers or MAX_WORKERS
    logger.info(f"spectrum: {steps} points on [{k_min:.6g}, {k_max:.6g}] via {method}, {workers} worker(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda k: _spectrum_point(center, lead, k, method), grid))
    else:
        entries = [_spectrum_point(center, lead, k, method) for k in grid]
    return SpectrumResult(entries)
