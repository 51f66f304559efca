"""
Wavepacket check of the plane-wave coefficients.

A Gaussian packet is launched in the left lead of a long finite chain that
contains the center, evolved with classical RK4 under i dpsi/dt = H psi, and
the probability that ends up left and right of the center is compared with
|r(k0)|^2 and |t(k0)|^2.

Site layout of the finite system: left lead j = -n..-1, the center sites,
right lead j = 1..n. Chain ends are hard walls.

A non-Hermitian center can carry localized modes with Im E > 0 that sit
outside the scattering problem. Round-off seeds them and they grow as
exp(Im E t), so they are removed with the biorthogonal projector before and
during the evolution.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.sparse

from config import GROWTH_RATE_TOL, MIN_CHAIN_HALF_LENGTH, MIN_SIGMA, RK4_STEP_FACTOR
from csv_operation import PROBE_COLUMNS
from errors import DimensionMismatch, InvalidConfig, StepTooLarge
from linalg import max_row_norm
from model import ScatteringCenter, check_lead
from scattering import center_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WavepacketConfig:
    chain_half_length: int = 600
    sigma: float = 15.0
    k0: float = math.pi / 3
    x0: Optional[float] = None
    t_final: Optional[float] = None
    dt: Optional[float] = None

    def __post_init__(self):
        if self.chain_half_length < MIN_CHAIN_HALF_LENGTH:
            raise InvalidConfig(f"chain_half_length must be >= {MIN_CHAIN_HALF_LENGTH}, got {self.chain_half_length}")
        if not self.sigma >= MIN_SIGMA:
            raise InvalidConfig(f"sigma must be >= {MIN_SIGMA}, got {self.sigma}")
        if not (0.0 < self.k0 < math.pi):
            raise InvalidConfig(f"k0 must lie in (0, pi), got {self.k0}")
        if self.x0 is None:
            object.__setattr__(self, "x0", -self.chain_half_length / 2.0)
        if self.x0 >= 0:
            raise InvalidConfig(f"x0 must be in the left lead (negative), got {self.x0}")
        if abs(self.x0) + 4.0 * self.sigma >= self.chain_half_length:
            raise InvalidConfig(
                f"packet at x0={self.x0} with sigma={self.sigma} touches the wall of a "
                f"{self.chain_half_length}-site lead"
            )
        if self.t_final is not None and self.t_final <= 0:
            raise InvalidConfig(f"t_final must be positive, got {self.t_final}")

    def group_velocity(self, kappa):
        return 2.0 * kappa * math.sin(self.k0)

    def resolved_t_final(self, kappa):
        """Time for the packet center to travel 2|x0|: into the center and out again."""
        if self.t_final is not None:
            return self.t_final
        velocity = self.group_velocity(kappa)
        if velocity <= 0:
            raise InvalidConfig(f"packet does not move towards the center (group velocity {velocity:.3g})")
        return 2.0 * abs(self.x0) / velocity


@dataclass
class WavepacketResult:
    p_left: float
    p_center: float
    p_right: float
    total_norm: float
    t_final: float
    dt: float
    probes: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=PROBE_COLUMNS))
    projected_modes: int = 0
    max_growth_rate: float = 0.0


@dataclass(frozen=True)
class GrowingModeProjector:
    """
    1 - sum_n |R_n><L_n| / <L_n|R_n> over the modes with Im E above the
    threshold. `rates` holds their Im E.
    """

    right: np.ndarray
    left: np.ndarray
    overlaps: np.ndarray
    rates: np.ndarray

    @property
    def count(self):
        return int(self.rates.size)

    @property
    def max_rate(self):
        return float(self.rates.max()) if self.rates.size else 0.0

    def interval(self, dt):
        """Steps between projections: about 1 / max Im E time units."""
        if not self.rates.size:
            return None
        return max(1, int(1.0 / (self.max_rate * dt)))

    def __call__(self, psi):
        if not self.rates.size:
            return psi
        coefficients = (self.left.conj().T @ psi) / self.overlaps
        return psi - self.right @ coefficients


def growing_modes(h, tol=GROWTH_RATE_TOL):
    """Projector removing every eigenmode of h with Im E > tol."""
    h = h.toarray() if scipy.sparse.issparse(h) else np.asarray(h, dtype=np.complex128)
    energies, left, right = scipy.linalg.eig(h, left=True, right=True)
    growing = np.flatnonzero(energies.imag > tol)
    left = left[:, growing]
    right = right[:, growing]
    overlaps = np.sum(left.conj() * right, axis=0)
    if growing.size:
        logger.info(
            f"projecting {growing.size} growing mode(s), max Im E = {energies.imag[growing].max():.4g}"
        )
    return GrowingModeProjector(right, left, overlaps, energies.imag[growing])


def build_finite_system(center, lead, n):
    """
    (2n + N) square Hamiltonian: -kappa hoppings along both leads, the center
    matrix in the middle, and -g_L, -g_R between the joints and lead sites -1, 1.
    """
    if isinstance(center, ScatteringCenter):
        check_lead(center, lead)
    h_c, _ = center_matrix(center)
    size = h_c.shape[0]
    if lead.joint_left > size or lead.joint_right > size:
        raise DimensionMismatch(f"joints ({lead.joint_left}, {lead.joint_right}) outside a {size}-site center")
    total = 2 * n + size
    h = np.zeros((total, total), dtype=np.complex128)
    kappa = lead.kappa

    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = -kappa
    right0 = n + size
    for i in range(right0, total - 1):
        h[i, i + 1] = h[i + 1, i] = -kappa

    h[n:right0, n:right0] = h_c

    left_joint = n + lead.joint_left - 1
    right_joint = n + lead.joint_right - 1
    h[left_joint, n - 1] = -lead.g_left
    h[n - 1, left_joint] = -np.conj(lead.g_left)
    h[right_joint, right0] = -lead.g_right
    h[right0, right_joint] = -np.conj(lead.g_right)
    return h


def region_boundaries(n, n_center):
    """Indices splitting the state into (left lead, center, right lead)."""
    return n, n + n_center


def lead_coordinates(n, n_center):
    """Lead site label j for every site (0 on center sites)."""
    return np.concatenate([
        np.arange(-n, 0),
        np.zeros(n_center, dtype=int),
        np.arange(1, n + 1),
    ])


def gaussian_packet(n, n_center, x0, sigma, k0):
    """psi_j ~ exp(-(j - x0)^2 / (4 sigma^2)) exp(i k0 j) on lead sites, zero on the center."""
    if sigma <= 0 or n < 1:
        raise InvalidConfig(f"invalid packet: n={n}, sigma={sigma}")
    j = lead_coordinates(n, n_center).astype(float)
    psi = np.exp(-((j - x0) ** 2) / (4.0 * sigma ** 2)) * np.exp(1j * k0 * j)
    psi[n:n + n_center] = 0.0
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise InvalidConfig("packet has zero weight on the leads")
    return psi / norm


def mean_quasi_momentum(psi):
    """|psi_hat|^2 weighted mean of the discrete Fourier momentum in [-pi, pi)."""
    psi = np.asarray(psi, dtype=np.complex128)
    weights = np.abs(np.fft.fft(psi)) ** 2
    ks = 2.0 * np.pi * np.fft.fftfreq(psi.size)
    return float(np.sum(ks * weights) / np.sum(weights))


def measure_partition(psi, boundaries):
    left_end, right_start = boundaries
    density = np.abs(psi) ** 2
    return (
        float(np.sum(density[:left_end])),
        float(np.sum(density[left_end:right_start])),
        float(np.sum(density[right_start:])),
    )


def max_stable_step(h):
    scale = max_row_norm(np.asarray(h)) if not scipy.sparse.issparse(h) else float(abs(h).sum(axis=1).max())
    return math.inf if scale == 0.0 else RK4_STEP_FACTOR / scale


def evolve(h, psi0, t_final, dt, probe=None, probe_every=None, projector=None, project_every=None):
    """
    Classical RK4 for dpsi/dt = -i H psi. The step count is rounded up so the
    final time is hit exactly. `probe(time, psi)` is called every
    `probe_every` steps and at the end. `projector(psi)`, when given, is
    applied every `project_every` steps and after the last one.
    """
    limit = max_stable_step(h)
    if dt > limit:
        raise StepTooLarge(f"dt={dt:.4g} exceeds {RK4_STEP_FACTOR}/||H||_inf = {limit:.4g}")
    psi = np.array(psi0, dtype=np.complex128)
    if t_final <= 0:
        return psi
    h = scipy.sparse.csr_matrix(h)
    steps = max(1, math.ceil(t_final / dt - 1e-9))
    step = t_final / steps
    logger.debug(f"RK4: {steps} steps of {step:.5g} to t={t_final:.5g}")

    def rhs(y):
        return -1j * (h @ y)

    for n in range(1, steps + 1):
        k1 = rhs(psi)
        k2 = rhs(psi + 0.5 * step * k1)
        k3 = rhs(psi + 0.5 * step * k2)
        k4 = rhs(psi + step * k3)
        psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if projector is not None and ((project_every and n % project_every == 0) or n == steps):
            psi = projector(psi)
        if probe is not None and ((probe_every and n % probe_every == 0) or n == steps):
            probe(n * step, psi)
    return psi


def run_wavepacket(center, lead, config, probe_every=None):
    """Scatter one packet and measure where its probability went."""
    h_c, _ = center_matrix(center)
    n_center = h_c.shape[0]
    n = config.chain_half_length
    h = build_finite_system(center, lead, n)
    boundaries = region_boundaries(n, n_center)

    t_final = config.resolved_t_final(lead.kappa)
    dt = config.dt if config.dt is not None else max_stable_step(h)
    projector = growing_modes(h)
    psi0 = projector(gaussian_packet(n, n_center, config.x0, config.sigma, config.k0))
    logger.info(
        f"wavepacket: n={n}, center={n_center}, k0={config.k0:.4f}, sigma={config.sigma}, "
        f"x0={config.x0}, t_final={t_final:.3f}, dt={dt:.5f}"
    )

    rows = []

    def probe(time, psi):
        p_left, p_center, p_right = measure_partition(psi, boundaries)
        rows.append((time, p_left, p_center, p_right, p_left + p_center + p_right))

    if probe_every:
        probe(0.0, psi0)
    psi = evolve(
        h,
        psi0,
        t_final,
        dt,
        probe=probe if probe_every else None,
        probe_every=probe_every,
        projector=projector if projector.count else None,
        project_every=projector.interval(dt),
    )
    p_left, p_center, p_right = measure_partition(psi, boundaries)
    total = p_left + p_center + p_right
    logger.info(f"wavepacket done: p_left={p_left:.5f}, p_center={p_center:.2e}, p_right={p_right:.5f}, norm={total:.6f}")
    return WavepacketResult(
        p_left=p_left,
        p_center=p_center,
        p_right=p_right,
        total_norm=total,
        t_final=t_final,
        dt=dt,
        probes=pd.DataFrame(rows, columns=PROBE_COLUMNS),
        projected_modes=projector.count,
        max_growth_rate=projector.max_rate,
    )
