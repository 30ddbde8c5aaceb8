"""Sobolev, homogeneous Sobolev and Bourgain-space norms.

All one-dimensional norms act on unitary-normalized amplitudes (see
:mod:`sbo.spectral`), so ``sobolev_norm(f, 0)`` is the discrete L2 norm.
Space-time norms live on an explicit rectangle of the ``(tau, xi)``
lattice; each node stands for the cell centred on it (midpoint rule), so
the norm of an indicator of a union of cells is exactly sqrt(area).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .errors import GridMismatchError, ParameterError, SizeError
from .fitting import loglog_slope
from .spectral import SpectralField

ZERO_MODE_TOL = 1e-12


class ExcludedModeWarning(UserWarning):
    """The zero mode carries mass that a homogeneous norm ignores."""


def bracket(x):
    """Japanese bracket ``<x> = sqrt(1 + x^2)``."""
    return np.sqrt(1.0 + np.square(x))


def sobolev_norm(field: SpectralField, s: float) -> float:
    w = (1.0 + field.grid.k ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(field.amplitudes) ** 2)))


def homogeneous_norm(field: SpectralField, s: float) -> float:
    """``||f||_{H-dot^s}`` with weight ``|k|^{2s}``; the ``k = 0`` mode is excluded.

    Emits :class:`ExcludedModeWarning` when the zero mode is not negligible,
    since the value then ignores part of the field.
    """
    a = field.amplitudes
    k = np.abs(field.grid.k)
    scale = np.max(np.abs(a))
    if scale > 0 and abs(a[0]) > ZERO_MODE_TOL * scale:
        warnings.warn("homogeneous norm ignores a non-zero k=0 mode", ExcludedModeWarning,
                      stacklevel=2)
    nz = k > 0
    return float(np.sqrt(np.sum(k[nz] ** (2 * s) * np.abs(a[nz]) ** 2)))


def rescale(field: SpectralField, lam: int, power: float) -> SpectralField:
    """Spectral form of the dilation ``f -> lam**power * f(lam * x)``.

    The dilated function is ``L/lam``-periodic; the torus of length ``L``
    holds ``lam`` copies of it.  Amplitudes are normalized per period,
    which is the periodic stand-in for the dilation on the line:
    mode ``j`` moves to ``lam*j`` with factor ``lam**(power - 1/2)``.
    """
    if int(lam) != lam or lam < 1:
        raise ParameterError(f"scaling factor must be an integer >= 1, got {lam}")
    lam = int(lam)
    grid = field.grid
    a = field.amplitudes
    j = grid.indices
    scale = np.max(np.abs(a))
    active = np.abs(a) > 1e-14 * scale if scale > 0 else np.zeros(grid.n, bool)
    jmax = int(np.max(np.abs(j[active]))) if active.any() else 0
    if lam * jmax > grid.n // 4:
        raise ParameterError(
            f"lambda={lam} moves mode {jmax} to {lam * jmax}, beyond half the Nyquist index {grid.n // 4}")
    out = np.zeros_like(a)
    out[(lam * j[active]) % grid.n] = lam ** (power - 0.5) * a[active]
    return SpectralField(grid, out, field.real_flag, check=False)


@dataclass(frozen=True)
class ScalingReport:
    lam: int
    s: float
    s_prime: float
    measured_phi: float
    predicted_phi: float
    measured_psi: float
    predicted_psi: float
    tolerance: float

    @property
    def phi_error(self) -> float:
        return abs(self.measured_phi / self.predicted_phi - 1.0)

    @property
    def psi_error(self) -> float:
        return abs(self.measured_psi / self.predicted_psi - 1.0)

    @property
    def passed(self) -> bool:
        return self.phi_error <= self.tolerance and self.psi_error <= self.tolerance


def scaling_check(phi: SpectralField, psi: SpectralField, lam: int, s: float, s_prime: float,
                  tolerance: float = 1e-10) -> ScalingReport:
    """Compare homogeneous-norm ratios under ``u -> lam^{3/2} u(lam x)``,
    ``v -> lam^2 v(lam x)`` with the laws ``lam^{1+s}`` and ``lam^{3/2+s'}``."""
    phi_l = rescale(phi, lam, 1.5)
    psi_l = rescale(psi, lam, 2.0)
    m_phi = homogeneous_norm(phi_l, s) / homogeneous_norm(phi, s)
    m_psi = homogeneous_norm(psi_l, s_prime) / homogeneous_norm(psi, s_prime)
    return ScalingReport(lam, s, s_prime, m_phi, float(lam) ** (1 + s),
                         m_psi, float(lam) ** (1.5 + s_prime), tolerance)


@dataclass(frozen=True)
class SobolevIndex:
    """Regularity indices; ``equation`` selects the modulation weight.

    ``"schrodinger"`` uses ``<tau + xi^2>`` and ``"benjamin_ono"`` uses
    ``<tau + nu |xi| xi>``.
    """

    s: float
    b: float | None = None
    equation: str | None = None
    nu: float = 0.0

    def __post_init__(self):
        if self.b is not None and self.equation not in ("schrodinger", "benjamin_ono"):
            raise ParameterError("equation must be 'schrodinger' or 'benjamin_ono' when b is given")


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Rectangle of the lattice ``(i*dtau, j*dxi)``.

    Nodes are ``tau_i = (tau_start + i) * dtau`` for ``i < n_tau`` and
    likewise in ``xi``.  Rectangles with equal steps belong to the same
    lattice and can be combined in convolutions.
    """

    dtau: float
    dxi: float
    tau_start: int
    xi_start: int
    n_tau: int
    n_xi: int

    def __post_init__(self):
        if not (self.dtau > 0 and self.dxi > 0):
            raise ParameterError("lattice steps must be positive")
        if self.n_tau < 1 or self.n_xi < 1:
            raise ParameterError("rectangle must contain at least one node")

    @classmethod
    def from_ranges(cls, tau_range, dtau, xi_range, dxi) -> "SpaceTimeGrid":
        """Smallest rectangle whose nodes cover the closed ranges."""
        i0 = int(np.floor(tau_range[0] / dtau))
        i1 = int(np.ceil(tau_range[1] / dtau))
        j0 = int(np.floor(xi_range[0] / dxi))
        j1 = int(np.ceil(xi_range[1] / dxi))
        return cls(dtau, dxi, i0, j0, i1 - i0 + 1, j1 - j0 + 1)

    @property
    def tau(self) -> np.ndarray:
        return (self.tau_start + np.arange(self.n_tau)) * self.dtau

    @property
    def xi(self) -> np.ndarray:
        return (self.xi_start + np.arange(self.n_xi)) * self.dxi

    @property
    def cell_area(self) -> float:
        return self.dtau * self.dxi

    @property
    def shape(self):
        return (self.n_tau, self.n_xi)

    def mesh(self):
        """``(TAU, XI)`` arrays of shape ``(n_tau, n_xi)``."""
        return np.meshgrid(self.tau, self.xi, indexing="ij")

    def same_lattice(self, other: "SpaceTimeGrid") -> bool:
        return self.dtau == other.dtau and self.dxi == other.dxi


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    grid: SpaceTimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise SizeError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area))


def modulation(tau, xi, equation: str, nu: float = 0.0):
    """``tau + xi^2`` (Schrodinger) or ``tau + nu |xi| xi`` (Benjamin-Ono)."""
    if equation == "schrodinger":
        return tau + xi ** 2
    if equation == "benjamin_ono":
        return tau + nu * np.abs(xi) * xi
    raise ParameterError(f"unknown equation tag {equation!r}")


def bourgain_norm(field: SpaceTimeField, idx: SobolevIndex) -> float:
    """Riemann-sum ``|| <xi>^s <sigma>^b f ||_{L^2_{tau,xi}}``."""
    if idx.b is None or idx.equation is None:
        raise ParameterError("Bourgain norm needs both b and an equation tag")
    tau, xi = field.grid.mesh()
    w = bracket(xi) ** idx.s * bracket(modulation(tau, xi, idx.equation, idx.nu)) ** idx.b
    return float(np.sqrt(np.sum((w * np.abs(field.values)) ** 2) * field.grid.cell_area))


@dataclass(frozen=True)
class EmbeddingReport:
    ratios: tuple
    constant: float
    trend_slope: float
    bounded: bool
    theoretical_bound: float


def sup_time_sobolev(field: SpaceTimeField, s: float, oversample: int = 8) -> float:
    """``sup_t || f(t) ||_{H^s}`` with ``f(t, xi) = (2 pi)^{-1/2} int F(tau, xi) e^{i t tau} dtau``.

    The discrete tau sum is ``2*pi/dtau``-periodic in ``t``; one period is
    sampled ``oversample`` times finer than the natural FFT resolution.
    """
    g = field.grid
    p = oversample * g.n_tau
    # |sum_i F_i e^{i t_m tau_i}| over t_m = 2 pi m / (p dtau), common phase dropped
    series = np.fft.ifft(field.values, n=p, axis=0) * p
    ft = series * (g.dtau / np.sqrt(2.0 * np.pi))
    w = (1.0 + g.xi ** 2) ** s
    hs2 = np.sum(w[None, :] * np.abs(ft) ** 2, axis=1) * g.dxi
    return float(np.sqrt(np.max(hs2)))


def embedding_constant_bound(b: float) -> float:
    """``(2 pi)^{-1/2} || <y>^{-b} ||_{L^2}``, the Cauchy-Schwarz constant."""
    return float(np.sqrt(np.sqrt(np.pi) * gamma(b - 0.5) / gamma(b) / (2.0 * np.pi)))


def embedding_spotcheck(samples, s: float, b: float, equation: str = "schrodinger",
                        nu: float = 0.0, trend_tolerance: float = 0.1) -> EmbeddingReport:
    """Ratios ``sup_t ||f(t)||_{H^s} / ||f||_{X^{s,b}}`` over ``samples``.

    Samples are taken to be ordered by refinement; the log-log slope of the
    ratio against node count is the growth trend.  Zero fields are skipped.
    Reports a fitted constant only: no threshold is placed on its size.
    """
    if b <= 0.5:
        raise ParameterError(f"embedding needs b > 1/2, got {b}")
    idx = SobolevIndex(s, b, equation, nu)
    ratios, sizes = [], []
    for f in samples:
        den = bourgain_norm(f, idx)
        if den == 0:
            continue
        ratios.append(sup_time_sobolev(f, s) / den)
        sizes.append(f.grid.n_tau * f.grid.n_xi)
    if not ratios:
        return EmbeddingReport((), 0.0, 0.0, True, embedding_constant_bound(b))
    slope = loglog_slope(sizes, ratios) if len(set(sizes)) >= 2 else 0.0
    return EmbeddingReport(tuple(ratios), max(ratios), slope, abs(slope) < trend_tolerance,
                           embedding_constant_bound(b))


def check_same_lattice(*grids: SpaceTimeGrid):
    g0 = grids[0]
    for g in grids[1:]:
        if not g0.same_lattice(g):
            raise GridMismatchError(f"lattice steps differ: {(g0.dtau, g0.dxi)} vs {(g.dtau, g.dxi)}")
