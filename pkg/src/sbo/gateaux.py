"""Second Gateaux derivatives of the flow map at zero data.

The second derivative of ``u`` in the direction ``(phi, psi)`` and of ``v``
in the direction ``(phi, 0)`` are bilinear Duhamel integrals.  In frequency
every mode pair ``(xi2, xi1)`` contributes a time integral
``int_0^t exp(i t' omega) dt'`` which has the closed form
``t exp(i omega t/2) sinc(omega t/2)``.

Wave packets are indicator spectra of thin intervals.  They are evaluated
either on a :class:`~sbo.spectral.Grid1D` (for cross-checks against the
solver) or, by default, on a dedicated fine lattice ``xi = j * delta``
decoupled from any spatial grid.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ParameterError, ResolutionError
from .fitting import ProbeReport, require_geometric
from .norms import bracket
from .spectral import Grid1D, SpectralField

GATEAUX_CASES = ("T12i_low", "T12i_high", "T12ii_low", "T12ii_high", "T13_a", "T13_b", "T13_c")
SLOPE_TOLERANCE = 0.15


def sgn(x):
    """Sign with ``sgn(0) = 1``."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def theta_phase(xi, xi1, nu):
    xi2 = xi - xi1
    return xi ** 2 - xi2 ** 2 - nu * np.abs(xi1) * xi1


def upsilon_phase(xi, xi1, nu):
    xi2 = xi - xi1
    return nu * np.abs(xi) * xi - xi2 ** 2 + xi1 ** 2


def theta_kernel(tp, xi, xi1, s, s_prime, alpha, nu):
    """Kernel of the weighted second derivative of ``u`` (``xi2 = xi - xi1``)."""
    xi2 = xi - xi1
    amp = 2 * abs(alpha) * bracket(xi) ** s / (bracket(xi2) ** s * bracket(xi1) ** s_prime)
    return amp * np.exp(1j * tp * theta_phase(xi, xi1, nu))


def upsilon_kernel(tp, xi, xi1, s, s_prime, beta, nu):
    """Kernel of the weighted second derivative of ``v``; vanishes at ``xi = 0``."""
    xi2 = xi - xi1
    amp = 2 * abs(beta) * np.abs(xi) * bracket(xi) ** s_prime / (bracket(xi2) ** s * bracket(xi1) ** s)
    return amp * np.exp(1j * tp * upsilon_phase(xi, xi1, nu))


def time_integral(omega, t):
    """``int_0^t exp(i omega t') dt'`` in closed form, stable at ``omega -> 0``."""
    x = 0.5 * np.asarray(omega, dtype=float) * t
    return t * np.exp(1j * x) * np.sinc(x / np.pi)


def time_integral_simpson(omega, t, nodes_per_radian: float = 200.0, min_intervals: int = 64):
    """Same integral by composite Simpson with ``~nodes_per_radian * |omega t|`` intervals."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.shape, dtype=np.complex128)
    for i, w in np.ndenumerate(omega):
        m = max(min_intervals, int(math.ceil(nodes_per_radian * abs(w * t))))
        m += m % 2
        tp = np.linspace(0.0, t, m + 1)
        wts = np.ones(m + 1)
        wts[1:m:2] = 4.0
        wts[2:m:2] = 2.0
        out[i] = (t / m / 3.0) * np.sum(wts * np.exp(1j * w * tp))
    return out if out.size > 1 else out[0]


def _pair_sum(grid: Grid1D, a, b, weight_fn):
    """``out[j2 + j1] += weight_fn(k(j2+j1), k(j1)) * a[j2] * b[j1]`` over nonzero modes.

    Pairs whose sum leaves ``[-n/2, n/2)`` are dropped (line semantics).
    """
    j = grid.indices
    s2 = np.flatnonzero(a)
    s1 = np.flatnonzero(b)
    out = np.zeros(grid.n, dtype=np.complex128)
    if s2.size == 0 or s1.size == 0:
        return out
    J2, J1 = np.meshgrid(j[s2], j[s1], indexing="ij")
    J = J2 + J1
    ok = (J >= -grid.n // 2) & (J < grid.n // 2)
    xi = grid.dk * J[ok]
    xi1 = grid.dk * J1[ok]
    vals = weight_fn(xi, xi1) * np.outer(a[s2], b[s1])[ok]
    np.add.at(out, J[ok] % grid.n, vals)
    return out


def second_derivative_u(phi: SpectralField, psi: SpectralField, t: float, alpha: float, nu: float,
                        s: float | None = None, s_prime: float | None = None) -> SpectralField:
    """Second derivative of ``u(t)`` at zero data in direction ``(phi, psi)``.

    Without ``s``/``s_prime`` this is the spectrum of
    ``-2 i alpha int_0^t S(t-t') (S(t') phi * B(t') psi) dt'``.
    With them, ``phi`` and ``psi`` are read as the weighted spectra
    ``<xi>^s phi_hat`` and ``<xi>^{s'} psi_hat`` and the output is
    ``<xi>^s`` times the derivative, so its L2 norm is an ``H^s`` norm.
    Amplitudes are unitary-normalized: a product of fields carries ``1/sqrt(L)``.
    """
    if phi.grid != psi.grid:
        raise GridMismatchError("phi and psi live on different grids")
    grid = phi.grid
    weighted = s is not None or s_prime is not None
    s = s or 0.0
    s_prime = s_prime or 0.0

    def weight(xi, xi1):
        xi2 = xi - xi1
        w = time_integral(theta_phase(xi, xi1, nu), t)
        if weighted:
            w = w * bracket(xi) ** s / (bracket(xi2) ** s * bracket(xi1) ** s_prime)
        return w

    acc = _pair_sum(grid, phi.amplitudes, psi.amplitudes, weight)
    out = -2j * alpha * np.exp(-1j * t * grid.k ** 2) * acc / np.sqrt(grid.L)
    return SpectralField(grid, out)


def second_derivative_v(phi: SpectralField, t: float, beta: float, nu: float,
                        s: float | None = None, s_prime: float | None = None) -> SpectralField:
    """Second derivative of ``v(t)`` at zero data in direction ``(phi, 0)``.

    Spectrum of ``2 beta int_0^t B(t-t') d_x(|S(t') phi|^2) dt'``; weighting
    as in :func:`second_derivative_u` with the roles of ``s`` and ``s'`` swapped.
    """
    grid = phi.grid
    weighted = s is not None or s_prime is not None
    s = s or 0.0
    s_prime = s_prime or 0.0
    conj_reflect = np.conj(phi.amplitudes[grid.mirror()])
    # the Nyquist mirror is not a genuine partner
    conj_reflect[grid.nyquist] = 0.0

    def weight(xi, xi1):
        xi2 = xi - xi1
        w = time_integral(upsilon_phase(xi, xi1, nu), t)
        if weighted:
            w = w * bracket(xi) ** s_prime / (bracket(xi2) ** s * bracket(xi1) ** s)
        return w

    acc = _pair_sum(grid, phi.amplitudes, conj_reflect, weight)
    k = grid.k
    phase = np.exp(-1j * t * nu * np.abs(k) * k)
    out = 2 * beta * 1j * k * phase * acc / np.sqrt(grid.L)
    out[grid.nyquist] = 0.0
    return SpectralField(grid, out, real_flag=True, check=False)


@dataclass(frozen=True)
class Interval:
    """Open interval ``|x - center| < half_width``."""

    center: float
    half_width: float

    @property
    def lo(self):
        return self.center - self.half_width

    @property
    def hi(self):
        return self.center + self.half_width

    @property
    def length(self):
        return 2.0 * self.half_width

    def contains_interval(self, other: "Interval", rtol: float = 1e-12) -> bool:
        slack = rtol * max(1.0, abs(self.center), abs(other.center))
        return other.lo >= self.lo - slack and other.hi <= self.hi + slack

    def minus(self, other: "Interval") -> "Interval":
        """Minkowski difference ``self - other``."""
        return Interval(self.center - other.center, self.half_width + other.half_width)

    def as_dict(self):
        return {"center": self.center, "half_width": self.half_width}


@dataclass(frozen=True)
class PacketSpec:
    """Interval triple ``(A, B, R)`` of one packet family at scale ``N``.

    ``A`` carries the frequency ``xi1`` of the second argument, ``B`` the
    frequency ``xi2 = xi - xi1`` of the first, ``R`` the output witness.
    For the ``v`` cases (kernel ``upsilon``) the single datum has
    spectrum ``1_B + 1_{-A}``.
    """

    case: str
    N: float
    t: float
    nu: float

    def __post_init__(self):
        if self.case not in GATEAUX_CASES:
            raise ParameterError(f"unknown packet case {self.case!r}; expected one of {GATEAUX_CASES}")
        if not self.N > 0:
            raise ParameterError("N must be positive")
        floor = self.admissibility_floor
        if not self.N > floor:
            raise ParameterError(f"{self.case} needs N > {floor:.6g}, got {self.N}")

    @property
    def kernel(self) -> str:
        return "upsilon" if self.case in ("T12i_high", "T12ii_high", "T13_b") else "theta"

    @property
    def sgn_nu(self) -> float:
        return 1.0 if self.nu >= 0 else -1.0

    @property
    def bracket_t(self) -> float:
        return math.sqrt(1.0 + self.t ** 2)

    @property
    def c_nu(self) -> float:
        return (1.0 - abs(self.nu)) / 2.0

    @property
    def a_nu(self) -> float:
        return abs(1.0 - abs(self.nu)) * (1.0 + abs(self.nu))

    @property
    def b_nu(self) -> float:
        return 1.0 / (1.0 + abs(self.nu)) - 0.5

    @property
    def c_t(self) -> float:
        return 1.0 + 8.0 * abs(self.t) * (1.0 - abs(self.nu)) ** -2

    @property
    def admissibility_floor(self) -> float:
        if self.case == "T12i_low":
            return 1.0 + abs(self.nu)
        if self.case == "T12i_high":
            if abs(self.nu) == 1.0:
                raise ParameterError("T12i_high needs |nu| != 1")
            return 1.0 / abs(1.0 - abs(self.nu))
        return 0.0

    @property
    def probe_time(self) -> float:
        """Evaluation time: ``t`` itself, or ``t_N ~ N^-2`` for the T12ii families."""
        if self.case.startswith("T12ii"):
            return 1.0 / (6.0 * (1.0 + abs(self.nu)) * self.N ** 2)
        return self.t

    def intervals(self):
        """``(A, B, R)``."""
        N, s, bt = self.N, self.sgn_nu, self.bracket_t
        c = self.case
        if c == "T12i_low":
            A = Interval(-s * N / (1 + abs(self.nu)), 1 / (4 * bt * N))
            B = Interval(s * N / 2, 1 / (8 * bt * N))
            R = Interval(-self.b_nu * s * N, 1 / (8 * bt * N))
        elif c == "T12i_high":
            a, ct, nu = self.a_nu, self.c_t, abs(self.nu)
            A = Interval(-s * (1 + nu) * N / a, 1 / (a * ct * N))
            B = Interval(-s * (1 - nu) * N / a, 1 / (2 * a * ct * N))
            R = Interval(-2 * s * N / a, 1 / (2 * a * ct * N))
        elif c in ("T12ii_low", "T12ii_high"):
            A = Interval(N, 0.5)
            B = Interval(0.0, 0.25)
            R = Interval(N, 0.25)
        elif c == "T13_a":
            A = Interval(s * N, 1 / (2 * bt * N))
            B = Interval(0.0, 1 / (4 * bt * N))
            R = Interval(s * N, 1 / (4 * bt * N))
        elif c == "T13_b":
            A = Interval(-s * N, 1 / (2 * bt * N))
            B = Interval(0.0, 1 / (4 * bt * N))
            R = Interval(-s * N, 1 / (4 * bt * N))
        else:  # T13_c
            A = Interval(-s * N, 1 / (8 * bt * N))
            B = Interval(s * N, 1 / (16 * bt * N))
            R = Interval(0.0, 1 / (16 * bt * N))
        return A, B, R

    def inclusion_holds(self) -> bool:
        A, B, R = self.intervals()
        return A.contains_interval(R.minus(B))

    def as_dict(self):
        A, B, R = self.intervals()
        return {"case": self.case, "N": self.N, "t": self.t, "nu": self.nu,
                "probe_time": self.probe_time, "A": A.as_dict(), "B": B.as_dict(), "R": R.as_dict()}


def predicted_exponent(case: str, s: float, s_prime: float) -> float:
    table = {
        "T12i_low": -0.5 - s_prime,
        "T12i_high": s_prime - 2 * s + 0.5,
        "T12ii_low": s - 2 - s_prime,
        "T12ii_high": s_prime - s - 1,
        "T13_a": s - 0.5 - s_prime,
        "T13_b": s_prime - s + 0.5,
        "T13_c": -0.5 - s_prime - s,
    }
    if case not in table:
        raise ParameterError(f"unknown packet case {case!r}")
    return table[case]


MIN_NODES = 8


def _interval_nodes(iv: Interval, step: float) -> np.ndarray:
    """Integers ``j`` with ``|j*step - center| < half_width``."""
    lo = math.floor((iv.lo) / step) - 1
    hi = math.ceil((iv.hi) / step) + 1
    j = np.arange(lo, hi + 1)
    return j[np.abs(j * step - iv.center) < iv.half_width]


@dataclass
class PacketData:
    spec: PacketSpec
    f: SpectralField | None          # first argument (B side); Grid1D mode only
    g: SpectralField | None          # second argument (A side)
    witness: Interval
    step: float
    f_nodes: np.ndarray | None = None  # lattice mode: integer labels
    g_nodes: np.ndarray | None = None


def build_packets(spec: PacketSpec, grid: Grid1D | None = None, resolution: int = 16) -> PacketData:
    """Indicator spectra for the packet family.

    With ``grid`` the packets live on its frequency lattice, which must
    place at least 8 modes inside the thinnest interval and keep every
    packet frequency below the ``n/8``-th mode; otherwise
    :class:`ResolutionError` reports the needed ``L`` and ``n``.  Without
    a grid the lattice step is ``thinnest half-width / resolution``.
    """
    if not spec.inclusion_holds():
        raise ParameterError(f"{spec.case}: R - B is not contained in A at N={spec.N}")
    A, B, R = spec.intervals()
    thinnest = min(A.half_width, B.half_width, R.half_width)
    if grid is None:
        step = thinnest / resolution
        return PacketData(spec, None, None, R, step, _interval_nodes(B, step), _interval_nodes(A, step))
    step = grid.dk
    reach = max(abs(iv.center) + iv.half_width for iv in (A, B, R))
    if spec.kernel == "upsilon":
        reach = max(reach, abs(A.center) + abs(B.center) + A.half_width + B.half_width)
    # one spare node: open intervals may lose an endpoint
    need_L = 2 * math.pi * (MIN_NODES + 1) / (2 * thinnest)
    need_n = 1 << max(3, math.ceil(math.log2(8 * reach / step + 1)))
    counts = [_interval_nodes(iv, step).size for iv in (A, B, R)]
    if min(counts) < MIN_NODES or need_n > grid.n:
        need_n_at_L = 1 << max(3, math.ceil(math.log2(8 * reach * max(grid.L, need_L) / (2 * math.pi) + 1)))
        raise ResolutionError(
            f"{spec.case} at N={spec.N}: grid (L={grid.L:.6g}, n={grid.n}) does not resolve the packets; "
            f"need L >= {need_L:.6g} and n >= {need_n_at_L}",
            required_n=need_n_at_L, required_L=need_L)
    f = np.zeros(grid.n, dtype=np.complex128)
    g = np.zeros(grid.n, dtype=np.complex128)
    f[_interval_nodes(B, step) % grid.n] = 1.0
    g[_interval_nodes(A, step) % grid.n] = 1.0
    if spec.kernel == "upsilon":
        datum = f.copy()
        datum[(-_interval_nodes(A, step)) % grid.n] = 1.0
        return PacketData(spec, SpectralField(grid, datum, True), None, R, step)
    return PacketData(spec, SpectralField(grid, f), SpectralField(grid, g), R, step)


def convolution_lower_bound_check(A: Interval, B: Interval, R: Interval):
    """Compare ``sqrt|R| |B|`` with ``||1_A * 1_B||_{L2}`` (exact trapezoid)."""
    if not A.contains_interval(R.minus(B)):
        raise ParameterError("precondition R - B subset of A violated")
    a, b = A.length, B.length
    lhs = math.sqrt(R.length) * b
    big, small = max(a, b), min(a, b)
    rhs = small * math.sqrt(big - small / 3.0)
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)


@dataclass(frozen=True)
class GateauxResult:
    N: float
    out_norm: float
    normalization: float
    ratio: float


def _lattice_ratio(data: PacketData, s, s_prime, alpha, beta, nu) -> GateauxResult:
    spec, step = data.spec, data.step
    t = spec.probe_time
    if spec.kernel == "theta":
        j2, j1 = data.f_nodes, data.g_nodes
        norm_in = math.sqrt(j2.size * step) * math.sqrt(j1.size * step)
    else:
        datum = np.union1d(data.f_nodes, -data.g_nodes)
        j2, j1 = datum, -datum
        norm_in = datum.size * step
    J2, J1 = np.meshgrid(j2, j1, indexing="ij")
    J = (J2 + J1).ravel()
    xi, xi1 = J * step, J1.ravel() * step
    if spec.kernel == "theta":
        amp = theta_kernel(0.0, xi, xi1, s, s_prime, alpha, nu).real
        w = amp * time_integral(theta_phase(xi, xi1, nu), t)
    else:
        amp = upsilon_kernel(0.0, xi, xi1, s, s_prime, beta, nu).real
        w = amp * time_integral(upsilon_phase(xi, xi1, nu), t)
    labels, inv = np.unique(J, return_inverse=True)
    out = np.zeros(labels.size, dtype=np.complex128)
    np.add.at(out, inv, w * step)
    out_norm = float(np.sqrt(np.sum(np.abs(out) ** 2) * step))
    return GateauxResult(spec.N, out_norm, norm_in, out_norm / norm_in if norm_in > 0 else float("nan"))


def _grid_ratio(data: PacketData, grid: Grid1D, s, s_prime, alpha, beta, nu) -> GateauxResult:
    spec = data.spec
    t = spec.probe_time
    if spec.kernel == "theta":
        out = second_derivative_u(data.f, data.g, t, alpha, nu, s, s_prime)
        norm_in = data.f.l2_norm() * data.g.l2_norm()
    else:
        out = second_derivative_v(data.f, t, beta, nu, s, s_prime)
        norm_in = data.f.l2_norm() ** 2
    # unitary transform: ratios equal the lattice ones divided by sqrt(2 pi)
    out_norm = out.l2_norm()
    return GateauxResult(spec.N, out_norm, norm_in, out_norm / norm_in)


def growth_point(case, N, nu, t, s, s_prime, alpha=1.0, beta=1.0, grid=None, resolution=16):
    spec = PacketSpec(case, N, t, nu)
    data = build_packets(spec, grid, resolution)
    if grid is None:
        return _lattice_ratio(data, s, s_prime, alpha, beta, nu)
    return _grid_ratio(data, grid, s, s_prime, alpha, beta, nu)


def max_workers() -> int:
    """Thread fan-out cap from ``SBO_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SBO_THREADS", "1")))
    except ValueError:
        return 1


def run_growth_probe(case, nu, t, s, s_prime, alpha=1.0, beta=1.0, N_list=(8, 16, 32, 64, 128, 256),
                     grid: Grid1D | None = None, resolution: int = 16,
                     tolerance: float = SLOPE_TOLERANCE) -> ProbeReport:
    """Fit the growth of ``||second derivative|| / ||data||^2`` in ``N``."""
    require_geometric(N_list)
    pred = predicted_exponent(case, s, s_prime)
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(
            lambda N: growth_point(case, N, nu, t, s, s_prime, alpha, beta, grid, resolution), N_list))
    return ProbeReport(
        case=case,
        params={"nu": nu, "t": t, "s": s, "s_prime": s_prime, "alpha": alpha, "beta": beta},
        N=[r.N for r in results], ratios=[r.ratio for r in results],
        predicted_exponent=pred, tolerance=tolerance,
        columns={"out_norm": [r.out_norm for r in results],
                 "normalization": [r.normalization for r in results]})
