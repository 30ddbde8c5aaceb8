"""Nonlinear evolution of the Schrodinger-Benjamin-Ono system.

    i u_t + u_xx = alpha u v
    v_t + nu H v_xx = beta (|u|^2)_x

Two independent routes are provided: Strang splitting (exact linear
half-steps, explicit-midpoint nonlinear step) and Picard iteration on the
Duhamel integral equations with fourth-order time quadrature.  Every
product is de-aliased by the 2/3 rule, which turns the spatial
discretization into a Galerkin truncation: mass, momentum and energy are
then conserved by the semi-discrete flow, and their drift measures time
discretization error only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, GridMismatchError, ParameterError
from .norms import sobolev_norm
from .spectral import Grid1D, SpectralField, forward_transform, symmetrize


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    beta: float
    nu: float
    grid: Grid1D
    dt: float
    T: float

    def __post_init__(self):
        if self.alpha * self.beta == 0:
            raise ParameterError("alpha*beta must be non-zero")
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.T > 0:
            raise ParameterError(f"T must be positive, got {self.T}")


@dataclass(frozen=True)
class SolutionState:
    t: float
    u: SpectralField
    v: SpectralField

    def __post_init__(self):
        if not self.v.real_flag:
            raise ParameterError("v must be a real field")
        if self.u.grid != self.v.grid:
            raise GridMismatchError("u and v live on different grids")


@dataclass(frozen=True)
class ConservedTriple:
    mass: float
    momentum_like: float
    energy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mass, self.momentum_like, self.energy])


class _Ops:
    """Precomputed arrays for one grid; works on raw amplitude vectors."""

    def __init__(self, grid: Grid1D):
        self.grid = grid
        self.n = grid.n
        self.k = grid.k
        self.mask = grid.dealias_mask()
        self.ik = 1j * self.k
        self.ik[grid.nyquist] = 0.0
        self.to_phys = grid.n / np.sqrt(grid.L)
        self.to_spec = np.sqrt(grid.L) / grid.n

    def phys(self, a):
        return np.fft.ifft(a * self.mask) * self.to_phys

    def spec(self, f):
        return np.fft.fft(f) * self.to_spec * self.mask

    def nonlinear(self, a_u, a_v, alpha, beta):
        u = self.phys(a_u)
        v = self.phys(a_v).real
        du = -1j * alpha * self.spec(u * v)
        dv = beta * self.ik * self.spec(np.abs(u) ** 2)
        return du, dv


def nonlinear_terms(state: SolutionState, params: SystemParams):
    """Right-hand sides ``(-i alpha u v, beta (|u|^2)_x)`` as spectral fields."""
    ops = _Ops(state.u.grid)
    du, dv = ops.nonlinear(state.u.amplitudes, state.v.amplitudes, params.alpha, params.beta)
    grid = state.u.grid
    return SpectralField(grid, du), SpectralField(grid, symmetrize(dv, grid), True, check=False)


class SplitStepper:
    """Strang splitting: linear half-step, nonlinear midpoint step, linear half-step."""

    def __init__(self, params: SystemParams):
        self.params = params
        self.ops = _Ops(params.grid)
        k = params.grid.k
        half = 0.5 * params.dt
        self.lin_u = np.exp(-1j * k ** 2 * half)
        self.lin_v = np.exp(-1j * params.nu * np.abs(k) * k * half)
        self.lin_v[params.grid.nyquist] = 1.0

    def advance(self, a_u, a_v, step_index=0):
        p = self.params
        dt = p.dt
        a_u = self.lin_u * a_u
        a_v = self.lin_v * a_v
        du, dv = self.ops.nonlinear(a_u, a_v, p.alpha, p.beta)
        mu, mv = a_u + 0.5 * dt * du, a_v + 0.5 * dt * dv
        du, dv = self.ops.nonlinear(mu, mv, p.alpha, p.beta)
        a_u = self.lin_u * (a_u + dt * du)
        a_v = symmetrize(self.lin_v * (a_v + dt * dv), p.grid)
        if not (np.all(np.isfinite(a_u)) and np.all(np.isfinite(a_v))):
            raise DivergenceError(f"non-finite values at step {step_index}", step=step_index)
        return a_u, a_v


def step_splitstep(state: SolutionState, params: SystemParams, step_index: int = 0) -> SolutionState:
    a_u, a_v = SplitStepper(params).advance(state.u.amplitudes, state.v.amplitudes, step_index)
    grid = params.grid
    return SolutionState(state.t + params.dt, SpectralField(grid, a_u),
                         SpectralField(grid, a_v, True, check=False))


@dataclass
class Run:
    """Final state plus a recorded time series."""

    state: SolutionState
    times: np.ndarray
    conserved: np.ndarray      # shape (len(times), 3)
    norms: np.ndarray          # shape (len(times), 2): ||u||_{H^s}, ||v||_{H^s'}

    def relative_drift(self) -> np.ndarray:
        """Max over time of ``|Q(t) - Q(0)| / |Q(0)|`` per quantity (absolute if ``Q(0) = 0``)."""
        q0 = self.conserved[0]
        dev = np.max(np.abs(self.conserved - q0), axis=0)
        scale = np.where(np.abs(q0) > 0, np.abs(q0), 1.0)
        return dev / scale

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mass", "momentum_like", "energy", "norm_u_Hs", "norm_v_Hs_prime"])
            for t, q, nrm in zip(self.times, self.conserved, self.norms):
                w.writerow([f"{x:.17g}" for x in (t, *q, *nrm)])


def run_splitstep(state: SolutionState, params: SystemParams, record_every: int = 1,
                  s: float = 0.0, s_prime: float = 0.0) -> Run:
    """Integrate from ``state.t`` to ``state.t + T`` recording every ``record_every`` steps."""
    nsteps = int(round(params.T / params.dt))
    if not np.isclose(nsteps * params.dt, params.T, rtol=1e-9, atol=0):
        raise ParameterError(f"T={params.T} is not a multiple of dt={params.dt}")
    grid = params.grid
    stepper = SplitStepper(params)
    a_u, a_v = state.u.amplitudes.copy(), state.v.amplitudes.copy()
    times, cons, norms = [], [], []

    def record(step, a_u, a_v):
        st = SolutionState(state.t + step * params.dt, SpectralField(grid, a_u, check=False),
                           SpectralField(grid, a_v, True, check=False))
        times.append(st.t)
        cons.append(conserved_quantities(st, params).as_array())
        norms.append((sobolev_norm(st.u, s), sobolev_norm(st.v, s_prime)))

    record(0, a_u, a_v)
    for step in range(1, nsteps + 1):
        a_u, a_v = stepper.advance(a_u, a_v, step)
        if step % record_every == 0 or step == nsteps:
            record(step, a_u, a_v)
    final = SolutionState(state.t + params.T, SpectralField(grid, a_u),
                          SpectralField(grid, a_v, True, check=False))
    return Run(final, np.array(times), np.array(cons), np.array(norms))


def conserved_quantities(state: SolutionState, params: SystemParams) -> ConservedTriple:
    """Mass, momentum-like and energy invariants.

    Quadratic terms are evaluated by Parseval; ``int v |u|^2`` by the
    trapezoid rule in physical space, exact for de-aliased data.
    """
    grid = state.u.grid
    a_u, a_v = state.u.amplitudes, state.v.amplitudes
    k = grid.k.copy()
    k[grid.nyquist] = 0.0
    au2 = np.abs(a_u) ** 2
    av2 = np.abs(a_v) ** 2
    mass = float(np.sum(au2))
    # Im int u conj(u_x) = -sum k |a_k|^2
    momentum = float(-np.sum(k * au2) + params.alpha / (2 * params.beta) * np.sum(av2))
    u = state.u.physical()
    v = state.v.physical()
    interaction = float(np.sum(v * np.abs(u) ** 2) * grid.dx)
    energy = float(np.sum(k ** 2 * au2) + params.alpha * interaction
                   - params.alpha * params.nu / (2 * params.beta) * np.sum(np.abs(grid.k) * av2))
    return ConservedTriple(mass, momentum, energy)


def simpson_cumulative_weights(M: int, h: float) -> np.ndarray:
    """``W`` with ``int_0^{t_j} g ~ sum_k W[j, k] g(t_k)`` on ``t_k = k h``.

    Fourth order at every node: composite Simpson up to the last even node,
    Simpson's 3/8 rule on the final three intervals for odd ``j``, and the
    integrated cubic through ``t_0..t_3`` for ``j = 1``.
    """
    if M < 3:
        raise ParameterError("need at least 4 quadrature nodes")
    W = np.zeros((M + 1, M + 1))
    W[1, :4] = h * np.array([9.0, 19.0, -5.0, 1.0]) / 24.0
    for j in range(2, M + 1):
        even_end = j if j % 2 == 0 else j - 3
        if even_end > 0:
            w = np.ones(even_end + 1)
            w[1:even_end:2] = 4.0
            w[2:even_end:2] = 2.0
            W[j, :even_end + 1] += h / 3.0 * w
        if j % 2 == 1:
            W[j, j - 3:j + 1] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return W


@dataclass
class PicardResult:
    state: SolutionState
    differences: list          # per iteration: (sup_t ||du||_{H^s}, sup_t ||dv||_{H^s'})
    times: np.ndarray
    u_history: np.ndarray      # amplitudes at every quadrature node
    v_history: np.ndarray


def picard_iterate(phi: SpectralField, psi: SpectralField, params: SystemParams,
                   iterations: int, quadrature_nodes: int, s: float = 0.0,
                   s_prime: float = 0.0, tol: float = 0.0) -> PicardResult:
    """Fixed-point iteration on the Duhamel equations over ``[0, T]``.

    Starts from the zero iterate, so iteration 1 returns the free
    evolutions.  ``differences[m]`` is the sup over quadrature nodes of
    the change produced by iteration ``m + 1``.  Stops early once both
    differences fall below ``tol``.
    """
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    if quadrature_nodes < 4:
        raise ParameterError("quadrature_nodes must be >= 4")
    if phi.grid != psi.grid:
        raise GridMismatchError("phi and psi live on different grids")
    if not psi.real_flag:
        raise ParameterError("psi must be a real field")
    grid = phi.grid
    ops = _Ops(grid)
    M = quadrature_nodes - 1
    times = np.linspace(0.0, params.T, M + 1)
    W = simpson_cumulative_weights(M, params.T / M)
    k = grid.k
    E_u = np.exp(-1j * np.outer(times, k ** 2))
    E_v = np.exp(-1j * params.nu * np.outer(times, np.abs(k) * k))
    E_v[:, grid.nyquist] = 1.0
    free_u = E_u * phi.amplitudes
    free_v = E_v * psi.amplitudes
    wu = (1.0 + k ** 2) ** s
    wv = (1.0 + k ** 2) ** s_prime

    def sup_norm(h, w):
        return float(np.sqrt(np.max(np.sum(w * np.abs(h) ** 2, axis=1))))

    scale = sobolev_norm(phi, s) + sobolev_norm(psi, s_prime)
    U = np.zeros_like(free_u)
    V = np.zeros_like(free_v)
    diffs = []
    for it in range(iterations):
        if it == 0:
            U_new, V_new = free_u.copy(), free_v.copy()
        else:
            du = np.empty_like(U)
            dv = np.empty_like(V)
            for j in range(M + 1):
                du[j], dv[j] = ops.nonlinear(U[j], V[j], params.alpha, params.beta)
            U_new = free_u + E_u * (W @ (np.conj(E_u) * du))
            V_new = free_v + E_v * (W @ (np.conj(E_v) * dv))
            V_new = 0.5 * (V_new + np.conj(V_new[:, grid.mirror()]))
        if not (np.all(np.isfinite(U_new)) and np.all(np.isfinite(V_new))):
            raise DivergenceError(f"non-finite Picard iterate {it + 1}", step=it + 1)
        size = sup_norm(U_new, wu) + sup_norm(V_new, wv)
        if scale > 0 and size > 1e6 * scale:
            raise DivergenceError(
                f"Picard iterate {it + 1} grew to {size:.3e} (initial {scale:.3e}); horizon too long",
                step=it + 1)
        diffs.append((sup_norm(U_new - U, wu), sup_norm(V_new - V, wv)))
        U, V = U_new, V_new
        if tol > 0 and it > 0 and max(diffs[-1]) < tol:
            break
    final = SolutionState(params.T, SpectralField(grid, U[-1]),
                          SpectralField(grid, V[-1], True, check=False))
    return PicardResult(final, diffs, times, U, V)


def initial_field(grid: Grid1D, profile: dict, real: bool) -> SpectralField:
    """Build initial data from a profile description.

    Profiles::

        {"type": "zero"}
        {"type": "gaussian", "amplitude": A, "center": x0, "width": w, "wavenumber": k0}
        {"type": "single-mode", "mode": j, "amplitude": a}
        {"type": "packet", "amplitude": A, "center": x0, "width": w, "wavenumber": k0}
        {"type": "csv", "path": file}   # columns: mode, re, im

    ``gaussian`` is ``A exp(-((x-x0)/w)^2)`` times ``exp(i k0 x)`` for
    complex fields (the phase is dropped for real ones); ``packet`` uses
    ``cos(k0 x)`` for real fields.  A real single mode is ``a e^{ikx} + c.c.``.
    The ``csv`` amplitudes are unitary-normalized.
    """
    kind = profile.get("type", "gaussian")
    x = grid.x
    if kind == "zero":
        return SpectralField.zeros(grid, real)
    if kind in ("gaussian", "packet"):
        amp = profile.get("amplitude", 1.0)
        x0 = profile.get("center", grid.L / 2)
        w = profile.get("width", 1.0)
        k0 = profile.get("wavenumber", 0.0)
        env = amp * np.exp(-((x - x0) / w) ** 2)
        if real:
            samples = env * (np.cos(k0 * (x - x0)) if kind == "packet" else 1.0)
        else:
            samples = env * np.exp(1j * k0 * (x - x0))
        return forward_transform(samples, grid, real)
    if kind == "single-mode":
        j = int(profile["mode"])
        a = complex(profile.get("amplitude", 1.0))
        amps = np.zeros(grid.n, dtype=np.complex128)
        amps[grid.position(j)] += a
        if real:
            amps[grid.position(-j)] += np.conj(a)
            amps = symmetrize(amps, grid)
        return SpectralField(grid, amps, real)
    if kind == "csv":
        data = np.loadtxt(profile["path"], delimiter=",", ndmin=2, skiprows=1)
        amps = np.zeros(grid.n, dtype=np.complex128)
        for j, re, im in data:
            amps[grid.position(int(j))] = re + 1j * im
        return SpectralField(grid, amps, real)
    raise ParameterError(f"unknown initial profile type {kind!r}")
