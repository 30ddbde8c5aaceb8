"""Periodic grids, discrete Fourier transforms and Fourier multipliers.

Conventions (fixed for the whole package)
-----------------------------------------
* The real line is approximated by the torus ``[0, L)`` sampled at ``n``
  equispaced points.  Angular frequencies are ``k_j = 2*pi*j/L`` for
  ``j`` in ``[-n/2, n/2)``; amplitudes are stored in FFT order.
* Amplitudes use the *unitary* normalization
  ``a_j = sqrt(L)/n * sum_m f(x_m) exp(-i k_j x_m)`` so that the discrete
  Parseval identity reads ``dx * sum |f(x_m)|**2 == sum |a_j|**2``.
  Every norm in the package is therefore a plain weighted l2 sum of
  amplitudes with unit weight.
* Working with ``exp(i k x)`` instead of ``exp(2*pi*i x xi)`` rescales
  frequencies by ``2*pi``; no norm ratio or fitted exponent depends on it.
* The Hilbert transform has symbol ``-i*sgn(k)`` with the ``k = 0`` mode
  mapped to zero.  The Benjamin-Ono phase uses the continuous combination
  ``|k|*k``.  Hence the bookkeeping convention ``sgn(0) := 1`` never
  affects a value computed here.
* The Nyquist mode ``j = -n/2`` has no partner.  Derivative-bearing
  multipliers (derivative, Hilbert) set it to zero.  The Benjamin-Ono
  semigroup leaves it unchanged so that the evolution stays unitary and
  real fields stay real.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError, ParameterError, SizeError

REAL_TOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid of ``n`` points on ``[0, L)``."""

    L: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ParameterError(f"grid length must be positive, got {self.L}")
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ParameterError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def indices(self) -> np.ndarray:
        """Integer mode labels ``j`` in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @property
    def k(self) -> np.ndarray:
        """Angular frequencies ``2*pi*j/L`` in FFT order."""
        return (2.0 * np.pi / self.L) * self.indices

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def nyquist(self) -> int:
        """Array position of the unpaired mode ``j = -n/2``."""
        return self.n // 2

    def position(self, j: int) -> int:
        """Array position of mode label ``j``."""
        if not -self.n // 2 <= j < self.n // 2:
            raise ParameterError(f"mode {j} outside [-{self.n // 2}, {self.n // 2})")
        return j % self.n

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask of modes kept by the 2/3 rule (``3|j| < n``)."""
        return 3 * np.abs(self.indices) < self.n

    def mirror(self) -> np.ndarray:
        """Positions ``p(-j)`` for every position ``p(j)`` (Nyquist maps to itself)."""
        return (-np.arange(self.n)) % self.n


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Unitary-normalized Fourier amplitudes on a :class:`Grid1D`.

    ``real_flag`` asserts that the physical field is real, i.e. the
    amplitudes are conjugate symmetric.  The assertion is checked on
    construction to ``1e-12`` relative to the largest amplitude.
    """

    grid: Grid1D
    amplitudes: np.ndarray
    real_flag: bool = False
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (self.grid.n,):
            raise SizeError(f"expected {self.grid.n} amplitudes, got shape {a.shape}")
        object.__setattr__(self, "amplitudes", a)
        if self.real_flag and self.check:
            err = conjugate_symmetry_error(a, self.grid)
            if err > REAL_TOL:
                raise ValueError(f"real_flag set but conjugate symmetry broken by {err:.3e}")

    @classmethod
    def zeros(cls, grid: Grid1D, real: bool = False) -> "SpectralField":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128), real)

    @classmethod
    def mode(cls, grid: Grid1D, j: int, amplitude: complex = 1.0) -> "SpectralField":
        """Single Fourier mode with label ``j``."""
        a = np.zeros(grid.n, dtype=np.complex128)
        a[grid.position(j)] = amplitude
        return cls(grid, a)

    def physical(self) -> np.ndarray:
        return inverse_transform(self)

    def with_amplitudes(self, amplitudes, real_flag=None) -> "SpectralField":
        flag = self.real_flag if real_flag is None else real_flag
        return SpectralField(self.grid, amplitudes, flag)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return SpectralField(self.grid, self.amplitudes + other.amplitudes,
                             self.real_flag and other.real_flag, check=False)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return SpectralField(self.grid, self.amplitudes - other.amplitudes,
                             self.real_flag and other.real_flag, check=False)

    def __mul__(self, c) -> "SpectralField":
        real = self.real_flag and np.isreal(c)
        return SpectralField(self.grid, c * self.amplitudes, bool(real), check=False)

    __rmul__ = __mul__


def _same_grid(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def conjugate_symmetry_error(amplitudes: np.ndarray, grid: Grid1D) -> float:
    """Max of ``|a(-k) - conj(a(k))|`` (Nyquist and zero modes must be real),
    relative to ``max |a|``."""
    scale = np.max(np.abs(amplitudes))
    if scale == 0:
        return 0.0
    diff = amplitudes[grid.mirror()] - np.conj(amplitudes)
    return float(np.max(np.abs(diff)) / scale)


def forward_transform(samples, grid: Grid1D, real: bool | None = None) -> SpectralField:
    """Physical samples -> unitary-normalized amplitudes.

    ``real`` defaults to whether ``samples`` has a real dtype.
    """
    f = np.asarray(samples)
    if f.shape != (grid.n,):
        raise SizeError(f"expected {grid.n} samples, got shape {f.shape}")
    if real is None:
        real = not np.iscomplexobj(f)
    a = np.fft.fft(f) * (np.sqrt(grid.L) / grid.n)
    if real:
        a = symmetrize(a, grid)
    return SpectralField(grid, a, bool(real), check=False)


def inverse_transform(field: SpectralField) -> np.ndarray:
    f = np.fft.ifft(field.amplitudes) * (field.grid.n / np.sqrt(field.grid.L))
    return f.real.copy() if field.real_flag else f


def symmetrize(amplitudes: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Project onto conjugate-symmetric amplitudes (removes round-off only)."""
    return 0.5 * (amplitudes + np.conj(amplitudes[grid.mirror()]))


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier ``m(k)``.

    ``func`` maps a grid to the symbol values in FFT order.  The flags
    record whether the symbol maps real fields to real fields and whether
    it is unimodular.
    """

    name: str
    params: tuple
    func: Callable[[Grid1D], np.ndarray] = field(compare=False, repr=False)
    real_preserving: bool = False
    unitary: bool = False

    def values(self, grid: Grid1D) -> np.ndarray:
        return np.asarray(self.func(grid), dtype=np.complex128)


def _zero_nyquist(m: np.ndarray, grid: Grid1D) -> np.ndarray:
    m = m.astype(np.complex128)
    m[grid.nyquist] = 0.0
    return m


def hilbert_symbol() -> MultiplierSymbol:
    def func(grid):
        return _zero_nyquist(-1j * np.sign(grid.k), grid)
    return MultiplierSymbol("hilbert", (), func, real_preserving=True)


def derivative_symbol(order: int = 1) -> MultiplierSymbol:
    if order < 1 or int(order) != order:
        raise ParameterError(f"derivative order must be a positive integer, got {order}")

    def func(grid):
        return _zero_nyquist((1j * grid.k) ** order, grid)
    return MultiplierSymbol("derivative", (order,), func, real_preserving=True)


def bracket_power_symbol(s: float) -> MultiplierSymbol:
    """``<k>^s = (1 + k^2)^(s/2)``."""
    def func(grid):
        return (1.0 + grid.k ** 2) ** (0.5 * s)
    return MultiplierSymbol("bracket_power", (s,), func, real_preserving=True)


def abs_power_symbol(s: float) -> MultiplierSymbol:
    """``|k|^s`` with the zero mode mapped to 0 (fractional ``D_x^s``)."""
    def func(grid):
        k = np.abs(grid.k)
        out = np.zeros_like(k)
        nz = k > 0
        out[nz] = k[nz] ** s
        return out
    return MultiplierSymbol("abs_power", (s,), func, real_preserving=True)


def schrodinger_symbol(t: float) -> MultiplierSymbol:
    """Free Schrodinger group ``exp(i t d_xx)``: symbol ``exp(-i k^2 t)``."""
    def func(grid):
        return np.exp(-1j * grid.k ** 2 * t)
    return MultiplierSymbol("schrodinger", (t,), func, unitary=True)


def benjamin_ono_symbol(t: float, nu: float) -> MultiplierSymbol:
    """Linear Benjamin-Ono group ``exp(-nu t H d_xx)``: symbol ``exp(-i nu |k| k t)``."""
    def func(grid):
        k = grid.k
        m = np.exp(-1j * nu * np.abs(k) * k * t)
        m[grid.nyquist] = 1.0
        return m
    return MultiplierSymbol("benjamin_ono", (t, nu), func, real_preserving=True, unitary=True)


def apply_multiplier(field: SpectralField, sym: MultiplierSymbol) -> SpectralField:
    m = sym.values(field.grid)
    if m.shape != field.amplitudes.shape:
        raise GridMismatchError(f"symbol {sym.name} evaluated to shape {m.shape}")
    return SpectralField(field.grid, m * field.amplitudes,
                         field.real_flag and sym.real_preserving, check=False)


def hilbert_transform(field: SpectralField) -> SpectralField:
    return apply_multiplier(field, hilbert_symbol())


def schrodinger_semigroup(field: SpectralField, t: float) -> SpectralField:
    return apply_multiplier(field, schrodinger_symbol(t))


def bo_semigroup(field: SpectralField, t: float, nu: float) -> SpectralField:
    return apply_multiplier(field, benjamin_ono_symbol(t, nu))
