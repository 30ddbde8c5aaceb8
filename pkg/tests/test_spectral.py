import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_field
from sbo.errors import GridMismatchError, ParameterError, SizeError
from sbo.spectral import (
    Grid1D, SpectralField, apply_multiplier, benjamin_ono_symbol, bo_semigroup, bracket_power_symbol,
    conjugate_symmetry_error, derivative_symbol, forward_transform, hilbert_symbol, hilbert_transform,
    inverse_transform, schrodinger_semigroup,
)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid1D(1.0, 12)
    with pytest.raises(ParameterError):
        Grid1D(1.0, 4)
    with pytest.raises(ParameterError):
        Grid1D(-1.0, 16)
    g = Grid1D(2 * np.pi, 16)
    assert g.dx * g.n == pytest.approx(g.L, rel=0, abs=1e-15)
    assert g.indices[g.nyquist] == -8
    assert np.array_equal(np.sort(g.indices), np.arange(-8, 8))


def test_forward_constant_and_cosine():
    g = Grid1D(3.0, 32)
    f = forward_transform(np.ones(g.n), g)
    a = f.amplitudes
    assert abs(a[0]) > 0
    assert np.max(np.abs(a[1:])) < 1e-12
    c = forward_transform(np.cos(2 * np.pi * g.x / g.L), g)
    a = c.amplitudes
    assert a[1] == pytest.approx(a[-1], abs=1e-12)
    mask = np.ones(g.n, bool)
    mask[[1, -1]] = False
    assert np.max(np.abs(a[mask])) < 1e-12


def test_size_error():
    with pytest.raises(SizeError):
        forward_transform(np.zeros(7), Grid1D(1.0, 8))


@pytest.mark.parametrize("n", [8, 64, 512, 4096])
def test_round_trip_and_parseval(rng, n):
    g = Grid1D(5.0, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    field = forward_transform(f, g)
    back = inverse_transform(field)
    assert np.max(np.abs(back - f)) / np.max(np.abs(f)) < 1e-12
    assert g.dx * np.sum(np.abs(f) ** 2) == pytest.approx(np.sum(np.abs(field.amplitudes) ** 2), rel=1e-12)


def test_real_flag_checked():
    g = Grid1D(1.0, 8)
    a = np.zeros(8, complex)
    a[1] = 1.0
    with pytest.raises(ValueError):
        SpectralField(g, a, real_flag=True)
    a[-1] = 1.0
    SpectralField(g, a, real_flag=True)


def test_multiplier_examples():
    g = Grid1D(2 * np.pi, 16)
    zero = SpectralField.zeros(g)
    assert np.all(apply_multiplier(zero, derivative_symbol()).amplitudes == 0)
    f = SpectralField.mode(g, 3, 2.0)
    d = apply_multiplier(f, derivative_symbol())
    assert d.amplitudes[3] == pytest.approx(6j, abs=1e-14)
    s = 0.7
    b = apply_multiplier(f, bracket_power_symbol(s))
    assert b.amplitudes[3] == pytest.approx(2 * (1 + 9) ** (s / 2), rel=1e-14)


def test_multiplier_grid_mismatch():
    g = Grid1D(1.0, 16)
    sym = hilbert_symbol()
    other = Grid1D(1.0, 32)
    f = SpectralField.zeros(g)
    bad = type(sym)("bad", (), lambda grid: np.ones(other.n), True, False)
    with pytest.raises(GridMismatchError):
        apply_multiplier(f, bad)
    with pytest.raises(GridMismatchError):
        f + SpectralField.zeros(other)


def test_hilbert_cosine_to_sine():
    g = Grid1D(3.0, 64)
    f = forward_transform(np.cos(2 * np.pi * g.x / g.L), g, real=True)
    h = hilbert_transform(f)
    assert h.real_flag
    assert np.max(np.abs(h.physical() - np.sin(2 * np.pi * g.x / g.L))) < 1e-12
    const = forward_transform(np.full(g.n, 2.5), g, real=True)
    assert np.max(np.abs(hilbert_transform(const).amplitudes)) == 0


def test_hilbert_twice_is_minus_identity(rng):
    g = Grid1D(7.0, 128)
    f = random_field(rng, g, real=True)
    hh = hilbert_transform(hilbert_transform(f))
    nz = (g.indices != 0) & (np.arange(g.n) != g.nyquist)
    assert np.max(np.abs(hh.amplitudes[nz] + f.amplitudes[nz])) < 1e-12
    assert conjugate_symmetry_error(hh.amplitudes, g) < 1e-12


def test_schrodinger_examples(rng):
    g = Grid1D(2 * np.pi, 32)
    f = random_field(rng, g)
    assert np.allclose(schrodinger_semigroup(f, 0.0).amplitudes, f.amplitudes, rtol=0, atol=0)
    m = SpectralField.mode(g, 3, 1.5 - 0.5j)
    t = 0.37
    out = schrodinger_semigroup(m, t)
    assert out.amplitudes[3] == pytest.approx((1.5 - 0.5j) * np.exp(-1j * 9 * t), abs=1e-14)
    assert schrodinger_semigroup(f, t).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


def test_bo_examples(rng):
    g = Grid1D(2 * np.pi, 32)
    f = random_field(rng, g, real=True)
    assert np.array_equal(bo_semigroup(f, 1.3, 0.0).amplitudes, f.amplitudes)
    m = SpectralField.mode(g, 2, 1.0)
    assert bo_semigroup(m, 1.0, 0.5).amplitudes[2] == pytest.approx(np.exp(-2j), abs=1e-14)
    out = bo_semigroup(f, 0.81, 0.5)
    assert out.real_flag
    assert conjugate_symmetry_error(out.amplitudes, g) < 1e-12


def test_bo_symbol_odd_phase():
    g = Grid1D(3.0, 64)
    m = benjamin_ono_symbol(0.7, -1.3).values(g)
    assert np.array_equal(m[g.mirror()], np.conj(m))


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(-5, 5), t2=st.floats(-5, 5), nu=st.floats(-3, 3), s=st.floats(-2, 2),
       seed=st.integers(0, 2 ** 32 - 1))
def test_semigroups_commute_and_group_law(t1, t2, nu, s, seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(4.0, 64)
    f = random_field(rng, g)
    S = lambda x, t: schrodinger_semigroup(x, t)
    B = lambda x, t: bo_semigroup(x, t, nu)
    P = lambda x: apply_multiplier(x, bracket_power_symbol(s))
    # phases t k^2 are rounded: the floor is eps * |t| * |nu| k_max^2 (1e-12 for exact dyadic times)
    phase = (1 + abs(t1) + abs(t2)) * (1 + abs(nu)) * np.max(g.k ** 2)
    tol = max(1e-12, 4 * np.finfo(float).eps * phase) * max(f.l2_norm(), 1.0)
    assert (S(S(f, t1), t2) - S(f, t1 + t2)).l2_norm() < tol
    assert (B(B(f, t1), t2) - B(f, t1 + t2)).l2_norm() < tol
    assert (S(B(f, t1), t2) - B(S(f, t2), t1)).l2_norm() < tol
    ps = P(S(f, t1))
    assert (ps - S(P(f), t1)).l2_norm() < 1e-12 * max(ps.l2_norm(), 1.0)
