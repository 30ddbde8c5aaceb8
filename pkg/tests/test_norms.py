import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_field
from sbo.errors import GridMismatchError, ParameterError, SizeError
from sbo.norms import (
    ExcludedModeWarning, SobolevIndex, SpaceTimeField, SpaceTimeGrid, bourgain_norm, check_same_lattice,
    embedding_constant_bound, embedding_spotcheck, homogeneous_norm, rescale, scaling_check, sobolev_norm,
)
from sbo.spectral import Grid1D, SpectralField


def unit_grid(n=64):
    # k_j = j exactly
    return Grid1D(2 * np.pi, n)


def test_sobolev_single_mode():
    g = unit_grid()
    f = SpectralField.mode(g, 3, 2.0)
    assert sobolev_norm(f, 1) == pytest.approx(2 * np.sqrt(10), rel=1e-14)
    s = -0.3
    assert sobolev_norm(f, s) == pytest.approx(2 * 10 ** (s / 2), rel=1e-14)


def test_sobolev_two_modes_brute_force():
    g = unit_grid()
    a = np.zeros(g.n, complex)
    a[2], a[-5] = 1 + 1j, 0.5
    f = SpectralField(g, a)
    s = 0.75
    expected = np.sqrt(2 * 5 ** s + 0.25 * 26 ** s)
    assert sobolev_norm(f, s) == pytest.approx(expected, rel=1e-14)


def test_sobolev_zero_is_l2(rng):
    g = Grid1D(3.3, 256)
    f = random_field(rng, g)
    assert sobolev_norm(f, 0) == pytest.approx(f.l2_norm(), rel=1e-12)
    x = f.physical()
    assert sobolev_norm(f, 0) == pytest.approx(np.sqrt(g.dx * np.sum(np.abs(x) ** 2)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(s1=st.floats(-3, 3), s2=st.floats(-3, 3), c=st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
       seed=st.integers(0, 2 ** 32 - 1))
def test_norm_monotone_and_homogeneous(s1, s2, c, seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(5.0, 64)
    f = random_field(rng, g)
    lo, hi = min(s1, s2), max(s1, s2)
    assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) * (1 + 1e-12)
    assert sobolev_norm(c * f, s1) == pytest.approx(abs(c) * sobolev_norm(f, s1), rel=1e-12, abs=1e-300)


def test_homogeneous_examples(rng):
    g = unit_grid()
    assert homogeneous_norm(SpectralField.mode(g, 2, 1.0), 0.5) == pytest.approx(np.sqrt(2), rel=1e-14)
    f = random_field(rng, g)
    a = f.amplitudes.copy()
    a[0] = 0
    f0 = SpectralField(g, a)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert homogeneous_norm(f0, 0) == pytest.approx(f0.l2_norm(), rel=1e-12)
    with pytest.warns(ExcludedModeWarning):
        assert homogeneous_norm(SpectralField.mode(g, 0, 1.0), 0.5) == 0.0


@pytest.mark.parametrize("lam", [1, 2, 4])
@pytest.mark.parametrize("s,sp", [(-0.5, -1.0), (0.0, -0.5), (1.0, 0.0)])
def test_scaling_laws(rng, lam, s, sp):
    g = Grid1D(2 * np.pi, 256)
    phi = random_field(rng, g, band=12)
    psi = random_field(rng, g, real=True, band=12)
    for f in (phi, psi):
        f.amplitudes[0] = 0
    rep = scaling_check(phi, psi, lam, s, sp)
    assert rep.passed
    assert rep.phi_error < 1e-10 and rep.psi_error < 1e-10


def test_scaling_examples():
    g = unit_grid()
    phi = SpectralField.mode(g, 3, 1.0)
    psi = SpectralField(g, SpectralField.mode(g, 2, 1.0).amplitudes + SpectralField.mode(g, -2, 1.0).amplitudes,
                        real_flag=True)
    assert scaling_check(phi, psi, 1, 0.0, 0.0).measured_phi == 1.0
    rep = scaling_check(phi, psi, 2, 0.0, -0.5)
    assert rep.measured_phi == pytest.approx(2.0, rel=1e-12)
    assert rep.measured_psi == pytest.approx(2.0, rel=1e-12)


def test_rescale_rejects_bad_lambda():
    g = unit_grid(64)
    f = SpectralField.mode(g, 10, 1.0)
    with pytest.raises(ParameterError):
        rescale(f, 1.5, 1.5)
    with pytest.raises(ParameterError):
        rescale(f, 2, 1.5)  # 20 > 64/4


def test_rescale_is_dilation():
    # f(x) = cos(3x) -> f(2x) = cos(6x): same sup, per-period normalization
    g = unit_grid(64)
    a = np.zeros(g.n, complex)
    a[3] = a[-3] = 1.0
    f = SpectralField(g, a, True)
    r = rescale(f, 2, 0.5)
    assert np.allclose(r.physical(), f.physical()[(2 * np.arange(g.n)) % g.n], atol=1e-12)


def test_bourgain_single_node():
    grid = SpaceTimeGrid(0.5, 0.25, -3, 2, 6, 5)
    vals = np.zeros(grid.shape, complex)
    vals[1, 2] = 1.0
    f = SpaceTimeField(grid, vals)
    tau0, xi0 = grid.tau[1], grid.xi[2]
    s, b = 0.7, 0.6
    expected = (1 + xi0 ** 2) ** (s / 2) * (1 + (tau0 + xi0 ** 2) ** 2) ** (b / 2) * np.sqrt(grid.cell_area)
    assert bourgain_norm(f, SobolevIndex(s, b, "schrodinger")) == pytest.approx(expected, rel=1e-14)
    nu = 0.5
    exp_bo = (1 + xi0 ** 2) ** (s / 2) * (1 + (tau0 + nu * abs(xi0) * xi0) ** 2) ** (b / 2) * np.sqrt(grid.cell_area)
    assert bourgain_norm(f, SobolevIndex(s, b, "benjamin_ono", nu)) == pytest.approx(exp_bo, rel=1e-14)


def test_bourgain_random_vs_loop(rng):
    grid = SpaceTimeGrid(0.3, 0.2, -5, -4, 7, 6)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    f = SpaceTimeField(grid, vals)
    idx = SobolevIndex(-0.4, 0.8, "benjamin_ono", -1.2)
    acc = 0.0
    for i, tau in enumerate(grid.tau):
        for j, xi in enumerate(grid.xi):
            w = (1 + xi * xi) ** (idx.s / 2) * (1 + (tau - 1.2 * abs(xi) * xi) ** 2) ** (idx.b / 2)
            acc += (w * abs(vals[i, j])) ** 2
    assert bourgain_norm(f, idx) == pytest.approx(np.sqrt(acc * grid.cell_area), rel=1e-12)
    assert bourgain_norm(f, SobolevIndex(0, 0, "schrodinger")) == pytest.approx(f.l2_norm(), rel=1e-12)


def test_indicator_norm_is_sqrt_area():
    grid = SpaceTimeGrid(0.1, 0.05, 0, 0, 10, 20)
    f = SpaceTimeField(grid, np.ones(grid.shape))
    assert f.l2_norm() == pytest.approx(np.sqrt(10 * 20 * 0.1 * 0.05), rel=1e-14)


def test_spacetime_validation():
    with pytest.raises(ParameterError):
        SpaceTimeGrid(0.0, 1.0, 0, 0, 1, 1)
    with pytest.raises(SizeError):
        SpaceTimeField(SpaceTimeGrid(1.0, 1.0, 0, 0, 2, 2), np.zeros((3, 2)))
    with pytest.raises(ParameterError):
        SobolevIndex(0.0, 0.6)
    with pytest.raises(ParameterError):
        bourgain_norm(SpaceTimeField(SpaceTimeGrid(1.0, 1.0, 0, 0, 1, 1), np.ones((1, 1))), SobolevIndex(0.0))
    with pytest.raises(GridMismatchError):
        check_same_lattice(SpaceTimeGrid(1.0, 1.0, 0, 0, 1, 1), SpaceTimeGrid(0.5, 1.0, 0, 0, 1, 1))


def windowed_mode(k, dtau, tau_half_range):
    """Free Schrodinger mode e^{-itk^2} under a Gaussian time window: F(tau) = exp(-(tau+k^2)^2/2)."""
    grid = SpaceTimeGrid.from_ranges((-k * k - tau_half_range, -k * k + tau_half_range), dtau, (k, k), 1.0)
    tau, _ = grid.mesh()
    return SpaceTimeField(grid, np.exp(-((tau + k * k) ** 2) / 2))


def test_embedding_spotcheck_refinement():
    samples = [windowed_mode(2.0, 0.4 / 2 ** r, 10.0) for r in range(5)]
    rep = embedding_spotcheck(samples, s=0.5, b=0.75)
    assert rep.bounded and abs(rep.trend_slope) < 0.1
    assert 0 < rep.constant <= rep.theoretical_bound * (1 + 1e-9)


def test_embedding_guards():
    with pytest.raises(ParameterError):
        embedding_spotcheck([], 0.0, 0.5)
    zero = SpaceTimeField(SpaceTimeGrid(1.0, 1.0, 0, 0, 4, 4), np.zeros((4, 4)))
    rep = embedding_spotcheck([zero], 0.0, 0.75)
    assert rep.ratios == () and rep.bounded
    assert embedding_constant_bound(1.0) == pytest.approx(np.sqrt(np.pi / (2 * np.pi)), rel=1e-12)
