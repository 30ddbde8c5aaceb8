import math

import numpy as np
import pytest
from scipy.special import gamma as Gamma

from sbo.calculus import calculus_oracle, sweep_p, sweep_quadratic_shift, sweep_separation
from sbo.errors import ParameterError


def test_example_i_exact():
    res = calculus_oracle("i", {"beta": 1.0, "gamma": 1.0, "q": 0.0, "r": 0.0})
    assert res.lhs == pytest.approx(math.pi / 2, rel=1e-12)
    assert res.rhs == 1.0


def test_example_iii_exact():
    # int dx / sqrt(1 + x^4) = Gamma(1/4)^2 / (2 sqrt(pi))
    res = calculus_oracle("iii", {"alpha": 1.0, "p": 1.0, "q": 0.0, "r": 0.0})
    assert res.lhs == pytest.approx(Gamma(0.25) ** 2 / (2 * math.sqrt(math.pi)), rel=1e-10)
    assert res.rhs == 1.0


def test_i_shifted_closed_form():
    # beta = gamma = 1: int dx / ((1+x^2)(1+(x-d)^2)) = 2 pi / (d^2 + 4)
    for d in (0.5, 3.0, 40.0):
        res = calculus_oracle("i", {"beta": 1.0, "gamma": 1.0, "q": 0.0, "r": d})
        assert res.lhs == pytest.approx(2 * math.pi / (d * d + 4), rel=1e-10)


def test_ii_gamma_one_is_single_bracket():
    # gamma = 1 removes the second bracket: int <x>^{-2 beta} dx = sqrt(pi) Gamma(beta - 1/2) / Gamma(beta)
    beta = 0.8
    res = calculus_oracle("ii", {"beta": beta, "gamma": 1.0, "q": 2.0, "r": -7.0})
    exact = math.sqrt(math.pi) * Gamma(beta - 0.5) / Gamma(beta)
    assert res.lhs == pytest.approx(exact, rel=1e-9)


def test_iii_scaling_in_p():
    # q = r = 0: substituting y = sqrt|p| x gives lhs(p) = lhs(1) / sqrt|p|
    base = calculus_oracle("iii", {"alpha": 0.8, "p": 1.0}).lhs
    for p in (1e-3, 0.1, 10.0, -4.0):
        assert calculus_oracle("iii", {"alpha": 0.8, "p": p}).lhs == pytest.approx(base / math.sqrt(abs(p)), rel=1e-9)


def test_tail_bound_is_small():
    res = calculus_oracle("i", {"beta": 0.6, "gamma": 0.6, "q": 0.0, "r": 100.0})
    assert 0 < res.tail_bound < res.lhs


@pytest.mark.parametrize("params,which", [
    ({"beta": 0.5, "gamma": 1.0}, "i"),
    ({"beta": 1.0, "gamma": 1.2}, "ii"),
    ({"alpha": 0.5, "p": 1.0}, "iii"),
    ({"alpha": 1.0, "p": 0.0}, "iii"),
    ({}, "iv"),
])
def test_parameter_errors(params, which):
    with pytest.raises(ParameterError):
        calculus_oracle(which, params)


@pytest.mark.parametrize("which", ["i", "ii"])
@pytest.mark.parametrize("beta,gamma", [(0.75, 0.75), (1.0, 0.75), (0.75, 1.0), (1.0, 1.0)])
def test_separation_sweep_no_growth(which, beta, gamma):
    res = sweep_separation(which, beta=beta, gamma=gamma)
    assert res.passed, res.verdict_line()
    assert all(np.isfinite(res.constants))


def test_p_sweep_no_growth():
    res = sweep_p()
    assert res.passed, res.verdict_line()
    assert max(res.values) / min(res.values) >= 1e3


def test_quadratic_shift_no_growth():
    res = sweep_quadratic_shift()
    assert res.passed, res.verdict_line()


def test_large_p_constant_grows():
    # the 1/|p| bound is not uniform for |p| > 1: the integral decays only like |p|^{-1/2}
    consts = [calculus_oracle("iii", {"p": p}).constant for p in (1.0, 100.0)]
    assert consts[1] / consts[0] == pytest.approx(10.0, rel=1e-6)
