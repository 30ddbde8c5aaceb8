import numpy as np
import pytest

from sbo.errors import ParameterError
from sbo.fitting import ProbeReport, loglog_slope, observed_orders, require_geometric


def test_synthetic_power_law():
    N = [8, 16, 32, 64, 128]
    rep = ProbeReport("synthetic", {}, N, [n ** 2 for n in N], 2.0, 0.15)
    assert rep.fitted_slope == pytest.approx(2.0, abs=1e-10)
    assert rep.passed


def test_report_sorts_and_verdicts():
    N = [32, 8, 16, 64, 128]
    rep = ProbeReport("x", {}, N, [float(n) for n in N], 1.5, 0.15, columns={"c": N})
    assert rep.N == sorted(N)
    assert rep.columns["c"] == sorted(N)
    assert not rep.passed
    assert rep.verdict_line().endswith("FAIL")
    up = ProbeReport("y", {}, [1, 2, 4, 8, 16], [1.0] * 5, 0.0, 0.1, bound="upper")
    assert up.passed and "<=" in up.verdict_line()


def test_orders():
    h = np.array([0.1, 0.05, 0.025])
    assert np.allclose(observed_orders(h, h ** 3), 3.0)
    with pytest.raises(ParameterError):
        loglog_slope([1], [1])
    with pytest.raises(ParameterError):
        loglog_slope([1, 2], [0, 1])


def test_require_geometric():
    require_geometric([8, 16, 32, 64, 128])
    with pytest.raises(ParameterError):
        require_geometric([8, 16, 32, 64])
    with pytest.raises(ParameterError):
        require_geometric([8, 16, 32, 64, 100])
