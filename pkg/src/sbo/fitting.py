"""Power-law fitting and the probe report shared by the growth probes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ParameterError("need at least two (x, y) pairs of equal length")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError("log-log fit needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def observed_orders(h, err) -> np.ndarray:
    """Successive convergence orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    return np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])


@dataclass
class ProbeReport:
    """Per-N measurements with a fitted log-log slope and a verdict.

    ``bound`` is ``"lower"`` when the prediction is a growth lower bound
    (pass iff ``slope >= predicted - tolerance``) and ``"upper"`` for
    boundedness checks (pass iff ``slope <= predicted + tolerance``).
    """

    case: str
    params: dict
    N: list
    ratios: list
    predicted_exponent: float
    tolerance: float
    bound: str = "lower"
    columns: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    fitted_slope: float = float("nan")

    def __post_init__(self):
        if len(self.N) != len(self.ratios):
            raise ParameterError("N and ratios differ in length")
        order = np.argsort(self.N, kind="stable")
        self.N = [self.N[i] for i in order]
        self.ratios = [self.ratios[i] for i in order]
        self.columns = {k: [v[i] for i in order] for k, v in self.columns.items()}
        self.fitted_slope = loglog_slope(self.N, self.ratios)

    @property
    def threshold(self) -> float:
        if self.bound == "lower":
            return self.predicted_exponent - self.tolerance
        return self.predicted_exponent + self.tolerance

    @property
    def passed(self) -> bool:
        if self.bound == "lower":
            return self.fitted_slope >= self.threshold
        return self.fitted_slope <= self.threshold

    def verdict_line(self) -> str:
        op = ">=" if self.bound == "lower" else "<="
        word = "PASS" if self.passed else "FAIL"
        return (f"{self.case}: slope {self.fitted_slope:.2f} expected {op} "
                f"{self.threshold:.2f} (predicted {self.predicted_exponent:.2f}): {word}")


def require_geometric(N_list, minimum: int = 5):
    """Validate a geometric list of at least ``minimum`` positive values."""
    N = np.asarray(list(N_list), dtype=float)
    if N.size < minimum:
        raise ParameterError(f"need at least {minimum} N values, got {N.size}")
    if np.any(N <= 0):
        raise ParameterError("N values must be positive")
    ratios = np.sort(N)[1:] / np.sort(N)[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-9) or ratios[0] <= 1:
        raise ParameterError(f"N values must form an increasing geometric sequence: {list(N_list)}")
