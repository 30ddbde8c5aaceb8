import numpy as np
import pytest

from sbo.spectral import Grid1D, SpectralField, forward_transform


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(rng, grid: Grid1D, real=False, band=None) -> SpectralField:
    """Random smooth-ish field; ``band`` keeps modes with ``|j| < band``."""
    if real:
        f = forward_transform(rng.standard_normal(grid.n), grid, real=True)
    else:
        f = forward_transform(rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n), grid)
    a = f.amplitudes.copy()
    if band is not None:
        a[np.abs(grid.indices) >= band] = 0.0
    a[grid.nyquist] = 0.0
    return SpectralField(grid, a, real, check=False)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance_report():
    """Record one ``PASS``/``FAIL`` line; the lines are echoed after the run."""
    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"criterion {number:2d} {title}: {'PASS' if passed else 'FAIL'}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
