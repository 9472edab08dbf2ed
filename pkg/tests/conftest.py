import numpy as np
import pytest

from paulistab import REFERENCE_CONVERTER, REFERENCE_GRID, build_minor_loop, retune_pll_bandwidth
from paulistab.pauli import PauliQuaternion


def rel_err(a, b, scale=None):
    """Largest |a - b| relative to ``scale`` (default: max(|a|, |b|))."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if scale is None:
        scale = np.maximum(np.abs(a), np.abs(b))
    scale = np.where(np.asarray(scale) == 0, 1.0, scale)
    return float(np.max(np.abs(a - b) / scale))


def random_complex(rng, shape, spread=True):
    """Complex samples with magnitudes spread over a few decades."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if spread:
        z *= 10.0 ** rng.uniform(-2, 2, shape)
    return z


def random_quaternions(rng, n):
    return PauliQuaternion(*(random_complex(rng, n) for _ in range(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240610)


@pytest.fixture(scope="session")
def reference_models():
    return build_minor_loop(REFERENCE_CONVERTER, REFERENCE_GRID)


@pytest.fixture(scope="session")
def retuned_models():
    return build_minor_loop(retune_pll_bandwidth(REFERENCE_CONVERTER, 20.0), REFERENCE_GRID)


# -- acceptance summary --------------------------------------------------------

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _ACCEPTANCE.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, outcome, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {status}  {detail}")
