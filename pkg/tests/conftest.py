import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Record one acceptance line; call before asserting so failures are listed too."""

    def _record(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_bloch(rng, n, pure=False):
    """Uniform points in the Bloch ball (or on the sphere if ``pure``)."""
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    if not pure:
        x *= rng.uniform(0, 1, size=(n, 1)) ** (1 / 3)
    return x
