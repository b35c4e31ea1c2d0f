import numpy as np
import pytest

from balanced_frames import Frame, roots_of_unity_frame

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_balanced(rng, d, K, complex_=False):
    T = rng.standard_normal((d, K))
    if complex_:
        T = T + 1j * rng.standard_normal((d, K))
    return Frame(T - T.mean(axis=1, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def roots3():
    return roots_of_unity_frame(3)


@pytest.fixture
def roots4():
    return roots_of_unity_frame(4)


@pytest.fixture
def e_frame():
    """{e1, e2, e1 + e2} in R^2."""
    return Frame(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))
