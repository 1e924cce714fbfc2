import numpy as np
import pytest

from regenmc import zoo


@pytest.fixture(scope="session")
def two_state():
    return zoo.two_state_example(0.5)


@pytest.fixture(scope="session")
def imh():
    return zoo.independence_mh()


@pytest.fixture(scope="session")
def drift_bd():
    return zoo.drift_chain()


@pytest.fixture(scope="session")
def all_models(two_state, imh, drift_bd):
    return [two_state, imh, drift_bd]


@pytest.fixture()
def three_state_file(tmp_path):
    """A small non-Doeblin kernel file with a two-state small set."""
    path = tmp_path / "k3.txt"
    path.write_text(
        "# three-state test kernel\n"
        "3\n"
        "0.6 0.4 0.0\n"
        "0.2 0.5 0.3\n"
        "0.1 0.3 0.6\n"
        "J: 0 1\n"
        "beta: 0.25\n"
        "nu: 0.5 0.5 0.0\n"
    )
    return path


def assert_close(actual, expected, *, rtol=0.0, atol=0.0, label=""):
    actual = float(actual)
    expected = float(expected)
    tol = atol + rtol * abs(expected)
    assert abs(actual - expected) <= tol, (
        f"{label or 'value'}: {actual!r} differs from {expected!r} "
        f"by {abs(actual - expected):.3e} (tolerance {tol:.3e})"
    )
