import numpy as np
import pytest

from kotztail.linalg import factorize

_ACCEPTANCE_LINES: list[str] = []


def random_corr(rng: np.random.Generator, k: int, jitter: float = 0.05) -> np.ndarray:
    """Random positive definite correlation matrix (Wishart-like, normalized)."""
    w = rng.standard_normal((k, k + 1))
    s = w @ w.T + jitter * np.eye(k)
    d = np.sqrt(np.diag(s))
    s = s / np.outer(d, d)
    np.fill_diagonal(s, 1.0)
    return 0.5 * (s + s.T)


@pytest.fixture
def rho_spec():
    def make(rho):
        return factorize(np.array([[1.0, rho], [rho, 1.0]]))

    return make


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
