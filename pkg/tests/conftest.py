import numpy as np
import pytest

from trajcert.trajectory import LtiModel

ACCEPTANCE: dict = {}


def record(num: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[num] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}  {detail}")


@pytest.fixture
def lyap_system():
    """Unforced second-order system used for Lyapunov learning."""
    return LtiModel([[0.0, 1.0], [-1.0, -3.0]])


@pytest.fixture
def energy_system():
    return LtiModel([[0.0, 1.0], [-4.0, -2.0]], C=[[1.0, 0.0]])


@pytest.fixture
def gain_system():
    return LtiModel([[0.0, 1.0], [-1.0, -2.0]], [[1.0], [2.0]], [[4.0, 1.0]])


def random_stable(rng, n, max_norm=5.0, margin=0.1):
    """Random A with every eigenvalue real part <= -margin and ||A||_2 <= max_norm."""
    while True:
        M = rng.standard_normal((n, n))
        shift = np.max(np.linalg.eigvals(M).real) + margin + rng.uniform(0, 1)
        A = M - shift * np.eye(n)
        nrm = np.linalg.norm(A, 2)
        if nrm > max_norm:
            A *= max_norm / nrm
        if np.max(np.linalg.eigvals(A).real) < -1e-3:
            return A
