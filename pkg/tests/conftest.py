import numpy as np
import pytest

from stabfem.cases import constant_velocity, velocity
from stabfem.mesh import build_structured
from stabfem.space import CONTINUOUS, DISCONTINUOUS, build_space

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_space(n=4, continuity=CONTINUOUS, degree=1, perturb=None, diagonal="right"):
    return build_space(build_structured(n, perturb, diagonal), continuity, degree)


ALL_SPACES = [(CONTINUOUS, 1), (CONTINUOUS, 2), (DISCONTINUOUS, 1), (DISCONTINUOUS, 2)]
BETA1 = velocity(1)
BETA_CONST = constant_velocity(1.0, 2.0)
