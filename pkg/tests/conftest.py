from fractions import Fraction

import pytest

from sl3cert.cli import PipelineConfig, solve_to_certificate
from sl3cert.gram import assemble, build_product_table
from sl3cert.group_ring import target
from sl3cert.matrix_group import ball, standard_generators

DEFAULT_EPS = Fraction(561, 2000)


@pytest.fixture(scope="session")
def gens():
    return standard_generators()


@pytest.fixture(scope="session")
def ball1(gens):
    return ball(gens, 1)


@pytest.fixture(scope="session")
def ball2(gens):
    return ball(gens, 2)


@pytest.fixture(scope="session")
def ball3(gens):
    return ball(gens, 3)


@pytest.fixture(scope="session")
def ball4(gens):
    return ball(gens, 4)


@pytest.fixture(scope="session")
def table1(ball1):
    return build_product_table(ball1)


@pytest.fixture(scope="session")
def table2(ball2, ball4):
    return build_product_table(ball2, ball4)


@pytest.fixture(scope="session")
def main_system(table2, gens):
    return assemble(table2, target(DEFAULT_EPS, gens))


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """The default pipeline (radius 2, eps 561/2000, D 10^6), run once per session."""
    import time

    path = tmp_path_factory.mktemp("pipeline") / "certificate.txt"
    start = time.perf_counter()
    report, cert, eps = solve_to_certificate(PipelineConfig(out=path))
    elapsed = time.perf_counter() - start
    cert.save(path)
    return {"report": report, "cert": cert, "path": path, "elapsed": elapsed}


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line, print it, then assert the condition."""

    def check(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
