import time

import pytest

from qoa.algebras import make_bc_system, make_heisenberg, make_virasoro
from qoa.core import Poly

# criterion number -> (title, passed, seconds, note)
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def bc():
    return make_bc_system(2)


@pytest.fixture(scope="session")
def vir26():
    return make_virasoro(26)


@pytest.fixture(scope="session")
def vir_symbolic():
    return make_virasoro(Poly.gen("k"))


@pytest.fixture(scope="session")
def heis251():
    return make_heisenberg((25, 1))


@pytest.fixture
def criterion(request):
    """Record one acceptance line: use as ``with criterion(3, "title"):``."""

    class _Rec:
        def __init__(self):
            self.note = ""

        def __call__(self, number, title):
            self.number, self.title = number, title
            return self

        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            dt = time.perf_counter() - self.t0
            ACCEPTANCE[self.number] = (self.title, exc_type is None, dt, self.note)
            return False

    return _Rec()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, dt, note = ACCEPTANCE[n]
        line = f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title} ({dt:.2f} s)"
        if note:
            line += f" -- {note}"
        terminalreporter.write_line(line)
