import numpy as np
import pytest

# criterion -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def verdict():
    def record(name, ok, detail=""):
        ACCEPTANCE[name] = (bool(ok), detail)
        print(f"{name} {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s[1:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
