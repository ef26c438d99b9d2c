import pytest

from wavedr import simulation as sim

ACCEPTANCE_SEED = 42
_RESULTS = []


def record(name, passed, detail=""):
    _RESULTS.append((name, bool(passed), detail))


@pytest.fixture(scope="session")
def study():
    """Full simulation study: 3 models x 4 methods, 100 replications of n=500."""
    out = {}
    for s in sim.run_study(n=500, reps=100, master_seed=ACCEPTANCE_SEED):
        out[(s.model, s.method.value)] = s
    return out


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}  {detail}")
