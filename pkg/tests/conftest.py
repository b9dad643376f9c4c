import time

import numpy as np
import pytest

from randers_qsl import oracle, qsl
from randers_qsl.hamiltonians import ControlProblem


def random_hermitian(rng, n, traceless=True, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    if traceless:
        h -= np.trace(h) / n * np.eye(n)
    return scale * h


def random_su(rng, n, scale=1.0):
    """exp(-i H) for a random traceless Hermitian H."""
    h = random_hermitian(rng, n, scale=scale)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def random_problem(rng, n, ratio_range=(1.2, 6.0)):
    h0 = random_hermitian(rng, n)
    h = np.real(np.trace(h0 @ h0))
    return ControlProblem(h0, h * rng.uniform(*ratio_range))


def random_control(rng, p):
    """Traceless Hermitian control saturating the budget of ``p``."""
    hc = random_hermitian(rng, p.dim)
    return hc * np.sqrt(p.budget / np.real(np.trace(hc @ hc)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def single_spin():
    return qsl.preset("single-spin", {"B_x": 0.0, "B_y": 0.3, "D": 1.0})


@pytest.fixture(scope="session")
def swap_chain():
    return qsl.preset("swap-chain", {"lambda_x": 1.0, "lambda_y": 1.0, "lambda_z": 1.0, "alpha": 1 / 24})


def _timed_search(p, o):
    start = time.perf_counter()
    rep = oracle.brute_force_min_time(p, o)
    return rep, time.perf_counter() - start


@pytest.fixture(scope="session")
def swap_search_timed(swap_chain):
    """The default brute-force search on the swap-chain preset and its wall time (slow; shared)."""
    p, g = swap_chain
    return _timed_search(p, g.o)


@pytest.fixture(scope="session")
def swap_search(swap_search_timed):
    return swap_search_timed[0]


@pytest.fixture(scope="session")
def single_spin_search_timed(single_spin):
    p, g = single_spin
    return _timed_search(p, g.o)


@pytest.fixture(scope="session")
def single_spin_search(single_spin_search_timed):
    return single_spin_search_timed[0]


# acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "passed": [], "failed": []})
    entry["passed" if rep.passed else "failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "FAIL" if e["failed"] else "PASS"
        line = f"criterion {n}: {status}  {e['title']}"
        if e["failed"]:
            line += f"  (failed: {', '.join(e['failed'])})"
        terminalreporter.write_line(line)
