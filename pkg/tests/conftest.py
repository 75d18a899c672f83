import mpmath
import pytest


@pytest.fixture(scope="session")
def mp_diff():
    """High-precision backward difference of x^(2-alpha) (zero for x < 0)."""
    mpmath.mp.dps = 60

    def diff(alpha, order, k):
        p = 2 - mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        for j in range(order + 1):
            x = k + 1 - j
            if x > 0:
                total += (-1) ** j * mpmath.binomial(order, j) * mpmath.mpf(x) ** p
        return total

    return diff


_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """``criterion(cid, ok, detail)`` records a pass/fail line and asserts ``ok``."""

    def check(cid: str, ok: bool, detail: str) -> None:
        line = f"{cid:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_RESULTS].append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
