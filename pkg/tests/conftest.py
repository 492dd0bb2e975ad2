import contextlib

import numpy as np
import pytest

from balldiv.core import KIND_NAMES, DistanceSpec, PooledSample


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=KIND_NAMES)
def spec(request):
    return DistanceSpec.from_name(request.param)


def random_pooled(rng, n, m, d, duplicates=False):
    x = rng.standard_normal((n, d))
    y = rng.standard_normal((m, d)) + 0.3
    if duplicates:
        pool = np.vstack([x, y])
        k = rng.integers(1, max(2, (n + m) // 2))
        src = rng.integers(0, n + m, size=k)
        dst = rng.integers(0, n + m, size=k)
        pool[dst] = pool[src]
        x, y = pool[:n], pool[n:]
    return PooledSample(x, y)


class CriterionLog:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, lines):
        self.lines = lines
        self.notes = []

    def note(self, text):
        self.notes.append(text)

    @contextlib.contextmanager
    def check(self, number, title):
        self.notes = []
        try:
            yield self
        except BaseException as exc:
            self._emit("FAIL", number, title, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            raise
        self._emit("PASS", number, title, "")

    def _emit(self, status, number, title, error):
        detail = "; ".join(self.notes + ([error] if error else []))
        line = f"[{status}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        self.lines.append((number, line))
        print(line)


_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    return CriterionLog(request.config.stash[_CRITERIA])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda t: t[0]):
            terminalreporter.write_line(line)
