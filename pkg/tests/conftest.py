import numpy as np
import pytest

from gradient_weave.trimap import Label, Trimap


def square_trimap(h=24, w=24, lo=6, hi=17, band=2):
    """Foreground square [lo+band, hi-band], Unknown ring out to [lo, hi]."""
    lab = np.zeros((h, w), dtype=np.uint8)
    lab[lo:hi + 1, lo:hi + 1] = Label.UNKNOWN
    lab[lo + band:hi - band + 1, lo + band:hi - band + 1] = Label.FOREGROUND
    return Trimap(lab)


def constant_frame(h, w, value):
    return np.full((h, w, 3), value, dtype=np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from scenes import ACCEPTANCE_LOG

    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
