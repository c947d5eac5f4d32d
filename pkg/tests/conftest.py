import numpy as np
import pytest
from hypothesis import settings

from firetke.ingest import SONIC_HEADER, THERMO_HEADER

settings.register_profile("firetke", deadline=None, max_examples=60)
settings.load_profile("firetke")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def _cell(c):
    # numpy scalars repr as "np.float64(...)" under NumPy 2
    return repr(float(c)) if isinstance(c, (float, np.floating)) else str(c)


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(_cell(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def sensor_pair(tmp_path):
    """Write a small sonic/thermo pair: 30 pre, 40 burn, 10 post rows at 10 Hz.

    Pre-burn wind is the constant (1, 2, 3); burn rows add (1, 2, 2) so
    every burn TKE is 4.5.
    """

    def make(n_pre=30, n_burn=40, n_post=10, burn_pert=(1.0, 2.0, 2.0)):
        n = n_pre + n_burn + n_post
        t = np.round(np.arange(n) * 0.1, 1)
        wind = np.tile([1.0, 2.0, 3.0], (n, 1))
        wind[n_pre:n_pre + n_burn] += burn_pert
        rng = np.random.default_rng(5)
        temps = 20 + rng.random((n, 7)) * 5
        sonic_T = 22 + rng.random(n)
        sonic = write_csv(tmp_path / "sonic.csv", SONIC_HEADER,
                          [(t[i], *wind[i], sonic_T[i]) for i in range(n)])
        thermo = write_csv(tmp_path / "thermo.csv", THERMO_HEADER,
                           [(t[i], *temps[i]) for i in range(n)])
        return sonic, thermo, float(t[n_pre]), float(t[n_pre + n_burn - 1])

    return make
