import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from peakon_lab.measures import DiscreteMeasure

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def atoms(max_atoms=6, lo=-5.0, hi=5.0, signed=True):
    """Strategy for small discrete measures with well-separated atoms."""
    pos = st.lists(st.floats(lo, hi, allow_nan=False), min_size=1, max_size=max_atoms,
                   unique_by=lambda v: round(v, 3))
    w = st.floats(-2.0, 2.0) if signed else st.floats(0.05, 2.0)

    @st.composite
    def build(draw):
        xs = draw(pos)
        ws = draw(st.lists(w.filter(lambda v: abs(v) > 1e-3), min_size=len(xs), max_size=len(xs)))
        return DiscreteMeasure.from_atoms(np.array(xs), np.array(ws))

    return build()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
