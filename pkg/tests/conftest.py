import numpy as np
import pytest

from grasp_energy.contact_solver import ActuationCommand
from grasp_energy.energy_map import build_energy_map
from grasp_energy.kinematics import GrasperDesign, ObjectSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mid_design():
    return GrasperDesign(l1=2.0, l2=1.6, r1=0.2, r2=0.14, w=1.2)


@pytest.fixture(scope="session")
def mid_object():
    return ObjectSpec(r=0.4, mu_s=0.4)


@pytest.fixture(scope="session")
def mid_map(mid_design, mid_object):
    return build_energy_map(mid_design, mid_object, ActuationCommand(), dx=0.2)


def random_design(rng, **fixed):
    """A design from the standard parameter grid with r1 != r2."""
    while True:
        d = dict(l1=rng.choice([1.2, 1.4, 1.6, 1.8, 2.0]), l2=rng.choice([0.8, 1.0, 1.2, 1.4, 1.6]),
                 r1=rng.choice([0.08, 0.12, 0.16, 0.2]), r2=rng.choice([0.06, 0.1, 0.14, 0.18]),
                 w=rng.choice([0.0, 0.4, 0.8, 1.2, 1.6, 2.0]))
        d.update(fixed)
        if d["r1"] != d["r2"]:
            return GrasperDesign(**{k: float(v) for k, v in d.items()})


# acceptance verdicts, printed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
