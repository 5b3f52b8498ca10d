import math

import numpy as np
import pytest

from trajenergy.model import JointLimits, LinkSpec, RobotModel

Z = (0.0, 0.0, 1.0)
Y = (0.0, 1.0, 0.0)


def planar_arm(lengths, masses=None, coms=None, inertias=None, gravity=(0.0, 0.0, 0.0)):
    n = len(lengths)
    masses = masses or [1.0] * n
    coms = coms or [l / 2 for l in lengths]
    inertias = inertias or [0.0] * n
    links = [LinkSpec(l, m, c, i, Z) for l, m, c, i in zip(lengths, masses, coms, inertias)]
    limits = [JointLimits(-math.pi, math.pi, 2.0, 5.0)] * n
    return RobotModel(tuple(links), tuple(limits), gravity)


@pytest.fixture
def two_link():
    """Unit-length planar arm in the xy plane, no gravity."""
    return planar_arm([1.0, 1.0])


@pytest.fixture
def pendulum():
    """Single link along x swinging about y under -z gravity: maximal moment at q = 0."""
    link = LinkSpec(1.0, 1.0, 1.0, 0.0, Y)
    return RobotModel((link,), (JointLimits(-math.pi, math.pi, 2.0, 5.0),), (0.0, 0.0, -9.81))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


CRITERIA = {
    "1": "spline exactness",
    "2": "dynamics oracle",
    "3": "jacobian vs finite differences",
    "4": "quadrature order",
    "5": "velocity-scaling law",
    "6": "repulsive field",
    "7": "avoidance efficacy",
    "8": "figure shape properties",
    "9": "determinism and I/O",
}
_acceptance = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = name.split("_")[2]
    if report.when == "call" or report.outcome != "passed":
        _acceptance[number] = _acceptance.get(number, "passed") if report.passed else "failed"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance, key=int):
        status = "PASS" if _acceptance[number] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {CRITERIA.get(number, '')}")
