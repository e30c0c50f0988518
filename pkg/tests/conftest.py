import time
from collections import OrderedDict
from types import SimpleNamespace

import numpy as np
import pytest

from wwlab import decompose
from wwlab.instances import make_circle, make_sphere_mesh, make_sr_sphere, make_torus2


def _timed(make):
    t0 = time.perf_counter()
    inst = make()
    t1 = time.perf_counter()
    dec = decompose(inst.operator)
    t2 = time.perf_counter()
    return SimpleNamespace(inst=inst, space=inst.space, op=inst.operator, dec=dec,
                           build_seconds=t1 - t0, eig_seconds=t2 - t1)


@pytest.fixture(scope="session")
def circle():
    return _timed(lambda: make_circle(2048))


@pytest.fixture(scope="session")
def torus():
    return _timed(lambda: make_torus2(64, 64))


@pytest.fixture(scope="session")
def sr_sphere():
    return _timed(lambda: make_sr_sphere(4050))


@pytest.fixture(scope="session")
def sphere_mesh():
    return _timed(lambda: make_sphere_mesh(2000, seed=0))


@pytest.fixture(scope="session")
def small_circle():
    inst = make_circle(64)
    return SimpleNamespace(inst=inst, space=inst.space, op=inst.operator, dec=decompose(inst.operator))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---- acceptance summary: one line per numbered criterion

_ACCEPT = OrderedDict()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        if not name.startswith("test_c"):
            return
        crit = int(name[len("test_c"):].split("_")[0])
        _ACCEPT.setdefault(crit, []).append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPT:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPT):
        parts = _ACCEPT[crit]
        bad = [n for n, o in parts if o != "passed"]
        status = "PASS" if not bad else "FAIL"
        tail = f"{len(parts) - len(bad)}/{len(parts)} sub-checks"
        if bad:
            tail += "; failing: " + ", ".join(bad)
        tr.write_line(f"criterion {crit}: {status} ({tail})")
