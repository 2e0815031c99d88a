import functools
import json

import pytest

from toricmds.classify import analyze
from toricmds.cli import bundled_path, load_datafile
from toricmds.lattice import LatticePolytope, is_smooth


@functools.lru_cache(maxsize=None)
def records(name):
    return tuple(load_datafile(bundled_path(name)))


@functools.lru_cache(maxsize=None)
def polytope(record_id):
    for name in ("dim3.polytopes", "examples.polytopes", "appendix_a.polytopes"):
        for rec in records(name):
            if rec.id == record_id:
                return rec.polytope()
    raise KeyError(record_id)


@functools.lru_cache(maxsize=None)
def data(record_id):
    return analyze(polytope(record_id))


def smooth_ids():
    out = []
    for name in ("dim3.polytopes", "examples.polytopes", "appendix_a.polytopes"):
        for rec in records(name):
            if rec.id not in out and is_smooth(rec.polytope()):
                out.append(rec.id)
    return out


def table1():
    return json.loads(bundled_path("table1.json").read_text())["table"]


def appendix():
    return json.loads(bundled_path("appendix_a.json").read_text())["records"]


def simplex(n):
    verts = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    verts.append(tuple([-1] * n))
    return LatticePolytope(verts)


def cube_fan(n):
    """Polytope of (P^1)^n."""
    verts = []
    for j in range(n):
        e = tuple(int(i == j) for i in range(n))
        verts += [e, tuple(-x for x in e)]
    return LatticePolytope(verts)


@pytest.fixture(scope="session")
def index35():
    return data("grdb:35")


# basis (D4, D3, D2) used in the worked example for index 35
REFERENCE_BASIS_35 = ((0, 0, 0, 1, 0, 0, 1), (1, 0, 1, 0, 1, 1, 2), (1, 1, 0, 0, 1, 0, 2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
