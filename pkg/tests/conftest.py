import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from leelab.fock import ModelParams
from leelab.manifold import ManifoldSpec, build_catalog

# (label, spec, cutoff); every catalog has at most 10 coupled modes
SMALL_INSTANCES = [
    ("torus-axis", ManifoldSpec("torus"), 4.5),
    ("torus-generic", ManifoldSpec("torus", impurity=(0.3, 1.1)), 2.5),
    ("torus-rect", ManifoldSpec("torus", L1=5.0, L2=7.0, impurity=(0.4, 2.0)), 2.0),
    ("sphere-pole", ManifoldSpec("sphere"), 6.5),
    ("sphere-generic", ManifoldSpec("sphere", impurity=(1.0, 0.5)), 6.5),
]

LAMBDAS = (0.25, 0.5, 1.0, 2.0)

_CATALOGS = {}


def small_catalog(label):
    if label not in _CATALOGS:
        spec, cut = {lab: (s, c) for lab, s, c in SMALL_INSTANCES}[label]
        _CATALOGS[label] = build_catalog(spec, cut, 1.0, prune_uncoupled=True)
    return _CATALOGS[label]


def small_params(label, lam=1.0, n=1, mu_p=0.5):
    return ModelParams(1.0, mu_p, lam, n, small_catalog(label))


@pytest.fixture
def torus7():
    return small_catalog("torus-axis")


@pytest.fixture
def sphere9():
    return small_catalog("sphere-generic")


@pytest.fixture
def default_params():
    """Desk-scale default: torus of side 2 pi, cutoff 10, 19 coupled modes."""
    cat = build_catalog(ManifoldSpec("torus"), 10.0, 1.0, prune_uncoupled=True)
    return ModelParams(1.0, 0.5, 1.0, 1, cat)


TWO_PI = 2 * math.pi


# one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
