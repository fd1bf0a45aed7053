import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leelab.errors import CeilingError, DomainError
from leelab.manifold import (ManifoldSpec, build_catalog, catalog_to_csv, heat_kernel_bound_constant,
                             heat_kernel_diag, heat_kernel_diag_images, heat_kernel_from_catalog,
                             mode_count)

import oracles


def test_volume():
    assert ManifoldSpec("torus", L1=2.0, L2=3.0).volume == pytest.approx(6.0)
    assert ManifoldSpec("sphere", radius=2.0).volume == pytest.approx(16 * math.pi)


def test_bad_specs():
    with pytest.raises(DomainError):
        ManifoldSpec("klein")
    with pytest.raises(DomainError):
        ManifoldSpec("torus", L1=-1.0)
    with pytest.raises(DomainError):
        ManifoldSpec("sphere", impurity=(4.0, 0.0))


def test_torus_impurity_reduced():
    spec = ManifoldSpec("torus", L1=2.0, L2=2.0, impurity=(5.0, -0.5))
    assert spec.impurity == pytest.approx((1.0, 1.5))


@pytest.mark.parametrize("L1,L2,cut", [(2 * math.pi, 2 * math.pi, 10.0), (5.0, 7.0, 6.0), (1.0, 3.0, 300.0)])
def test_torus_levels_match_lattice_scan(L1, L2, cut):
    spec = ManifoldSpec("torus", L1=L1, L2=L2, impurity=(0.1, 0.2))
    cat = build_catalog(spec, cut, 1.0)
    ref = oracles.torus_levels(L1, L2, cut)
    assert len(cat) == len(ref) == mode_count(spec, cut)
    np.testing.assert_allclose(cat.sigma, ref, atol=1e-12)


@pytest.mark.parametrize("r,cut", [(1.0, 12.0), (2.5, 3.0)])
def test_sphere_levels(r, cut):
    spec = ManifoldSpec("sphere", radius=r, impurity=(0.7, 1.3))
    cat = build_catalog(spec, cut, 1.0)
    ref = oracles.sphere_levels(r, cut)
    assert len(cat) == len(ref) == mode_count(spec, cut)
    np.testing.assert_allclose(cat.sigma, ref, atol=1e-12)


def test_zero_cutoff_torus_has_constant_mode_only():
    cat = build_catalog(ManifoldSpec("torus"), 0.0, 1.0)
    assert len(cat) == 1
    assert cat.f[0] == pytest.approx(1 / (2 * math.pi))
    assert cat.omega[0] == 1.0


@settings(max_examples=40, deadline=None)
@given(x1=st.floats(0, 10), x2=st.floats(0, 10))
def test_torus_level_sum_rule(x1, x2):
    # cos^2 + sin^2 = 1 per +-k pair, so each level carries multiplicity / V
    spec = ManifoldSpec("torus", L1=3.0, L2=4.0, impurity=(x1, x2))
    cat = build_catalog(spec, 30.0, 1.0)
    for s in np.unique(cat.sigma):
        sel = cat.sigma == s
        assert np.sum(cat.f[sel] ** 2) == pytest.approx(sel.sum() / spec.volume, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(0, math.pi), phi=st.floats(0, 2 * math.pi))
def test_sphere_addition_theorem(theta, phi):
    spec = ManifoldSpec("sphere", radius=1.3, impurity=(theta, phi))
    cat = build_catalog(spec, 30.0, 1.0)
    for s in np.unique(cat.sigma):
        sel = cat.sigma == s
        assert np.sum(cat.f[sel] ** 2) == pytest.approx(sel.sum() / spec.volume, rel=1e-10)


def test_pruning_drops_only_vanishing_modes():
    spec = ManifoldSpec("sphere")  # impurity at the pole: only m = 0 couples
    full = build_catalog(spec, 12.0, 1.0)
    pruned = build_catalog(spec, 12.0, 1.0, prune_uncoupled=True)
    assert len(pruned) == 4
    assert np.all(np.abs(pruned.f) > 0)
    assert np.sum(full.f**2) == pytest.approx(np.sum(pruned.f**2), rel=1e-12)


def test_ceiling():
    with pytest.raises(CeilingError):
        build_catalog(ManifoldSpec("torus"), 1e4, 1.0, mode_ceiling=100)


def test_catalog_immutable(torus7):
    with pytest.raises(ValueError):
        torus7.f[0] = 1.0


def test_heat_kernel_images_vs_spectral():
    spec = ManifoldSpec("torus", L1=3.0, L2=5.0)
    for t in np.logspace(-2, 1, 13):
        a = heat_kernel_diag(spec, t)
        b = heat_kernel_diag_images(spec, t)
        c = oracles.torus_heat_images(3.0, 5.0, t)
        assert a == pytest.approx(b, rel=1e-10)
        assert b == pytest.approx(c, rel=1e-10)


def test_images_torus_only():
    with pytest.raises(DomainError):
        heat_kernel_diag_images(ManifoldSpec("sphere"), 1.0)


@pytest.mark.parametrize("spec", [ManifoldSpec("torus"), ManifoldSpec("sphere", radius=2.0)])
def test_short_time_and_long_time(spec):
    assert 4 * math.pi * 1e-4 * heat_kernel_diag(spec, 1e-4) == pytest.approx(1.0, abs=1e-2)
    assert heat_kernel_diag(spec, 200.0) == pytest.approx(1 / spec.volume, rel=1e-6)


def test_catalog_heat_kernel_converges():
    spec = ManifoldSpec("sphere", impurity=(0.4, 0.1))
    cat = build_catalog(spec, 400.0, 1.0)
    assert heat_kernel_from_catalog(cat, 0.5) == pytest.approx(heat_kernel_diag(spec, 0.5), rel=1e-12)


def test_bound_constant_near_short_time_value():
    for spec in (ManifoldSpec("torus"), ManifoldSpec("sphere")):
        C = heat_kernel_bound_constant(spec, np.logspace(-4, 1, 50))
        assert C == pytest.approx(1 / (4 * math.pi), rel=1e-3)


def test_catalog_csv(torus7):
    text = catalog_to_csv(torus7)
    assert text.splitlines()[0].startswith("index")
    assert len(text.splitlines()) == len(torus7) + 1
