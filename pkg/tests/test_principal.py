import math

import numpy as np
import pytest

from leelab.errors import DomainError
from leelab.fock import ModelParams, enumerate_sector
from leelab.manifold import ManifoldSpec, build_catalog
from leelab.principal import (assemble_phi, bare_mass, bare_mass_sweep, fit_log_divergence,
                              hopping_matrix, k_sum, k_sum_tail, matrix_to_triplets_csv,
                              phi_derivative, phi_operator)

import oracles
from conftest import LAMBDAS, SMALL_INSTANCES, small_params


@pytest.mark.parametrize("label", [lab for lab, _, _ in SMALL_INSTANCES])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_renormalized_equals_cutoff_form(label, n):
    for lam in LAMBDAS:
        p = small_params(label, lam=lam, n=n)
        sec = enumerate_sector(p.catalog, n)
        mu = bare_mass(p).mu
        for E in (p.threshold - 0.3, p.threshold - 2.0, p.threshold):
            ref = oracles.cutoff_phi(lam, p.catalog.f, p.catalog.omega, mu, n, E)
            got = assemble_phi(p, sec, E).matrix
            assert np.max(np.abs(got - ref)) < 1e-12


def test_complex_energy_and_symmetry():
    p = small_params("sphere-generic", lam=1.0, n=1)
    sec = enumerate_sector(p.catalog, 1)
    E = 0.2 + 0.7j
    phi = assemble_phi(p, sec, E).matrix
    phic = assemble_phi(p, sec, E.conjugate()).matrix
    ref = oracles.cutoff_phi(1.0, p.catalog.f, p.catalog.omega, bare_mass(p).mu, 1, E)
    assert np.max(np.abs(phi - ref)) < 1e-12
    np.testing.assert_allclose(phi, phi.T, atol=1e-14)  # complex symmetric
    np.testing.assert_allclose(phic, phi.conj(), atol=1e-14)


def test_real_phi_symmetric(default_params):
    sec = enumerate_sector(default_params.catalog, 1)
    phi = assemble_phi(default_params, sec, 0.3).matrix
    np.testing.assert_allclose(phi, phi.T, atol=1e-14)


def test_sparse_operator_matches_dense():
    p = small_params("torus-generic", lam=2.0, n=2)
    sec = enumerate_sector(p.catalog, 2)
    E = 1.7
    np.testing.assert_allclose(phi_operator(p, sec, E).toarray(), assemble_phi(p, sec, E).matrix, atol=1e-13)
    np.testing.assert_allclose(phi_operator(p, sec, E, derivative=True).toarray(),
                               phi_derivative(p, sec, E), atol=1e-13)


def test_derivative_central_difference():
    p = small_params("torus-axis", lam=1.0, n=2)
    sec = enumerate_sector(p.catalog, 2)
    E, h = 1.9, 1e-5
    fd = (assemble_phi(p, sec, E + h).matrix - assemble_phi(p, sec, E - h).matrix) / (2 * h)
    np.testing.assert_allclose(phi_derivative(p, sec, E), fd, atol=1e-8)


def test_derivative_negative_definite():
    p = small_params("sphere-generic", lam=2.0, n=1)
    sec = enumerate_sector(p.catalog, 1)
    assert np.max(np.linalg.eigvalsh(phi_derivative(p, sec, 1.0))) < -1.0 + 1e-12


def test_domain_rejects_above_threshold(torus7):
    p = ModelParams(1.0, 0.5, 1.0, 1, torus7)
    sec = enumerate_sector(torus7, 1)
    with pytest.raises(DomainError):
        assemble_phi(p, sec, 1.6)
    with pytest.raises(DomainError):
        assemble_phi(p, sec, 1.6 + 1j)
    assemble_phi(p, sec, 1.5)  # the threshold itself is allowed


def test_sector_mismatch(torus7):
    p = ModelParams(1.0, 0.5, 1.0, 2, torus7)
    with pytest.raises(DomainError):
        assemble_phi(p, enumerate_sector(torus7, 1), 0.0)


def test_lambda_zero_is_free(torus7):
    p = ModelParams(1.0, 0.5, 0.0, 2, torus7)
    sec = enumerate_sector(torus7, 2)
    phi = assemble_phi(p, sec, 0.1).matrix
    np.testing.assert_allclose(phi, np.diag(sec.h0 - 0.1 + 0.5), atol=0)
    assert bare_mass(p).mu == 0.5


def test_single_zero_mode_bare_mass():
    cat = build_catalog(ManifoldSpec("torus"), 0.0, 1.0)
    p = ModelParams(1.0, 0.5, 1.0, 0, cat)
    V = 4 * math.pi**2
    assert bare_mass(p).mu == pytest.approx(0.5 + 1 / (2 * V * 0.5))


def test_bare_mass_partial_sums(default_params):
    r = bare_mass(default_params)
    assert r.partial_sums[-1] == pytest.approx(r.mu, rel=1e-14)
    assert np.all(np.diff(r.partial_sums) > 0)
    assert r.tail_estimate > 0


def test_log_divergence_fit():
    cut = np.logspace(2, 3, 10)
    res = bare_mass_sweep(ManifoldSpec("torus"), 1.0, 0.5, 1.0, cut)
    a, b, r2 = fit_log_divergence(cut, [r.mu for r in res])
    assert r2 > 0.999
    assert a == pytest.approx(1 / (8 * math.pi), rel=0.05)


def test_fit_exact_line():
    x = np.array([1.0, 10.0, 100.0])
    a, b, r2 = fit_log_divergence(x, 2 * np.log(x) + 1)
    assert (a, b, r2) == pytest.approx((2.0, 1.0, 1.0))


def test_k_sum_scalar_and_array(default_params):
    E = 0.2
    h = np.array([0.0, 1.0, 2.5])
    vals = k_sum(default_params, E, h)
    assert vals.shape == (3,)
    assert k_sum(default_params, E, 1.0) == pytest.approx(vals[1])
    assert np.all(np.diff(vals) < 0)


def test_k_sum_tail_tracks_larger_cutoff():
    spec = ManifoldSpec("torus")
    small = build_catalog(spec, 50.0, 1.0, prune_uncoupled=True)
    big = build_catalog(spec, 2000.0, 1.0, prune_uncoupled=True, mode_ceiling=10_000)
    p = ModelParams(1.0, 0.5, 1.0, 1, small)
    E, h = 0.5, 1.0
    gap = k_sum(p, E, h, catalog=big) - k_sum(p, E, h)
    est = k_sum_tail(p, E, h) - k_sum_tail(p, E, h, cutoff=2000.0)
    assert est == pytest.approx(gap, rel=0.1)


def test_hopping_matrix_positive_entries():
    p = small_params("torus-axis", lam=1.0, n=1)
    U = hopping_matrix(p, enumerate_sector(p.catalog, 1), 0.0)
    # constant and cosine modes have f > 0 at the origin, so U is entrywise positive
    assert np.all(U > 0)


def test_triplets_csv():
    text = matrix_to_triplets_csv(np.array([[1.0, 0.0], [0.0, 2.0]]))
    assert text.splitlines()[0] == "row,col,value"
    assert len(text.splitlines()) == 3
