import math

import numpy as np
import pytest

from leelab.errors import DomainError
from leelab.fock import ModelParams, enumerate_sector
from leelab.hamiltonian import (assemble_h, block_resolvent, conjugation_residual, decay_check,
                                decay_probes, decay_to_csv, direct_inverse, log_log_slope,
                                lowering_inequality, pseudo_resolvent_residual, random_energy_pairs,
                                residuals_to_csv)
from leelab.manifold import ManifoldSpec, build_catalog
from leelab.principal import assemble_phi, bare_mass
from leelab.spectral import ground_energy

import oracles
from conftest import small_params


def test_matches_tuple_oracle():
    p = small_params("sphere-generic", lam=1.3, n=2)
    H = assemble_h(p)
    ref, nu = oracles.block_hamiltonian(1.3, p.catalog.f, p.catalog.omega, bare_mass(p).mu, 2)
    assert nu == H.upper.dim
    np.testing.assert_allclose(H.matrix, ref, atol=1e-15)
    np.testing.assert_array_equal(H.matrix, H.matrix.T)


def test_lambda_zero_spectrum():
    p = small_params("torus-axis", lam=0.0, n=1)
    H = assemble_h(p)
    w = np.linalg.eigvalsh(H.matrix)
    ref = np.sort(np.concatenate([H.upper.h0, H.lower.h0 + 0.5]))
    np.testing.assert_allclose(w, ref, atol=1e-14)


def test_single_zero_mode_two_by_two():
    cat = build_catalog(ManifoldSpec("torus"), 0.0, 1.0)
    p = ModelParams(1.0, 0.5, 0.8, 0, cat)
    V = 4 * math.pi**2
    g = 0.8 / math.sqrt(2 * V)
    mu = bare_mass(p).mu
    np.testing.assert_allclose(assemble_h(p).matrix, [[1.0, g], [g, mu]], atol=1e-15)


def test_ground_matches_principal_root():
    p = small_params("torus-axis", lam=1.0, n=1)
    e0, _ = assemble_h(p).ground()
    assert ground_energy(p, enumerate_sector(p.catalog, 1)).E_gr == pytest.approx(e0, abs=1e-9)


def test_schur_complement_is_phi():
    p = small_params("torus-generic", lam=2.0, n=1)
    H = assemble_h(p)
    R = block_resolvent(H, -0.7)
    phi = assemble_phi(p, H.lower, -0.7).matrix
    np.testing.assert_allclose(R.delta @ phi, np.eye(H.lower.dim), atol=1e-12)


@pytest.mark.parametrize("label", ["torus-generic", "sphere-generic"])
def test_block_formula_equals_direct_inverse(label):
    p = small_params(label, lam=1.0, n=1)
    H = assemble_h(p)
    for E in (p.mu_p - 1.0, -3.0, 0.4 + 0.9j):
        R = block_resolvent(H, E)
        assert np.max(np.abs(R.matrix - direct_inverse(H, E))) < 1e-10
        x = np.arange(H.dim, dtype=float)
        np.testing.assert_allclose(R.apply(x), R.matrix @ x, atol=1e-12)


def test_lambda_zero_blocks_are_free():
    p = small_params("torus-axis", lam=0.0, n=1)
    H = assemble_h(p)
    R = block_resolvent(H, -1.0)
    np.testing.assert_allclose(R.alpha, np.diag(1 / (H.upper.h0 + 1.0)), atol=1e-15)
    np.testing.assert_allclose(R.delta, np.diag(1 / (H.lower.h0 + 0.5 + 1.0)), atol=1e-15)
    assert np.all(R.beta == 0) and np.all(R.gamma == 0)


def test_delta_pole_order():
    p = small_params("torus-axis", lam=1.0, n=1)
    H = assemble_h(p)
    e0, _ = H.ground()
    d = np.logspace(-6, -3, 8)
    norms = [np.linalg.norm(block_resolvent(H, e0 - x).delta, 2) for x in d]
    assert -log_log_slope(d, norms) == pytest.approx(1.0, abs=0.05)


def test_pseudo_resolvent_identity():
    p = small_params("sphere-generic", lam=2.0, n=1)
    H = assemble_h(p)
    assert pseudo_resolvent_residual(H, -1.0, -1.0) == 0.0
    assert pseudo_resolvent_residual(H, -1.0, -2.0) < 1e-10
    assert pseudo_resolvent_residual(H, -1 + 1j, -1 - 1j) < 1e-10
    assert conjugation_residual(H, -1 + 1j) < 1e-10
    real, cplx = random_energy_pairs(H, count=5, seed=3)
    assert len(real) == len(cplx) == 5
    for a, b in real + cplx:
        assert pseudo_resolvent_residual(H, a, b) < 1e-10
    text = residuals_to_csv([(a, b, 0.0) for a, b in real])
    assert len(text.splitlines()) == 6


def test_random_pairs_deterministic():
    H = assemble_h(small_params("torus-axis", n=1))
    assert random_energy_pairs(H, seed=1) == random_energy_pairs(H, seed=1)


def test_decay_lambda_zero_closed_form():
    p = small_params("torus-axis", lam=0.0, n=1)
    H = assemble_h(p)
    grid = np.logspace(1, 4, 4)
    res = decay_check(H, grid, probes=np.eye(H.dim))
    shifted = np.concatenate([H.upper.h0, H.lower.h0 + 0.5])
    expect = shifted[None, :] / (shifted[None, :] + grid[:, None])
    np.testing.assert_allclose(res.norms, expect, rtol=1e-12)


def test_decay_slopes_default_probes():
    p = small_params("sphere-generic", lam=1.0, n=1)
    H = assemble_h(p)
    grid = np.logspace(2, 6, 9)
    res = decay_check(H, grid, workers=2)
    assert res.norms.shape == (9, H.dim + 10)
    lo, hi = res.slope_range
    assert -1.2 <= lo and hi <= -0.8
    assert res.norms[-1].max() < 1e-4
    assert np.nanmax(res.beta_slopes) <= -0.5
    assert decay_to_csv(res).startswith("lambda_k,probe_id")


def test_decay_grid_validation():
    H = assemble_h(small_params("torus-axis", n=1))
    with pytest.raises(DomainError):
        decay_check(H, [10.0, 1.0])


def test_probes_are_unit_vectors():
    P = decay_probes(7)
    np.testing.assert_allclose(np.linalg.norm(P, axis=0), 1.0)
    np.testing.assert_array_equal(decay_probes(7), P)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lowering_inequality(n):
    chk = lowering_inequality(small_params("sphere-generic", n=n))
    assert chk.holds
    assert chk.empirical_constant == pytest.approx(math.sqrt(n), rel=1e-10)
    assert chk.empirical_constant <= chk.stated_factor
