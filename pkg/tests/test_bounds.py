import math

import numpy as np
import pytest

from leelab.bounds import (bound_report, compact_lower, crude_inequality_holds, default_heat_constant,
                           default_lower_bound, invertibility_threshold, relative_potential,
                           relative_potential_norm, variational_upper)
from leelab.errors import DomainError
from leelab.fock import ModelParams, enumerate_sector
from leelab.manifold import ManifoldSpec, build_catalog
from leelab.spectral import ground_energy, phi_eigenpairs

from conftest import LAMBDAS, SMALL_INSTANCES, small_params


def test_compact_lower_examples(torus7):
    p = ModelParams(1.0, 0.5, 0.1, 2, torus7)
    assert compact_lower(p, 0.1) == pytest.approx(1 - 0.02 * (1 / (8 * math.pi**2) + 0.1), rel=1e-14)
    assert compact_lower(ModelParams(1.0, 0.5, 0.0, 3, torus7), 0.4) == 2.0
    assert invertibility_threshold(p, 0.1) == compact_lower(p, 0.1)


def test_variational_closed_forms(default_params):
    res = variational_upper(default_params)
    V = 4 * math.pi**2
    assert res.printed_closed_form == pytest.approx(-1 / (V * 1.5), rel=1e-12)
    assert res.printed_closed_form == pytest.approx(-0.016887, abs=1e-6)
    # the one-term expectation: denominator (m - mu_p) with the 1/(2 omega_0) factor
    assert res.recomputed_closed_form == pytest.approx(-1 / V, rel=1e-12)
    assert res.matrix_element == pytest.approx(res.recomputed_closed_form, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_variational_matches_recomputed_for_all_n(n):
    p = small_params("torus-generic", lam=0.7, n=n)
    res = variational_upper(p)
    assert res.matrix_element == pytest.approx(res.recomputed_closed_form, rel=1e-12)


def test_variational_needs_constant_mode_and_bosons(torus7):
    with pytest.raises(DomainError):
        variational_upper(ModelParams(1.0, 0.5, 1.0, 0, torus7))


def test_variational_lambda_zero(torus7):
    res = variational_upper(ModelParams(1.0, 0.5, 0.0, 1, torus7))
    assert res.matrix_element == 0 and res.printed_closed_form == 0


@pytest.mark.parametrize("label", [lab for lab, _, _ in SMALL_INSTANCES])
def test_sandwich_and_variational_principle(label):
    for n in (1, 2):
        for lam in LAMBDAS:
            p = small_params(label, lam=lam, n=n)
            sec = enumerate_sector(p.catalog, n)
            g = ground_energy(p, sec)
            rep = bound_report(p, g.E_gr, sector=sec)
            assert rep.sandwich_ok and rep.variational_negative
            w_thr = phi_eigenpairs(p, sec, p.threshold, k=1)[0][0]
            assert rep.variational_value >= w_thr - 1e-10


def test_default_heat_constant_cached():
    spec = ManifoldSpec("torus")
    assert default_heat_constant(spec) == default_heat_constant(ManifoldSpec("torus"))
    assert default_heat_constant(spec) == pytest.approx(1 / (4 * math.pi), rel=1e-3)


def test_relative_potential_small_below_e_star():
    p = small_params("sphere-generic", lam=2.0, n=2)
    sec = enumerate_sector(p.catalog, 2)
    e_star = default_lower_bound(p)
    for E in e_star - np.array([0.01, 0.5, 3.0]):
        assert relative_potential_norm(p, sec, E) < 1
        assert phi_eigenpairs(p, sec, E)[0][0] > 0
    A = relative_potential(p, sec, e_star - 0.5)
    np.testing.assert_allclose(A, A.T, atol=1e-15)


def test_relative_potential_domain():
    p = small_params("torus-axis", n=1)
    with pytest.raises(DomainError):
        relative_potential(p, enumerate_sector(p.catalog, 1), 5.0)


def test_crude_inequality(default_params):
    assert crude_inequality_holds(default_params, np.logspace(-4, 4, 30))
    with pytest.raises(DomainError):
        crude_inequality_holds(default_params, [0.0])


def test_report_serializable(default_params):
    import json
    rep = bound_report(default_params, 1.0)
    d = rep.to_dict()
    assert d["sandwich_ok"] is True
    json.dumps(d)
