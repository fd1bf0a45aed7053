"""Analytic upper and lower bounds on the compact-surface ground state.

Upper: the trial state with all ``n`` bosons in the constant mode gives a
negative expectation of ``Phi`` at the threshold ``n m + mu_p``, so the root
of the decreasing ``omega_0`` lies below it.

Lower: below ``E_* = (n-1) m - n lam^2 (1/(2 m^2 V) + C)`` the relative
potential has norm below one and ``Phi`` is invertible, with ``C`` the
heat-kernel constant in ``K_t(x, x) <= 1/V + C/t``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .fock import ModelParams, SectorBasis, enumerate_sector
from .manifold import ManifoldSpec, heat_kernel_bound_constant
from .principal import assemble_phi, hopping_matrix

__all__ = [
    "BoundReport",
    "VariationalResult",
    "HEAT_FIT_GRID",
    "default_heat_constant",
    "default_lower_bound",
    "variational_upper",
    "compact_lower",
    "invertibility_threshold",
    "relative_potential",
    "relative_potential_norm",
    "crude_inequality_holds",
    "bound_report",
]

HEAT_FIT_GRID = np.logspace(-4, 1, 200)


@lru_cache(maxsize=64)
def _heat_constant(spec: ManifoldSpec) -> float:
    return heat_kernel_bound_constant(spec, HEAT_FIT_GRID)


def default_heat_constant(spec: ManifoldSpec) -> float:
    """Fitted ``C`` over ``t`` log-spaced in ``[1e-4, 10]``."""
    return _heat_constant(spec)


@dataclass(frozen=True)
class VariationalResult:
    matrix_element: float
    printed_closed_form: float
    recomputed_closed_form: float


def variational_upper(params: ModelParams, sector: SectorBasis | None = None) -> VariationalResult:
    """Trial expectation ``<Omega*|Phi(n m + mu_p)|Omega*>``.

    ``Omega*`` puts all ``n`` bosons in the constant mode. Besides the
    brute-force matrix element two closed forms are reported:
    ``-n lam^2 f0^2 / (m (m + mu_p))`` as printed in the literature and
    ``-n lam^2 f0^2 / (2 m (m - mu_p))``, the one-term value that follows from
    the intermediate denominator ``(n-1) m - E + 2m = m - mu_p``.
    """
    cat = params.catalog
    if params.n < 1:
        raise DomainError("the trial state needs n >= 1")
    if len(cat) == 0 or cat.sigma[0] != 0.0:
        raise DomainError("catalog has no constant mode")
    if sector is None:
        sector = enumerate_sector(cat, params.n)
    trial = np.zeros(len(cat), dtype=np.int64)
    trial[0] = params.n
    i = sector.index(trial)
    phi = assemble_phi(params, sector, params.threshold).matrix
    value = float(phi[i, i])
    f0sq = float(cat.f[0] ** 2)
    lam2, m, mu = params.lam**2, params.m, params.mu_p
    printed = -params.n * lam2 * f0sq / (m * (m + mu))
    recomputed = -params.n * lam2 * f0sq / (2 * m * (m - mu))
    return VariationalResult(value, printed, recomputed)


def compact_lower(params: ModelParams, C: float) -> float:
    """``(n-1) m - n lam^2 (1/(2 m^2 V) + C)``.

    This is the final printed bound; ``mu_p`` was dropped in its derivation.
    """
    V = params.catalog.volume
    return (params.n - 1) * params.m - params.n * params.lam**2 * (1.0 / (2 * params.m**2 * V) + C)


def invertibility_threshold(params: ModelParams, C: float) -> float:
    """``E_*`` below which ``n lam^2 (1/(2 m^2 V) + C) / ((n-1) m - E) < 1``."""
    return compact_lower(params, C)


def default_lower_bound(params: ModelParams) -> float:
    return compact_lower(params, default_heat_constant(params.catalog.spec))


def relative_potential(params: ModelParams, sector: SectorBasis, E: float) -> np.ndarray:
    """``D^{-1/2} U(E) D^{-1/2}`` with ``D = H0 - E + mu_p``, for real ``E``."""
    D = sector.h0 - E + params.mu_p
    if np.any(D <= 0):
        raise DomainError("H0 - E + mu_p must be positive on the sector")
    s = 1.0 / np.sqrt(D)
    return s[:, None] * hopping_matrix(params, sector, E) * s[None, :]


def relative_potential_norm(params: ModelParams, sector: SectorBasis, E: float) -> float:
    vals = np.linalg.eigvalsh(relative_potential(params, sector, E))
    return float(np.max(np.abs(vals)))


def crude_inequality_holds(params: ModelParams, chi_grid) -> bool:
    """``(chi + w_s + w_t)^2 > (chi + w_s)(chi + w_t)`` for every mode pair and ``chi``."""
    w = params.catalog.omega
    for chi in np.asarray(chi_grid, dtype=float):
        if chi <= 0:
            raise DomainError("chi must be positive")
        lhs = (chi + w[:, None] + w[None, :]) ** 2
        rhs = (chi + w[:, None]) * (chi + w[None, :])
        if not np.all(lhs > rhs):
            return False
    return True


@dataclass
class BoundReport:
    variational_value: float
    printed_closed_form: float
    recomputed_closed_form: float
    lower_bound: float
    heat_constant: float
    threshold: float
    E_gr: float
    lower_ok: bool
    upper_ok: bool
    variational_negative: bool

    @property
    def sandwich_ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        out = asdict(self)
        out["sandwich_ok"] = self.sandwich_ok
        return out


def bound_report(params: ModelParams, E_gr: float, C: float | None = None,
                 sector: SectorBasis | None = None) -> BoundReport:
    """Compare a computed ground-state energy against both analytic bounds."""
    if C is None:
        C = default_heat_constant(params.catalog.spec)
    if params.n >= 1:
        var = variational_upper(params, sector)
    else:
        var = VariationalResult(0.0, 0.0, 0.0)
    low = compact_lower(params, C)
    thr = params.threshold
    bound = params.lam > 0
    return BoundReport(
        variational_value=var.matrix_element,
        printed_closed_form=var.printed_closed_form,
        recomputed_closed_form=var.recomputed_closed_form,
        lower_bound=low,
        heat_constant=C,
        threshold=thr,
        E_gr=float(E_gr),
        lower_ok=bool(low <= E_gr),
        upper_ok=bool(E_gr < thr) if (bound and params.n >= 1) else bool(E_gr <= thr),
        variational_negative=bool(var.matrix_element < 0) if (bound and params.n >= 1) else True,
    )
