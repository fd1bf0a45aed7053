"""The renormalized principal operator on a truncated Fock sector.

On the ``n``-boson sector the operator is

    Phi(E) = (H0 - E + mu_p) (1 + K(E)) - U(E)

with the diagonal kinetic sum

    K(E) = sum_sigma lam^2 f_sigma^2 / (2 w_sigma (w_sigma - mu_p) (H0 - E + w_sigma))

and the one-boson hopping term

    U(E) = sum_{sigma,tau} c_sigma c_tau a_sigma^+ (H0 - E + w_sigma + w_tau)^{-1} a_tau,
    c_sigma = lam f_sigma / sqrt(2 w_sigma).

Inside ``U`` the resolvent acts on the intermediate ``n - 1`` boson state, so
its denominator is ``h_int - E + w_sigma + w_tau`` with ``h_int`` the free
energy after ``a_tau`` has acted.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DomainError
from .fock import ModelParams, SectorBasis, enumerate_sector, raising_map
from .manifold import ModeCatalog, ManifoldSpec, build_catalog

__all__ = [
    "PrincipalMatrix",
    "RenormResult",
    "bare_mass",
    "bare_mass_sweep",
    "fit_log_divergence",
    "k_sum",
    "k_sum_tail",
    "assemble_phi",
    "phi_derivative",
    "phi_operator",
    "hopping_matrix",
    "matrix_to_triplets_csv",
]

_CHUNK = 2_000_000


@dataclass(frozen=True)
class RenormResult:
    """Bare level splitting ``mu(Lambda)`` on a catalog."""

    cutoff: float
    mu: float
    tail_estimate: float
    level_sigma: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PrincipalMatrix:
    E: complex
    sector: SectorBasis = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    cutoff: float = 0.0
    meta: dict = field(default_factory=dict, compare=False, repr=False)


def _check_domain(params: ModelParams, E):
    if np.real(E) > params.threshold:
        raise DomainError(
            f"Re(E)={np.real(E)!r} lies above the threshold n m + mu_p = {params.threshold!r}"
        )


def _kin_weights(params: ModelParams, catalog: ModeCatalog | None = None):
    cat = params.catalog if catalog is None else catalog
    w = params.lam**2 * cat.f**2 / (2 * cat.omega * (cat.omega - params.mu_p))
    return w, cat.omega


def bare_mass(params: ModelParams) -> RenormResult:
    """``mu(Lambda) = mu_p + sum_{sigma <= Lambda} lam^2 f^2 / (2 w (w - mu_p))``.

    ``tail_estimate`` is the Weyl-law estimate of the next octave
    ``Lambda < sigma <= 2 Lambda``; the full dropped sum diverges
    logarithmically.
    """
    cat = params.catalog
    w, omega = _kin_weights(params)
    levels, inverse = np.unique(cat.sigma, return_inverse=True)
    per_level = np.zeros(levels.size)
    np.add.at(per_level, inverse, w)
    partial = params.mu_p + np.cumsum(per_level)
    mu = params.mu_p + math.fsum(w)
    lam2 = params.lam**2
    w1 = math.sqrt(cat.cutoff + params.m**2)
    w2 = math.sqrt(2 * cat.cutoff + params.m**2)
    tail = lam2 / (4 * math.pi) * math.log((w2 - params.mu_p) / (w1 - params.mu_p))
    partial.setflags(write=False)
    levels.setflags(write=False)
    return RenormResult(cutoff=cat.cutoff, mu=mu, tail_estimate=tail,
                        level_sigma=levels, partial_sums=partial)


def bare_mass_sweep(spec: ManifoldSpec, m: float, mu_p: float, lam: float, cutoffs,
                    mode_ceiling: int = 100_000) -> list:
    """``bare_mass`` for each cutoff on freshly built (pruned) catalogs."""
    out = []
    for cut in cutoffs:
        cat = build_catalog(spec, cut, m, prune_uncoupled=True, mode_ceiling=mode_ceiling)
        out.append(bare_mass(ModelParams(m, mu_p, lam, 0, cat)))
    return out


def fit_log_divergence(cutoffs, values):
    """Least squares ``value = a ln(cutoff) + b``; returns ``(a, b, r2)``."""
    x = np.log(np.asarray(cutoffs, dtype=float))
    y = np.asarray(values, dtype=float)
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def k_sum(params: ModelParams, E, h0, catalog: ModeCatalog | None = None):
    """Kinetic sum ``K`` at free energy ``h0``; scalar or array in ``h0``.

    ``catalog`` overrides the modes summed over (defaults to the model
    catalog, which keeps the identity with the cutoff form exact).
    """
    _check_domain(params, E)
    w, omega = _kin_weights(params, catalog)
    h0 = np.asarray(h0)
    den = h0[..., None] - E + omega
    val = np.sum(w / den, axis=-1)
    return val.item() if val.ndim == 0 else val


def k_sum_tail(params: ModelParams, E, h0, cutoff: float | None = None):
    """Weyl-law estimate of the kinetic sum over modes above ``cutoff``.

    Uses ``sum_sigma f_sigma^2 g(sigma) ~ (1/4 pi) int g d sigma``, which gives
    ``lam^2 / (4 pi (X + mu_p)) ln((w_c + X) / (w_c - mu_p))`` with
    ``X = h0 - E`` and ``w_c = sqrt(cutoff + m^2)``.
    """
    _check_domain(params, E)
    cut = params.catalog.cutoff if cutoff is None else cutoff
    wc = math.sqrt(cut + params.m**2)
    X = h0 - E
    s = X + params.mu_p
    lam2 = params.lam**2
    if abs(s) < 1e-12:
        return lam2 / (4 * math.pi) / (wc - params.mu_p)
    val = lam2 / (4 * math.pi * s) * cmath.log((wc + X) / (wc - params.mu_p))
    return val.real if np.isrealobj(E) else val


def _hopping_terms(params: ModelParams, sector: SectorBasis, E, power: int):
    """Yield ``(rows, cols, vals)`` chunks of ``sum c c a^+ (den)^-power a``."""
    if sector.n == 0 or params.lam == 0:
        return
    lower = enumerate_sector(sector.catalog, sector.n - 1, dim_ceiling=max(sector.dim, 1))
    target, amp = raising_map(lower, sector)
    B = amp * params.coupling[None, :]
    omega = sector.catalog.omega
    M = sector.n_modes
    pair = omega[:, None] + omega[None, :]
    step = max(1, _CHUNK // max(M * M, 1))
    for j0 in range(0, lower.dim, step):
        j1 = min(lower.dim, j0 + step)
        den = (lower.h0[j0:j1, None, None] - E) + pair[None, :, :]
        vals = B[j0:j1, :, None] * B[j0:j1, None, :] / den**power
        # vals[j, tau, sigma] lands on (target[j, tau], target[j, sigma])
        rows = np.broadcast_to(target[j0:j1, :, None], vals.shape)
        cols = np.broadcast_to(target[j0:j1, None, :], vals.shape)
        yield rows.ravel(), cols.ravel(), vals.ravel()


def _dense_from_terms(dim, terms, dtype):
    out = np.zeros(dim * dim, dtype=dtype)
    for rows, cols, vals in terms:
        flat = rows * dim + cols
        if np.iscomplexobj(out):
            out += np.bincount(flat, weights=vals.real, minlength=dim * dim)
            out += 1j * np.bincount(flat, weights=vals.imag, minlength=dim * dim)
        else:
            out += np.bincount(flat, weights=vals, minlength=dim * dim)
    return out.reshape(dim, dim)


def _check_sector(params, sector):
    if sector.n != params.n:
        raise DomainError(f"sector carries {sector.n} bosons but params.n = {params.n}")
    if sector.catalog is not params.catalog and sector.catalog != params.catalog:
        raise DomainError("sector and params use different catalogs")


def _diag(params, sector, E, ksum_catalog):
    h = sector.h0
    w, omega = _kin_weights(params, ksum_catalog)
    den = h[:, None] - E + omega[None, :]
    k = np.sum(w / den, axis=1)
    dk = np.sum(w / den**2, axis=1)
    shift = h - E + params.mu_p
    return shift * (1 + k), -(1 + k) + shift * dk


def assemble_phi(params: ModelParams, sector: SectorBasis, E, ksum_catalog: ModeCatalog | None = None) -> PrincipalMatrix:
    """Dense ``Phi(E)`` on an enumerated sector.

    Parameters
    ----------
    params : ModelParams
    sector : SectorBasis
        Must be the ``params.n`` sector over ``params.catalog``.
    E : float or complex
        Spectral parameter with ``Re(E) <= n m + mu_p``.
    ksum_catalog : ModeCatalog, optional
        Larger catalog for the convergent kinetic sum only.
    """
    _check_sector(params, sector)
    _check_domain(params, E)
    t0 = time.perf_counter()
    dtype = complex if np.iscomplexobj(E) else float
    diag, _ = _diag(params, sector, E, ksum_catalog)
    U = _dense_from_terms(sector.dim, _hopping_terms(params, sector, E, 1), dtype)
    mat = -U
    mat[np.diag_indices(sector.dim)] += diag
    mat.setflags(write=False)
    meta = {"assembly_seconds": time.perf_counter() - t0, "dim": sector.dim}
    cut = (ksum_catalog or params.catalog).cutoff
    return PrincipalMatrix(E=E, sector=sector, matrix=mat, cutoff=cut, meta=meta)


def hopping_matrix(params: ModelParams, sector: SectorBasis, E) -> np.ndarray:
    """Dense one-boson hopping term ``U(E)`` alone (enters ``Phi`` with a minus sign)."""
    _check_sector(params, sector)
    _check_domain(params, E)
    dtype = complex if np.iscomplexobj(E) else float
    return _dense_from_terms(sector.dim, _hopping_terms(params, sector, E, 1), dtype)


def phi_derivative(params: ModelParams, sector: SectorBasis, E, ksum_catalog: ModeCatalog | None = None) -> np.ndarray:
    """Analytic ``dPhi/dE``; symmetric and negative definite for real ``E``."""
    _check_sector(params, sector)
    _check_domain(params, E)
    dtype = complex if np.iscomplexobj(E) else float
    _, ddiag = _diag(params, sector, E, ksum_catalog)
    dU = _dense_from_terms(sector.dim, _hopping_terms(params, sector, E, 2), dtype)
    out = -dU
    out[np.diag_indices(sector.dim)] += ddiag
    return out


def phi_operator(params: ModelParams, sector: SectorBasis, E, derivative: bool = False) -> sparse.csr_matrix:
    """Sparse ``Phi(E)`` (or its ``E``-derivative) for sectors too large to store densely."""
    _check_sector(params, sector)
    _check_domain(params, E)
    diag, ddiag = _diag(params, sector, E, None)
    power = 2 if derivative else 1
    chunks = list(_hopping_terms(params, sector, E, power))
    dim = sector.dim
    if chunks:
        rows = np.concatenate([c[0] for c in chunks])
        cols = np.concatenate([c[1] for c in chunks])
        vals = np.concatenate([c[2] for c in chunks])
        U = sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    else:
        U = sparse.csr_matrix((dim, dim))
    return (sparse.diags(ddiag if derivative else diag) - U).tocsr()


def matrix_to_triplets_csv(matrix, atol: float = 0.0) -> str:
    """CSV of ``row,col,value`` triplets (``value`` as ``real`` or ``real+imagj``)."""
    mat = matrix.tocoo() if sparse.issparse(matrix) else sparse.coo_matrix(np.asarray(matrix))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "value"])
    order = np.lexsort((mat.col, mat.row))
    for k in order:
        v = mat.data[k]
        if abs(v) <= atol:
            continue
        w.writerow([int(mat.row[k]), int(mat.col[k]), repr(complex(v)) if np.iscomplexobj(v) else repr(float(v))])
    return buf.getvalue()
