"""Explicit truncated Hamiltonian on ``F^(n+1) + F^(n)`` and its resolvent.

With the upper block carrying ``n + 1`` bosons and the lower block ``n``,

    H = [[H0_up,  B^T          ],
         [B,      H0_low + mu  ]]

where ``B = lam phi^(+)(x)`` lowers the boson number by one and ``mu`` is the
bare splitting ``mu(Lambda)``. Writing ``H - E = [[a, b^+], [b, d]]`` the
resolvent has the block form

    alpha = a^-1 + a^-1 b^+ Phi^-1 b a^-1     gamma = -a^-1 b^+ Phi^-1
    beta  = -Phi^-1 b a^-1                    delta = Phi^-1

with the Schur complement ``Phi = d - b a^-1 b^+``, which on the truncation is
exactly the principal operator.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import CeilingError, DomainError, SingularError
from .fock import (DEFAULT_DIM_CEILING, ModelParams, SectorBasis, coupling_matrix,
                   enumerate_sector, raising_map)
from .principal import bare_mass

__all__ = [
    "BlockHamiltonian",
    "BlockResolvent",
    "DecayResult",
    "LoweringCheck",
    "assemble_h",
    "block_resolvent",
    "direct_inverse",
    "pseudo_resolvent_residual",
    "conjugation_residual",
    "random_energy_pairs",
    "decay_probes",
    "decay_check",
    "log_log_slope",
    "lowering_inequality",
    "residuals_to_csv",
    "decay_to_csv",
]

log = logging.getLogger(__name__)

COND_WARN = 1e12


@dataclass(frozen=True)
class BlockHamiltonian:
    """Truncated Hamiltonian; the upper block holds ``n + 1`` bosons."""

    params: ModelParams
    upper: SectorBasis = field(repr=False)
    lower: SectorBasis = field(repr=False)
    mu: float
    coupling: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.upper.dim + self.lower.dim

    @property
    def diag_upper(self) -> np.ndarray:
        return np.asarray(self.upper.h0, dtype=float)

    @property
    def diag_lower(self) -> np.ndarray:
        return self.lower.h0 + self.mu

    @property
    def matrix(self) -> np.ndarray:
        B = self.coupling
        return np.block([[np.diag(self.diag_upper), B.T], [B, np.diag(self.diag_lower)]])

    def eigh(self):
        """All eigenpairs, ascending."""
        return linalg.eigh(self.matrix)

    def ground(self):
        """Lowest eigenvalue and its eigenvector, sign fixed by the largest entry."""
        w, v = linalg.eigh(self.matrix, subset_by_index=[0, 0])
        vec = v[:, 0]
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        return float(w[0]), vec

    def split(self, vec):
        """``(upper, lower)`` parts of a full vector."""
        return vec[: self.upper.dim], vec[self.upper.dim:]


def assemble_h(params: ModelParams, dim_ceiling: int = DEFAULT_DIM_CEILING) -> BlockHamiltonian:
    cat = params.catalog
    lower = enumerate_sector(cat, params.n, dim_ceiling=dim_ceiling)
    upper = enumerate_sector(cat, params.n + 1, dim_ceiling=dim_ceiling)
    if lower.dim + upper.dim > dim_ceiling:
        raise CeilingError(f"Hamiltonian dimension {lower.dim + upper.dim} exceeds {dim_ceiling}")
    B = coupling_matrix(params, lower, upper).toarray()
    B.setflags(write=False)
    return BlockHamiltonian(params=params, upper=upper, lower=lower,
                            mu=bare_mass(params).mu, coupling=B)


@dataclass(frozen=True)
class BlockResolvent:
    E: complex
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    phi_cond: float = 1.0

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.alpha, self.gamma], [self.beta, self.delta]])

    def apply(self, x):
        nu = self.alpha.shape[0]
        xu, xl = x[:nu], x[nu:]
        return np.concatenate([self.alpha @ xu + self.gamma @ xl, self.beta @ xu + self.delta @ xl])


def _solve_refined(lu, A, rhs):
    """LU solve with one step of iterative refinement."""
    x = linalg.lu_solve(lu, rhs)
    return x + linalg.lu_solve(lu, rhs - A @ x)


def block_resolvent(H: BlockHamiltonian, E) -> BlockResolvent:
    """Resolvent ``(H - E)^-1`` assembled from the four block formulas."""
    cplx = np.iscomplexobj(E) or isinstance(E, complex)
    dtype = complex if cplx else float
    a = (H.diag_upper - E).astype(dtype)
    if np.any(np.abs(a) < 1e-300):
        raise SingularError(f"free upper block is singular at E={E!r}")
    ainv = 1.0 / a
    b = H.coupling.astype(dtype)
    bh = b.conj().T
    phi = np.diag(H.diag_lower - E).astype(dtype) - (b * ainv[None, :]) @ bh
    cond = float(np.linalg.cond(phi))
    if not np.isfinite(cond):
        raise SingularError(f"Phi is singular at E={E!r}")
    if cond > COND_WARN:
        log.warning("Phi condition number %.3e at E=%r", cond, E)
    lu = linalg.lu_factor(phi)
    delta = _solve_refined(lu, phi, np.eye(phi.shape[0], dtype=dtype))
    b_ainv = b * ainv[None, :]
    beta = -delta @ b_ainv
    gamma = -(ainv[:, None] * bh) @ delta
    alpha = np.diag(ainv) + (ainv[:, None] * bh) @ delta @ b_ainv
    return BlockResolvent(E=E, alpha=alpha, beta=beta, gamma=gamma, delta=delta, phi_cond=cond)


def direct_inverse(H: BlockHamiltonian, E) -> np.ndarray:
    A = H.matrix - E * np.eye(H.dim)
    try:
        return linalg.inv(A)
    except linalg.LinAlgError as exc:
        raise SingularError(f"H - E is singular at E={E!r}") from exc


def pseudo_resolvent_residual(H: BlockHamiltonian, E1, E2) -> float:
    """``max |R(E1) - R(E2) - (E1 - E2) R(E1) R(E2)|`` with block-formula ``R``."""
    if E1 == E2:
        return 0.0
    R1 = block_resolvent(H, E1).matrix
    R2 = block_resolvent(H, E2).matrix
    return float(np.max(np.abs(R1 - R2 - (E1 - E2) * (R1 @ R2))))


def conjugation_residual(H: BlockHamiltonian, E: complex) -> float:
    """``max |R(conj E) - R(E)^+|``."""
    R = block_resolvent(H, complex(E)).matrix
    Rc = block_resolvent(H, complex(E).conjugate()).matrix
    return float(np.max(np.abs(Rc - R.conj().T)))


def random_energy_pairs(H: BlockHamiltonian, count: int = 20, seed: int = 0, margin: float = 0.25):
    """Fixed-seed real and conjugate-complex energy pairs away from the spectrum.

    Real energies are drawn below the ground eigenvalue minus ``margin``;
    complex ones have imaginary parts of modulus at least ``margin``.
    """
    rng = np.random.default_rng(seed)
    e0, _ = H.ground()
    real = [(float(e0 - margin - rng.uniform(0, 5)), float(e0 - margin - rng.uniform(0, 5)))
            for _ in range(count)]
    cplx = []
    for _ in range(count):
        z = complex(rng.uniform(e0 - 2, e0 + 4), rng.uniform(margin, 3))
        cplx.append((z, z.conjugate()))
    return real, cplx


def decay_probes(dim: int, n_random: int = 10, seed: int = 0) -> np.ndarray:
    """Canonical basis vectors followed by fixed-seed random unit vectors (columns)."""
    rng = np.random.default_rng(seed)
    rnd = rng.standard_normal((dim, n_random))
    rnd /= np.linalg.norm(rnd, axis=0)
    return np.hstack([np.eye(dim), rnd])


def log_log_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class DecayResult:
    lam_grid: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    beta_norms: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)
    beta_slopes: np.ndarray = field(repr=False)

    @property
    def slope_range(self):
        return float(self.slopes.min()), float(self.slopes.max())


def decay_check(H: BlockHamiltonian, lam_grid, probes: np.ndarray | None = None,
                workers: int = 1) -> DecayResult:
    """``|| L R(-L) x - x ||`` and ``|| L beta(-L) x_up ||`` over a grid of ``L``.

    Parameters
    ----------
    lam_grid : increasing positive magnitudes ``|lambda_k|``.
    probes : (dim, k) array of probe columns; defaults to :func:`decay_probes`.

    Slopes are least-squares log-log fits over the whole grid, one per probe.
    """
    grid = np.asarray(lam_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("lam_grid must be positive and strictly increasing")
    P = decay_probes(H.dim) if probes is None else np.asarray(probes, dtype=float)
    nu = H.upper.dim

    def one(L):
        R = block_resolvent(H, -L)
        y = L * (R.matrix @ P)
        beta = L * (R.beta @ P[:nu])
        return np.linalg.norm(y - P, axis=0), np.linalg.norm(beta, axis=0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(L) for L in grid]
    norms = np.array([r[0] for r in rows])
    bnorms = np.array([r[1] for r in rows])
    slopes = np.array([log_log_slope(grid, norms[:, k]) for k in range(P.shape[1])])
    keep = np.all(bnorms > 0, axis=0)
    bslopes = np.array([log_log_slope(grid, bnorms[:, k]) if keep[k] else np.nan
                        for k in range(P.shape[1])])
    return DecayResult(grid, norms, bnorms, slopes, bslopes)


@dataclass(frozen=True)
class LoweringCheck:
    n: int
    stated_factor: float
    empirical_constant: float
    sharp_factor: float
    holds: bool


def lowering_inequality(params: ModelParams, g=None, seed: int = 0) -> LoweringCheck:
    """``|| a(g) psi || <= n ||g|| ||psi||`` on the ``n``-boson sector.

    The empirical constant is the largest singular value of ``a(g)`` divided
    by ``||g||``; it equals ``sqrt(n)``, the sharp factor.
    """
    n = params.n
    if n < 1:
        raise DomainError("the lowering inequality needs n >= 1")
    cat = params.catalog
    if g is None:
        g = np.random.default_rng(seed).standard_normal(len(cat))
    g = np.asarray(g, dtype=float)
    A = _lowering_matrix(enumerate_sector(cat, n - 1), enumerate_sector(cat, n), g)
    smax = float(np.linalg.norm(A, 2)) if A.size else 0.0
    gn = float(np.linalg.norm(g))
    const = smax / gn if gn > 0 else 0.0
    return LoweringCheck(n=n, stated_factor=float(n), empirical_constant=const,
                         sharp_factor=float(np.sqrt(n)), holds=bool(const <= n * (1 + 1e-12)))


def _lowering_matrix(lower: SectorBasis, upper: SectorBasis, g: np.ndarray) -> np.ndarray:
    target, amp = raising_map(lower, upper)
    A = np.zeros((lower.dim, upper.dim))
    rows = np.repeat(np.arange(lower.dim), lower.n_modes)
    np.add.at(A, (rows, target.ravel()), (amp * g[None, :]).ravel())
    return A


def residuals_to_csv(rows) -> str:
    """CSV of ``(E1, E2, residual)``; complex energies are written as Python literals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["E1", "E2", "residual"])
    for e1, e2, r in rows:
        w.writerow([repr(e1), repr(e2), repr(float(r))])
    return buf.getvalue()


def decay_to_csv(result: DecayResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda_k", "probe_id", "norm", "beta_norm"])
    for i, L in enumerate(result.lam_grid):
        for k in range(result.norms.shape[1]):
            w.writerow([repr(float(L)), k, repr(float(result.norms[i, k])),
                        repr(float(result.beta_norms[i, k]))])
    return buf.getvalue()
