"""Eigenvalue flow of the principal operator and the ground state it encodes.

Bound states are the real ``E`` at which an eigenvalue ``omega_k(E)`` of the
Hermitian ``Phi(E)`` vanishes. Every curve is strictly decreasing, so the
ground state is the unique zero of the lowest curve ``omega_0``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .errors import ConvergenceError, DomainError, NoBoundStateError
from .fock import ModelParams, SectorBasis, coupling_matrix, enumerate_sector
from .principal import assemble_phi, phi_derivative, phi_operator

__all__ = [
    "FlowSample",
    "GroundEnergy",
    "GroundStateReport",
    "DEFAULT_DENSE_CEILING",
    "phi_eigenpairs",
    "eigen_flow",
    "ground_energy",
    "riesz_wavefunction",
    "solve_ground_state",
    "fh_check",
    "flow_to_csv",
]

log = logging.getLogger(__name__)

DEFAULT_DENSE_CEILING = 5000
DEGENERACY_TOL = 1e-10
TRACK_OVERLAP = 0.9


@dataclass(frozen=True)
class FlowSample:
    E: float
    eigenvalues: np.ndarray = field(repr=False)
    vector: np.ndarray = field(repr=False)
    fh_derivative: float = 0.0
    degenerate: bool = False

    @property
    def omega0(self) -> float:
        return float(self.eigenvalues[0])


@dataclass(frozen=True)
class GroundEnergy:
    E_gr: float
    bracket: tuple
    omega_at_root: float
    bound_state: bool
    iterations: int
    phi_scale: float


@dataclass
class GroundStateReport:
    """Ground-state energy, flow and two-component wavefunction.

    ``wavefunction_upper`` lives in the ``n + 1`` boson sector and
    ``wavefunction_lower`` in the ``n`` boson sector.
    """

    E_gr: float
    bracket: tuple
    bound_state: bool
    wavefunction_upper: np.ndarray
    wavefunction_lower: np.ndarray
    norm_factor: float
    fh_derivative: float
    normalization: float
    normalization_identity: float
    degenerate: bool = False
    gap: float = math.inf
    flow_samples: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)


def _hermitian_eig(mat, k, dense_ceiling, v0=None):
    dim = mat.shape[0]
    k = min(k, dim)
    if dim <= dense_ceiling:
        vals, vecs = eigh(np.asarray(mat), subset_by_index=[0, k - 1])
        return vals, vecs
    kk = min(max(k, 2), dim - 1)
    vals, vecs = eigsh(mat, k=kk, which="SA", tol=1e-13, v0=v0, maxiter=20 * dim)
    order = np.argsort(vals)[:k]
    return vals[order], vecs[:, order]


def phi_eigenpairs(params: ModelParams, sector: SectorBasis, E: float, k: int = 1,
                   dense_ceiling: int = DEFAULT_DENSE_CEILING):
    """Lowest ``k`` eigenpairs of ``Phi(E)`` for real ``E``.

    Sectors above ``dense_ceiling`` go through the sparse operator and an
    iterative extreme-eigenvalue solver.
    """
    if np.iscomplexobj(E) and np.imag(E) != 0:
        raise DomainError("eigenpairs are defined for real E only")
    E = float(np.real(E))
    if sector.dim <= dense_ceiling:
        mat = assemble_phi(params, sector, E).matrix
    else:
        mat = phi_operator(params, sector, E)
    return _hermitian_eig(mat, k, dense_ceiling)


def _fh(params, sector, E, vec, dense_ceiling):
    if sector.dim <= dense_ceiling:
        dphi = phi_derivative(params, sector, E)
    else:
        dphi = phi_operator(params, sector, E, derivative=True)
    return float(vec @ (dphi @ vec))


def _sample(params, sector, E, k, dense_ceiling, prev=None):
    vals, vecs = phi_eigenpairs(params, sector, E, k=max(k, 2), dense_ceiling=dense_ceiling)
    degenerate = vals.size > 1 and vals[1] - vals[0] < DEGENERACY_TOL
    if degenerate:
        nd = int(np.sum(vals - vals[0] < DEGENERACY_TOL))
        sub = vecs[:, :nd]
        if prev is not None:
            v = sub @ (sub.T @ prev)
            nv = np.linalg.norm(v)
            v = v / nv if nv > 0 else sub[:, 0]
        else:
            v = sub[:, 0]
    else:
        v = vecs[:, 0]
    if prev is not None:
        if v @ prev < 0:
            v = -v
    elif v[np.argmax(np.abs(v))] < 0:
        v = -v
    fh = _fh(params, sector, E, v, dense_ceiling)
    return FlowSample(E=float(E), eigenvalues=vals[:k], vector=v, fh_derivative=fh, degenerate=bool(degenerate))


def eigen_flow(params: ModelParams, sector: SectorBasis, E_grid, n_eigs: int = 4,
               dense_ceiling: int = DEFAULT_DENSE_CEILING, max_refine: int = 6,
               workers: int = 1) -> list:
    """Spectra of ``Phi(E)`` along a sorted real grid.

    Adjacent lowest eigenvectors must overlap by more than 0.9; where they do
    not, midpoints are inserted (up to ``max_refine`` rounds).

    Returns
    -------
    list of FlowSample
        Sorted by ``E``; may contain more points than ``E_grid``.
    """
    grid = np.asarray(E_grid, dtype=float)
    if grid.size == 0:
        return []
    if np.any(np.diff(grid) <= 0):
        raise DomainError("E_grid must be strictly increasing")
    if grid[-1] > params.threshold:
        raise DomainError("E_grid extends above the threshold n m + mu_p")

    def run(Es):
        if workers > 1 and len(Es) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(lambda e: _sample(params, sector, e, n_eigs, dense_ceiling), Es))
        return [_sample(params, sector, e, n_eigs, dense_ceiling) for e in Es]

    def poorly_tracked(samples):
        return [i for i in range(len(samples) - 1)
                if abs(samples[i].vector @ samples[i + 1].vector) <= TRACK_OVERLAP]

    samples = run(list(grid))
    bad = poorly_tracked(samples)
    for _ in range(max_refine):
        if not bad:
            break
        mids = [0.5 * (samples[i].E + samples[i + 1].E) for i in bad]
        samples = sorted(samples + run(mids), key=lambda s: s.E)
        bad = poorly_tracked(samples)
    if bad and max_refine > 0:
        log.warning("eigenvector tracking still below overlap %.2f after refinement", TRACK_OVERLAP)
    # consistent phase along the curve
    out = [samples[0]]
    for s in samples[1:]:
        v = s.vector if s.vector @ out[-1].vector >= 0 else -s.vector
        out.append(FlowSample(s.E, s.eigenvalues, v, s.fh_derivative, s.degenerate))
    return out


def _omega0(params, sector, E, dense_ceiling):
    vals, vecs = phi_eigenpairs(params, sector, E, k=1, dense_ceiling=dense_ceiling)
    return float(vals[0]), vecs[:, 0]


def ground_energy(params: ModelParams, sector: SectorBasis, lower: float | None = None,
                  dense_ceiling: int = DEFAULT_DENSE_CEILING, rtol: float = 1e-10,
                  max_iter: int = 200) -> GroundEnergy:
    """Root of ``omega_0(E) = 0`` below ``n m + mu_p``.

    The bracket starts at ``lower`` (the analytic lower bound by default) and
    the threshold, is pushed left geometrically while ``omega_0(lower) <= 0``,
    then shrunk by bisection with Feynman-Hellmann Newton steps. The root is
    accepted once ``|omega_0| < rtol * max|Phi|`` and the sign change has been
    confirmed across a bracket of width below ``rtol * (1 + |E|)``.
    """
    if sector.n != params.n:
        raise DomainError("sector does not match params.n")
    b = params.threshold
    wb, _ = _omega0(params, sector, b, dense_ceiling)
    scale = max(1.0, float(np.max(np.abs(assemble_phi(params, sector, b).matrix)))) \
        if sector.dim <= dense_ceiling else 1.0
    if params.lam == 0 or abs(wb) <= 1e-14 * scale:
        # free theory, or a root sitting exactly on threshold (vacuum sector)
        return GroundEnergy(E_gr=b, bracket=(b, b), omega_at_root=wb,
                            bound_state=params.lam > 0 and params.n == 0, iterations=0, phi_scale=scale)
    if lower is None:
        from .bounds import default_lower_bound
        lower = default_lower_bound(params)
    a = min(float(lower), b - 1e-3 * (1 + abs(b)))
    wa, _ = _omega0(params, sector, a, dense_ceiling)
    if wb > 0:
        raise NoBoundStateError(a, b, wa, wb)
    expand = 0
    while wa <= 0:
        a = b - 2 * (b - a)
        wa, _ = _omega0(params, sector, a, dense_ceiling)
        expand += 1
        if expand > 60:
            raise NoBoundStateError(a, b, wa, wb)
    lo, hi = a, b
    x = 0.5 * (lo + hi)
    it = 0
    while it < max_iter:
        it += 1
        wx, vx = _omega0(params, sector, x, dense_ceiling)
        if wx > 0:
            lo = x
        else:
            hi = x
        dx = _fh(params, sector, x, vx, dense_ceiling)
        tol_E = rtol * (1 + abs(x))
        if abs(wx) < rtol * scale:
            half = 0.25 * tol_E
            wl, _ = _omega0(params, sector, x - half, dense_ceiling)
            wr, _ = _omega0(params, sector, min(x + half, b), dense_ceiling)
            if wl > 0 >= wr or (x + half >= b and wl > 0):
                return GroundEnergy(E_gr=x, bracket=(x - half, min(x + half, b)), omega_at_root=wx,
                                    bound_state=True, iterations=it, phi_scale=scale)
        step = x - wx / dx if dx < 0 else None
        if step is not None and lo < step < hi:
            x = step
        else:
            x = 0.5 * (lo + hi)
        if hi - lo < 1e-3 * tol_E and abs(wx) >= rtol * scale:
            break
    raise ConvergenceError(f"root search did not converge; bracket [{lo!r}, {hi!r}]")


def riesz_wavefunction(params: ModelParams, sector: SectorBasis, E_gr: float, vector: np.ndarray,
                       upper: SectorBasis | None = None, dense_ceiling: int = DEFAULT_DENSE_CEILING,
                       fd_step: float | None = None) -> GroundStateReport:
    """Two-component ground state from the lowest eigenvector of ``Phi(E_gr)``.

    ``lower = N v`` and ``upper = -N (H0 - E_gr)^{-1} lam phi^(-)(x) v`` with
    ``N = (-d omega_0/dE)^{-1/2}``. The sign follows from the first row of
    ``(H - E) psi = 0``. ``normalization_identity`` evaluates
    ``<v|-dPhi/dE|v> / (-d omega_0/dE)`` with the slope taken by central
    differences, so it checks the Feynman-Hellmann value independently.
    """
    if upper is None:
        upper = enumerate_sector(sector.catalog, sector.n + 1)
    floor = float(np.min(upper.h0))
    if not E_gr < floor:
        raise DomainError(f"E_gr={E_gr!r} is not below the n+1 free floor {floor!r}")
    v = np.asarray(vector, dtype=float)
    v = v / np.linalg.norm(v)
    fh = _fh(params, sector, E_gr, v, dense_ceiling)
    if not fh < 0:
        raise ConvergenceError(f"non-negative Feynman-Hellmann derivative {fh!r}")
    N = 1.0 / math.sqrt(-fh)
    B = coupling_matrix(params, sector, upper)
    up = -N * (B.T @ v) / (upper.h0 - E_gr)
    low = N * v
    normalization = float(up @ up + low @ low)

    h = (1e-5 if fd_step is None else fd_step) * (1 + abs(E_gr))
    wp, _ = _omega0(params, sector, E_gr + h, dense_ceiling) if E_gr + h <= params.threshold else (None, None)
    wm, _ = _omega0(params, sector, E_gr - h, dense_ceiling)
    if wp is None:
        # second-order backward stencil; Phi is not defined above the threshold
        w0, _ = _omega0(params, sector, E_gr, dense_ceiling)
        wmm, _ = _omega0(params, sector, E_gr - 2 * h, dense_ceiling)
        slope = (3 * w0 - 4 * wm + wmm) / (2 * h)
    else:
        slope = (wp - wm) / (2 * h)
    identity = -fh / -slope
    return GroundStateReport(E_gr=float(E_gr), bracket=(float(E_gr), float(E_gr)), bound_state=True,
                             wavefunction_upper=up, wavefunction_lower=low, norm_factor=N,
                             fh_derivative=fh, normalization=normalization,
                             normalization_identity=identity)


def solve_ground_state(params: ModelParams, sector: SectorBasis | None = None, lower: float | None = None,
                       n_flow: int = 20, n_eigs: int = 4,
                       dense_ceiling: int = DEFAULT_DENSE_CEILING, workers: int = 1) -> GroundStateReport:
    """Root, flow scan and Riesz wavefunction in one report."""
    if sector is None:
        sector = enumerate_sector(params.catalog, params.n)
    root = ground_energy(params, sector, lower=lower, dense_ceiling=dense_ceiling)
    E = root.E_gr
    vals, vecs = phi_eigenpairs(params, sector, E, k=2, dense_ceiling=dense_ceiling)
    v = vecs[:, 0]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    if root.bound_state or params.lam > 0:
        rep = riesz_wavefunction(params, sector, E, v, dense_ceiling=dense_ceiling)
    else:
        upper = enumerate_sector(params.catalog, params.n + 1)
        rep = GroundStateReport(E_gr=E, bracket=root.bracket, bound_state=False,
                                wavefunction_upper=np.zeros(upper.dim), wavefunction_lower=v.copy(),
                                norm_factor=1.0, fh_derivative=-1.0, normalization=1.0,
                                normalization_identity=1.0)
    rep.bracket = root.bracket
    rep.bound_state = root.bound_state
    rep.gap = float(vals[1] - vals[0]) if vals.size > 1 else math.inf
    rep.degenerate = rep.gap < DEGENERACY_TOL
    if n_flow > 0:
        from .bounds import default_lower_bound
        lo = default_lower_bound(params) if lower is None else lower
        lo = min(lo, E - 0.5)
        grid = np.linspace(lo, params.threshold, n_flow)
        rep.flow_samples = eigen_flow(params, sector, grid, n_eigs=n_eigs,
                                      dense_ceiling=dense_ceiling, max_refine=0, workers=workers)
    return rep


def fh_check(params: ModelParams, sector: SectorBasis, samples, step: float | None = None,
             dense_ceiling: int = DEFAULT_DENSE_CEILING) -> np.ndarray:
    """Relative error of the Feynman-Hellmann slope against a central difference.

    Returns one entry per sample; samples whose stencil would cross the
    threshold or that sit on a degenerate level are reported as ``nan``.
    """
    if step is None:
        step = 1e-4 * max(1.0, params.m)
    out = np.full(len(samples), np.nan)
    for i, s in enumerate(samples):
        if s.degenerate or s.E + step > params.threshold:
            continue
        wp = _omega0(params, sector, s.E + step, dense_ceiling)[0]
        wm = _omega0(params, sector, s.E - step, dense_ceiling)[0]
        cd = (wp - wm) / (2 * step)
        out[i] = abs(s.fh_derivative - cd) / abs(s.fh_derivative)
    return out


def flow_to_csv(samples) -> str:
    """CSV with columns ``E, omega_0 .. omega_k, domega0_dE``."""
    k = max(len(s.eigenvalues) for s in samples) if samples else 1
    lines = [",".join(["E"] + [f"omega_{i}" for i in range(k)] + ["domega0_dE"])]
    for s in samples:
        vals = [repr(float(x)) for x in s.eigenvalues] + [""] * (k - len(s.eigenvalues))
        lines.append(",".join([repr(s.E)] + vals + [repr(s.fh_derivative)]))
    return "\n".join(lines) + "\n"
