"""Laplace-Beltrami spectra and heat kernels on flat tori and round spheres.

Two closed-form surfaces are supported:

* ``torus``  -- flat rectangle ``[0, L1) x [0, L2)`` with periodic identification,
  eigenvalues ``(2 pi k1 / L1)^2 + (2 pi k2 / L2)^2`` in a real cosine/sine basis;
* ``sphere`` -- round sphere of radius ``r``, eigenvalues ``l (l + 1) / r^2`` with
  real spherical harmonics.

All returned objects are immutable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, lpmv

from .errors import CeilingError, ConvergenceError, DomainError

__all__ = [
    "ManifoldSpec",
    "Mode",
    "ModeCatalog",
    "build_catalog",
    "mode_count",
    "heat_kernel_diag",
    "heat_kernel_diag_images",
    "heat_kernel_from_catalog",
    "heat_kernel_bound_constant",
    "catalog_to_csv",
    "DEFAULT_MODE_CEILING",
]

DEFAULT_MODE_CEILING = 5000
# relative size of the dropped tail at which spectral sums stop
HEAT_TAIL_RTOL = 1e-14
# |f(x)| * sqrt(V) below this counts as an uncoupled mode
UNCOUPLED_ATOL = 1e-12
_MAX_SERIES_TERMS = 2_000_000


@dataclass(frozen=True)
class ManifoldSpec:
    """Geometry of the spatial surface and the location of the impurity.

    Parameters
    ----------
    kind : {"torus", "sphere"}
    L1, L2 : float
        Torus side lengths (ignored for spheres).
    radius : float
        Sphere radius (ignored for tori).
    impurity : tuple of float
        ``(x1, x2)`` on the torus, polar and azimuthal angle ``(theta, phi)``
        on the sphere. Torus coordinates are reduced modulo the side lengths.
    """

    kind: str = "torus"
    L1: float = 2 * math.pi
    L2: float = 2 * math.pi
    radius: float = 1.0
    impurity: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("torus", "sphere"):
            raise DomainError(f"unknown manifold kind {self.kind!r}")
        if len(self.impurity) != 2:
            raise DomainError("impurity must have two coordinates")
        if self.kind == "torus":
            if not (self.L1 > 0 and self.L2 > 0):
                raise DomainError("torus side lengths must be positive")
            x1 = float(self.impurity[0]) % self.L1
            x2 = float(self.impurity[1]) % self.L2
            object.__setattr__(self, "impurity", (x1, x2))
        else:
            if not self.radius > 0:
                raise DomainError("sphere radius must be positive")
            theta, phi = (float(v) for v in self.impurity)
            if not 0.0 <= theta <= math.pi:
                raise DomainError("sphere impurity polar angle must lie in [0, pi]")
            object.__setattr__(self, "impurity", (theta, phi % (2 * math.pi)))

    @property
    def volume(self) -> float:
        if self.kind == "torus":
            return self.L1 * self.L2
        return 4 * math.pi * self.radius**2


@dataclass(frozen=True)
class Mode:
    """One real Laplacian eigenfunction, evaluated at the impurity."""

    index: int
    sigma: float
    f_at_impurity: float
    omega: float
    label: tuple = ()


@dataclass(frozen=True)
class ModeCatalog:
    """All eigenmodes with ``sigma <= cutoff``, sorted by eigenvalue."""

    spec: ManifoldSpec
    cutoff: float
    mass: float
    modes: tuple
    prune_uncoupled: bool = False
    sigma: np.ndarray = field(init=False, repr=False, compare=False)
    f: np.ndarray = field(init=False, repr=False, compare=False)
    omega: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, attr in (("sigma", "sigma"), ("f", "f_at_impurity"), ("omega", "omega")):
            arr = np.array([getattr(md, attr) for md in self.modes], dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def volume(self) -> float:
        return self.spec.volume

    def __len__(self):
        return len(self.modes)


def _torus_modes(spec, cutoff):
    k1max = int(math.floor(spec.L1 * math.sqrt(cutoff) / (2 * math.pi))) + 1
    k2max = int(math.floor(spec.L2 * math.sqrt(cutoff) / (2 * math.pi))) + 1
    k1, k2 = np.meshgrid(np.arange(-k1max, k1max + 1), np.arange(-k2max, k2max + 1), indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    sig = (2 * math.pi * k1 / spec.L1) ** 2 + (2 * math.pi * k2 / spec.L2) ** 2
    keep = sig <= cutoff * (1 + 1e-12)
    # one representative per +-k pair
    half = (k1 > 0) | ((k1 == 0) & (k2 > 0))
    V = spec.volume
    x1, x2 = spec.impurity
    out = [(0.0, 1.0 / math.sqrt(V), (0, 0, "const"))]
    amp = math.sqrt(2.0 / V)
    for a, b, s in zip(k1[keep & half], k2[keep & half], sig[keep & half]):
        phase = 2 * math.pi * (a * x1 / spec.L1 + b * x2 / spec.L2)
        out.append((float(s), amp * math.cos(phase), (int(a), int(b), "cos")))
        out.append((float(s), amp * math.sin(phase), (int(a), int(b), "sin")))
    return out


def _sphere_f(l, m, kind, theta, phi, radius):
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(gammaln(l - m + 1) - gammaln(l + m + 1)))
    p = float(lpmv(m, l, math.cos(theta)))
    if m == 0:
        return norm * p / radius
    ang = math.cos(m * phi) if kind == "cos" else math.sin(m * phi)
    return math.sqrt(2.0) * norm * p * ang / radius


def _sphere_modes(spec, cutoff):
    r = spec.radius
    theta, phi = spec.impurity
    out = []
    l = 0
    while l * (l + 1) / r**2 <= cutoff * (1 + 1e-12):
        s = l * (l + 1) / r**2
        out.append((s, _sphere_f(l, 0, "", theta, phi, r), (l, 0, "const" if l == 0 else "cos")))
        for m in range(1, l + 1):
            out.append((s, _sphere_f(l, m, "cos", theta, phi, r), (l, m, "cos")))
            out.append((s, _sphere_f(l, m, "sin", theta, phi, r), (l, m, "sin")))
        l += 1
    return out


def mode_count(spec: ManifoldSpec, cutoff: float) -> int:
    """Number of Laplacian eigenmodes with ``sigma <= cutoff`` (multiplicity counted)."""
    if cutoff < 0:
        raise DomainError("cutoff must be non-negative")
    if spec.kind == "sphere":
        lmax = int(math.floor((-1 + math.sqrt(1 + 4 * cutoff * spec.radius**2 * (1 + 1e-12))) / 2))
        return (lmax + 1) ** 2
    k1max = int(math.floor(spec.L1 * math.sqrt(cutoff) / (2 * math.pi))) + 1
    k = np.arange(-k1max, k1max + 1)
    s1 = (2 * math.pi * k / spec.L1) ** 2
    total = 0
    for a in s1[s1 <= cutoff * (1 + 1e-12)]:
        rem = cutoff * (1 + 1e-12) - a
        total += 2 * int(math.floor(spec.L2 * math.sqrt(rem) / (2 * math.pi) + 1e-12)) + 1
    return total


def build_catalog(
    spec: ManifoldSpec,
    cutoff: float,
    m: float,
    prune_uncoupled: bool = False,
    mode_ceiling: int = DEFAULT_MODE_CEILING,
) -> ModeCatalog:
    """Enumerate every eigenmode with ``sigma <= cutoff``.

    Parameters
    ----------
    spec : ManifoldSpec
    cutoff : float
        Eigenvalue cutoff on the Laplacian (not on ``omega``).
    m : float
        Boson mass; attaches ``omega = sqrt(sigma + m^2)`` to each mode.
    prune_uncoupled : bool
        Drop modes whose eigenfunction vanishes at the impurity. Such modes
        never enter the interaction, only the free energy of spectators.
    mode_ceiling : int
        Upper limit on the number of modes before pruning.

    Returns
    -------
    ModeCatalog
    """
    if not cutoff >= 0:
        raise DomainError("cutoff must be non-negative")
    if not m > 0:
        raise DomainError("boson mass must be positive")
    n_modes = mode_count(spec, cutoff)
    if n_modes > mode_ceiling:
        raise CeilingError(f"{n_modes} modes below cutoff {cutoff} exceed the ceiling {mode_ceiling}")
    raw = _torus_modes(spec, cutoff) if spec.kind == "torus" else _sphere_modes(spec, cutoff)
    order = {"const": 0, "cos": 1, "sin": 2}
    raw.sort(key=lambda item: (item[0], order[item[2][2]], item[2][:2]))
    if prune_uncoupled:
        thresh = UNCOUPLED_ATOL / math.sqrt(spec.volume)
        raw = [item for item in raw if abs(item[1]) > thresh]
    modes = tuple(
        Mode(index=i, sigma=s, f_at_impurity=f, omega=math.sqrt(s + m * m), label=lab)
        for i, (s, f, lab) in enumerate(raw)
    )
    return ModeCatalog(spec=spec, cutoff=float(cutoff), mass=float(m), modes=modes,
                       prune_uncoupled=bool(prune_uncoupled))


def _theta_sum(a):
    """``sum_{k in Z} exp(-a k^2)`` with a geometric tail bound."""
    total = 1.0
    k = 1
    while True:
        term = math.exp(-a * k * k)
        total += 2 * term
        # remaining terms k+1, k+2, ... bounded by a geometric series
        nxt = math.exp(-a * (k + 1) ** 2)
        ratio = math.exp(-a * (2 * k + 3))
        if ratio < 1 and 2 * nxt / (1 - ratio) <= HEAT_TAIL_RTOL * total:
            return total
        k += 1
        if k > _MAX_SERIES_TERMS:
            raise ConvergenceError(f"theta series did not converge for a={a}")


def _sphere_sum(s):
    # sum_l (2l+1) exp(-l(l+1) s); tail past L bounded by exp(-L(L+1) s) / s
    need = math.log(1.0 / (HEAT_TAIL_RTOL * s)) / s if s < 1 / HEAT_TAIL_RTOL else 0.0
    lmax = int(math.ceil((-1 + math.sqrt(1 + 4 * max(need, 0.0))) / 2)) + 1
    if lmax > _MAX_SERIES_TERMS:
        raise ConvergenceError(f"sphere heat-kernel series needs {lmax} levels")
    l = np.arange(lmax + 1, dtype=float)
    terms = (2 * l + 1) * np.exp(-l * (l + 1) * s)
    return float(math.fsum(terms[::-1]))


def heat_kernel_diag(spec: ManifoldSpec, t: float) -> float:
    """Diagonal heat kernel ``K_t(x, x)`` at the impurity from the spectral sum.

    Both surfaces are homogeneous, so the value is independent of the point.
    On the torus the mode sum factorises into two one-dimensional theta series.
    """
    if not t > 0:
        raise DomainError("heat-kernel time must be positive")
    if spec.kind == "torus":
        a1 = (2 * math.pi / spec.L1) ** 2 * t
        a2 = (2 * math.pi / spec.L2) ** 2 * t
        return _theta_sum(a1) * _theta_sum(a2) / spec.volume
    s = t / spec.radius**2
    return _sphere_sum(s) / spec.volume


def heat_kernel_diag_images(spec: ManifoldSpec, t: float) -> float:
    """Torus diagonal heat kernel as a sum over periodic images of the flat kernel."""
    if spec.kind != "torus":
        raise DomainError("image sums are only available on the torus")
    if not t > 0:
        raise DomainError("heat-kernel time must be positive")
    # exp(-j^2 L^2 / 4t) < 1e-300 past this many images
    j1 = int(math.ceil(math.sqrt(4 * t * 700) / spec.L1)) + 1
    j2 = int(math.ceil(math.sqrt(4 * t * 700) / spec.L2)) + 1
    J1, J2 = np.meshgrid(np.arange(-j1, j1 + 1), np.arange(-j2, j2 + 1), indexing="ij")
    d2 = (J1 * spec.L1) ** 2 + (J2 * spec.L2) ** 2
    terms = np.sort(np.exp(-d2 / (4 * t)).ravel())
    return math.fsum(terms) / (4 * math.pi * t)


def heat_kernel_from_catalog(catalog: ModeCatalog, t: float) -> float:
    """Truncated spectral sum ``sum_sigma exp(-sigma t) f_sigma(x)^2`` over a catalog."""
    if not t > 0:
        raise DomainError("heat-kernel time must be positive")
    return float(np.sum(np.exp(-catalog.sigma * t) * catalog.f**2))


def heat_kernel_bound_constant(spec: ManifoldSpec, t_grid: Sequence[float]) -> float:
    """Smallest ``C >= 0`` with ``K_t(x, x) <= 1/V + C / t`` on every grid time."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise DomainError("t_grid must not be empty")
    if np.any(t_grid <= 0):
        raise DomainError("all grid times must be positive")
    V = spec.volume
    vals = [t * (heat_kernel_diag(spec, t) - 1.0 / V) for t in t_grid]
    return max(0.0, max(vals))


def catalog_to_csv(catalog: ModeCatalog) -> str:
    """CSV text with columns ``index, sigma, omega, f_at_impurity``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "sigma", "omega", "f_at_impurity"])
    for md in catalog.modes:
        w.writerow([md.index, repr(md.sigma), repr(md.omega), repr(md.f_at_impurity)])
    return buf.getvalue()
