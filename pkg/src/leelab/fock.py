"""Occupation-number bases for fixed boson number over a mode catalog.

States are stored as rows of an integer ``counts`` array; the row order is the
lexicographic order of the sorted mode multisets, which is what
:func:`itertools.combinations_with_replacement` produces. The vacuum and the
state with every boson in mode 0 are therefore always row 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy import sparse

from .errors import CeilingError, DomainError
from .manifold import ModeCatalog

__all__ = [
    "ModelParams",
    "Occupation",
    "SectorBasis",
    "enumerate_sector",
    "h0_energy",
    "lower_element",
    "raise_element",
    "coupling_matrix",
    "DEFAULT_DIM_CEILING",
]

DEFAULT_DIM_CEILING = 200_000


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the model on a fixed catalog.

    ``n`` is the boson number of the lower block; the upper block carries
    ``n + 1`` bosons.
    """

    m: float
    mu_p: float
    lam: float
    n: int
    catalog: ModeCatalog

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("boson mass must be positive")
        if not 0 < self.mu_p < self.m:
            raise DomainError("physical binding energy must satisfy 0 < mu_p < m")
        if not self.lam >= 0:
            raise DomainError("coupling must be non-negative")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError("boson number must be a non-negative integer")
        if not math.isclose(self.catalog.mass, self.m, rel_tol=0, abs_tol=1e-15):
            raise DomainError("catalog was built for a different boson mass")
        object.__setattr__(self, "n", int(self.n))

    @property
    def threshold(self) -> float:
        """Free threshold ``n m + mu_p`` of the lower block."""
        return self.n * self.m + self.mu_p

    @property
    def coupling(self) -> np.ndarray:
        """Per-mode vertex ``lam f_sigma / sqrt(2 omega_sigma)``."""
        cat = self.catalog
        return self.lam * cat.f / np.sqrt(2.0 * cat.omega)

    def with_n(self, n: int) -> "ModelParams":
        return ModelParams(self.m, self.mu_p, self.lam, n, self.catalog)


@dataclass(frozen=True)
class Occupation:
    counts: tuple
    total: int
    h0: float


@dataclass(frozen=True)
class SectorBasis:
    """Complete occupation basis of the ``n``-boson sector."""

    catalog: ModeCatalog
    n: int
    counts: np.ndarray = field(repr=False)
    h0: np.ndarray = field(repr=False)
    _index: dict = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.counts.shape[0]

    @property
    def n_modes(self) -> int:
        return self.counts.shape[1]

    def __len__(self):
        return self.dim

    def index(self, counts) -> int:
        """Row of an occupation given as a count sequence; ``KeyError`` if absent."""
        return self._index[np.asarray(counts, dtype=np.int64).tobytes()]

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`index` over the rows of a 2-D count array."""
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        idx = self._index
        return np.fromiter((idx[r.tobytes()] for r in rows), dtype=np.int64, count=rows.shape[0])

    def occupation(self, i: int) -> Occupation:
        return Occupation(tuple(int(c) for c in self.counts[i]), self.n, float(self.h0[i]))


def enumerate_sector(catalog: ModeCatalog, n: int, dim_ceiling: int = DEFAULT_DIM_CEILING) -> SectorBasis:
    """Enumerate every ``n``-boson occupation over the catalog modes."""
    if int(n) != n or n < 0:
        raise DomainError("boson number must be a non-negative integer")
    n = int(n)
    M = len(catalog)
    dim = math.comb(M + n - 1, n) if M > 0 else (1 if n == 0 else 0)
    if dim > dim_ceiling:
        raise CeilingError(f"sector dimension {dim} exceeds the ceiling {dim_ceiling}")
    counts = np.zeros((dim, M), dtype=np.int64)
    for row, combo in enumerate(combinations_with_replacement(range(M), n)):
        for mode in combo:
            counts[row, mode] += 1
    counts.setflags(write=False)
    h0 = counts @ catalog.omega if M else np.zeros(dim)
    h0.setflags(write=False)
    index = {counts[i].tobytes(): i for i in range(dim)}
    return SectorBasis(catalog=catalog, n=n, counts=counts, h0=h0, _index=index)


def h0_energy(occ: Occupation | np.ndarray, omega: np.ndarray | None = None) -> float:
    """Free energy ``sum_sigma n_sigma omega_sigma``."""
    if isinstance(occ, Occupation):
        return occ.h0
    return float(np.dot(occ, omega))


def lower_element(counts, mode: int):
    """Apply ``a_mode``: returns ``(sqrt(n_mode), counts - e_mode)``.

    When the mode is empty the amplitude is 0 and the returned counts are None.
    """
    counts = np.array(counts, dtype=np.int64)
    k = counts[mode]
    if k == 0:
        return 0.0, None
    counts[mode] -= 1
    return math.sqrt(k), counts


def raise_element(counts, mode: int):
    """Apply ``a_mode^dagger``: returns ``(sqrt(n_mode + 1), counts + e_mode)``."""
    counts = np.array(counts, dtype=np.int64)
    counts[mode] += 1
    return math.sqrt(counts[mode]), counts


def raising_map(lower: SectorBasis, upper: SectorBasis):
    """Targets and amplitudes of ``a_sigma^dagger`` from ``lower`` into ``upper``.

    Returns
    -------
    target : (lower.dim, M) int array
        Row in ``upper`` reached by adding one boson to mode ``sigma``.
    amp : (lower.dim, M) float array
        ``sqrt(n_sigma + 1)``.
    """
    if upper.n != lower.n + 1:
        raise DomainError("upper sector must carry exactly one more boson")
    M = lower.n_modes
    dim = lower.dim
    plus = np.repeat(lower.counts, M, axis=0)
    plus[np.arange(dim * M), np.tile(np.arange(M), dim)] += 1
    target = upper.lookup(plus).reshape(dim, M)
    amp = np.sqrt(lower.counts + 1.0)
    return target, amp


def coupling_matrix(params: ModelParams, lower: SectorBasis, upper: SectorBasis) -> sparse.csr_matrix:
    """Matrix of ``lam phi^(+)(x)`` mapping the ``n+1`` sector onto the ``n`` sector.

    Entry ``(i, j)`` is ``lam f_sigma sqrt(occupancy) / sqrt(2 omega_sigma)`` when
    upper state ``j`` is lower state ``i`` plus one boson in ``sigma``.
    """
    target, amp = raising_map(lower, upper)
    c = params.coupling
    rows = np.repeat(np.arange(lower.dim), lower.n_modes)
    vals = (amp * c[None, :]).ravel()
    return sparse.csr_matrix((vals, (rows, target.ravel())), shape=(lower.dim, upper.dim))
