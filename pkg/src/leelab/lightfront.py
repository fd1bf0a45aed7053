"""Continuum light-front estimates evaluated by quadrature.

The flat light-front model has dispersion ``omega(p, p_perp) = (m^2 + p^2 +
p_perp^2) / (2p)`` on ``p > 0``. Two facts are used throughout:

* the single-boson measure ``dp dp_perp / (4 pi^2 2p)`` pushed forward to
  ``w = omega`` is exactly ``dw / (4 pi)`` on ``w >= m``;
* ``int dk / (2 pi) 1 / (k^2 + a^2) = 1 / (2a)``, which fixes the constant of
  the kinetic term after the transverse integral:

      K1(E) = lam^2 / (4 pi) int_0^inf dp [1/sqrt(p^2 + m^2 - 2 p mu_P)
                                          - 1/sqrt(p^2 + m^2 + 2 p (h0 - E))].

``H0`` enters only through real stand-in values ``h0``; no Fock space is built.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

__all__ = [
    "LightFrontParams",
    "QuadratureResult",
    "UNormBound",
    "BetaDecay",
    "ChainCheck",
    "omega_lf",
    "k1",
    "k1_chain_bound",
    "derive_c0",
    "k1_log_bound",
    "u_norm_bound",
    "lightfront_lower_bound",
    "beta_printed",
    "beta_g_norm_sq",
    "beta_decay",
    "k1_chain_checks",
    "u_chain_checks",
    "lightfront_table_csv",
]

TOL_1D = 1e-10
TOL_2D = 1e-8


@dataclass(frozen=True)
class LightFrontParams:
    m: float
    mu_P: float
    lam: float
    n: int

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("boson mass must be positive")
        if not 0 < self.mu_P < self.m:
            raise DomainError("physical binding energy must satisfy 0 < mu_P < m")
        if not self.lam >= 0:
            raise DomainError("coupling must be non-negative")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError("boson number must be a non-negative integer")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abserr: float
    neval: int


def omega_lf(p, p_perp, m):
    """Light-front energy ``(m^2 + p^2 + p_perp^2) / (2p)``; minimum ``m`` at ``p = m``."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise DomainError("longitudinal momentum must be positive")
    out = (m * m + p * p + np.asarray(p_perp, dtype=float) ** 2) / (2 * p)
    return out.item() if out.ndim == 0 else out


def _quad_half_line(f, scale, tol, epsrel=1e-12):
    """``int_0^inf f(p) dp`` through ``p = scale * t / (1 - t)``."""

    def g(t):
        if t >= 1.0:
            return 0.0
        p = scale * t / (1 - t)
        return f(p) * scale / (1 - t) ** 2

    val, err, info = integrate.quad(g, 0.0, 1.0, epsabs=tol, epsrel=epsrel, limit=500, full_output=1)[:3]
    if err > max(tol, epsrel * abs(val)):
        raise ConvergenceError(f"1D quadrature error {err:.3e} above tolerance {tol:.1e}")
    return QuadratureResult(float(val), float(err), int(info["neval"]))


def _k1_integrand(p, m, mu_P, s):
    # 1/a1 - 1/a2 = (a2^2 - a1^2) / (a1 a2 (a1 + a2)), free of cancellation
    a1 = math.sqrt(p * p + m * m - 2 * p * mu_P)
    a2 = math.sqrt(p * p + m * m + 2 * p * s)
    return 2 * p * (s + mu_P) / (a1 * a2 * (a1 + a2))


def k1(params: LightFrontParams, E: float, h0: float) -> QuadratureResult:
    """Renormalized kinetic term ``K1(E)`` at the scalar stand-in ``h0``."""
    if h0 < 0:
        raise DomainError("h0 must be non-negative")
    s = h0 - E
    if not s + params.mu_P > 0:
        if s + params.mu_P == 0:
            return QuadratureResult(0.0, 0.0, 0)
        raise DomainError("need h0 - E + mu_P > 0")
    pref = params.lam**2 / (4 * math.pi)
    if pref == 0:
        return QuadratureResult(0.0, 0.0, 0)
    r = _quad_half_line(lambda p: _k1_integrand(p, params.m, params.mu_P, s), params.m, TOL_1D / pref)
    return QuadratureResult(pref * r.value, pref * r.abserr, r.neval)


def k1_chain_bound(params: LightFrontParams, X) -> np.ndarray:
    """End of the Feynman-parameter chain for ``K1``, with ``X = h0 - E + mu_P``.

    After replacing ``a1 + a2`` by ``2 a2``, parametrizing
    ``1/(A B^(1/2)) = (1/2) int_0^1 du (1-u)^(-1/2) / (uA + (1-u)B)^(3/2)``,
    dropping ``2 p mu_P`` and using ``int_0^inf p dp / (p^2 + 2cp + m^2)^(3/2)
    = 1/(m + c)``, the remaining ``u`` integral is elementary:

        L(X) = lam^2 / (4 pi) r artanh(r),   r = sqrt(X / (m + X)).
    """
    X = np.asarray(X, dtype=float)
    if np.any(X < 0):
        raise DomainError("X must be non-negative")
    r = np.sqrt(X / (params.m + X))
    return params.lam**2 / (4 * math.pi) * r * np.arctanh(r)


def derive_c0(params: LightFrontParams, X_grid=None):
    """Largest ``C0`` with ``L(X) >= C0 ln(1 + X/m)`` on a grid, and the limit value.

    The ratio ``L / ln(1 + X/m)`` decreases from ``lam^2/(4 pi)`` at small
    ``X`` to ``lam^2/(8 pi)`` as ``X -> inf``; the infimum ``lam^2/(8 pi)``
    is returned first, the grid minimum second.
    """
    if X_grid is None:
        X_grid = np.logspace(-6, 12, 400) * params.m
    X = np.asarray(X_grid, dtype=float)
    ratio = k1_chain_bound(params, X) / np.log1p(X / params.m)
    return params.lam**2 / (8 * math.pi), float(ratio.min())


def k1_log_bound(params: LightFrontParams, E: float, h0: float, C0: float | None = None) -> float:
    """``C0 ln((h0 - E + mu_P + m) / m)``."""
    if C0 is None:
        C0 = derive_c0(params)[0]
    return C0 * math.log1p((h0 - E + params.mu_P) / params.m)


@dataclass(frozen=True)
class UNormBound:
    E: float
    quadrature: QuadratureResult
    factorized: float
    closed_form: float

    @property
    def ordered(self) -> bool:
        return self.quadrature.value <= self.factorized <= self.closed_form


def u_norm_bound(params: LightFrontParams, E: float) -> UNormBound:
    """Chain for ``||U~(E)||`` with ``Delta = (n-1) m + mu_P - E``.

    ``quadrature`` is the first line, reduced to the energy variables:
    ``lam^2 n [int int_m^inf dw dv / (16 pi^2) / ((Delta+w+v)^2 (Delta+w) (Delta+v))]^(1/2)``.
    ``factorized`` is ``lam^2 n / (4 pi (Delta + m))``, obtained from
    ``(Delta+w+v)^2 >= (Delta+w)(Delta+v)``. ``closed_form`` is
    ``(lam^2/2) pi n / Delta``.
    """
    if params.n < 1:
        raise DomainError("the relative potential needs n >= 1")
    m = params.m
    delta = (params.n - 1) * m + params.mu_P - E
    if not delta > 0:
        raise DomainError("need E < (n-1) m + mu_P")
    lam2n = params.lam**2 * params.n
    closed = 0.5 * lam2n * math.pi / delta
    factorized = lam2n / (4 * math.pi * (delta + m))
    if lam2n == 0:
        return UNormBound(E, QuadratureResult(0.0, 0.0, 0), 0.0, 0.0)
    s = delta + m

    def f(tv, tw):
        # w = m + s tw/(1-tw), likewise v; Jacobians s/(1-t)^2
        if tw >= 1.0 or tv >= 1.0:
            return 0.0
        a = s / (1 - tw)  # Delta + w
        b = s / (1 - tv)  # Delta + v
        jac = s * s / ((1 - tw) ** 2 * (1 - tv) ** 2)
        return jac / ((a + b - delta) ** 2 * a * b)

    val, err = integrate.dblquad(f, 0.0, 1.0, 0.0, 1.0, epsabs=TOL_2D * 1e-2, epsrel=1e-10)
    pref = 1.0 / (16 * math.pi**2)
    inner = pref * val
    if pref * err > TOL_2D:
        raise ConvergenceError(f"2D quadrature error {pref * err:.3e} above tolerance {TOL_2D:.1e}")
    value = lam2n * math.sqrt(inner)
    # first-order propagation of the error through the square root
    abserr = lam2n * pref * err / (2 * math.sqrt(inner)) if inner > 0 else 0.0
    return UNormBound(E, QuadratureResult(value, abserr, -1), factorized, closed)


def lightfront_lower_bound(params: LightFrontParams) -> float:
    """``m (n-1) + mu_P - lam^2 pi n / 2``."""
    return params.m * (params.n - 1) + params.mu_P - params.lam**2 * math.pi * params.n / 2


def beta_printed(params: LightFrontParams, L):
    """``(nm + L)/((nm)^2 + L^2 - 4m^2) - 4m/((nm + L)^2 - 4m^2)``."""
    L = np.asarray(L, dtype=float)
    nm, m = params.n * params.m, params.m
    d1 = nm * nm + L * L - 4 * m * m
    d2 = (nm + L) ** 2 - 4 * m * m
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise DomainError("|lambda_k| too small for the closed form")
    out = (nm + L) / d1 - 4 * m / d2
    return out.item() if out.ndim == 0 else out


def beta_g_norm_sq(params: LightFrontParams, L: float) -> QuadratureResult:
    """``int_0^inf dp int dp_perp / (4 pi^2) (1/2p) / (nm + L + omega)^2``.

    The transverse integral is done exactly: with ``c = nm + L`` and
    ``A^2 = p^2 + 2cp + m^2`` one has ``c + omega = (p_perp^2 + A^2) / (2p)``
    and ``int dp_perp / (2 pi) (2p)^2 / (p_perp^2 + A^2)^2 = p^2 / A^3``,
    leaving ``(1/4 pi) int_0^inf p dp / A^3`` for adaptive quadrature.
    """
    if not L > 0:
        raise DomainError("|lambda_k| must be positive")
    m = params.m
    c = params.n * m + L

    def f(p):
        return p / (p * p + 2 * c * p + m * m) ** 1.5

    r = _quad_half_line(f, math.sqrt(m * (m + c)), tol=0.0, epsrel=1e-11)
    pref = 1.0 / (4 * math.pi)
    return QuadratureResult(pref * r.value, pref * r.abserr, r.neval)


@dataclass(frozen=True)
class BetaDecay:
    L: np.ndarray
    printed: np.ndarray
    quadrature: np.ndarray
    derived: np.ndarray

    def slope(self, which: str = "printed") -> float:
        y = getattr(self, which)
        return float(np.polyfit(np.log(self.L), np.log(y), 1)[0])


def beta_decay(params: LightFrontParams, L_grid) -> BetaDecay:
    """Printed closed form, quadrature ``||g||^2`` and ``1/(4 pi ((n+1) m + L))``."""
    L = np.asarray(L_grid, dtype=float)
    printed = np.atleast_1d(beta_printed(params, L))
    quad = np.array([beta_g_norm_sq(params, x).value for x in L])
    derived = 1.0 / (4 * math.pi * ((params.n + 1) * params.m + L))
    return BetaDecay(L, printed, quad, derived)


@dataclass(frozen=True)
class ChainCheck:
    name: str
    points: int
    holds: bool
    worst_margin: float


def _grid(m, size):
    t = (np.arange(size) + 0.5) / size
    return m * t / (1 - t), t


def k1_chain_checks(params: LightFrontParams, E: float, h0: float, size: int = 100) -> list:
    """Pointwise steps of the ``K1`` chain on a ``size x size`` ``(p, u)`` grid."""
    m, mu = params.m, params.mu_P
    s = h0 - E
    X = s + mu
    if not X > 0:
        raise DomainError("need h0 - E + mu_P > 0")
    p, _ = _grid(m, size)
    u = (np.arange(size) + 0.5) / size
    a1 = np.sqrt(p * p + m * m - 2 * p * mu)
    a2 = np.sqrt(p * p + m * m + 2 * p * s)
    exact = 1 / a1 - 1 / a2
    step1 = X * p / (a2**2 * a1)
    out = [ChainCheck("common denominator, a1 + a2 <= 2 a2", size,
                      bool(np.all(exact >= step1 * (1 - 1e-12))), float(np.min(exact - step1)))]
    P, U = np.meshgrid(p, u, indexing="ij")
    before = (1 - U) ** -0.5 * P / (2 * U * P * s + P * P + m * m - 2 * P * mu * (1 - U)) ** 1.5
    after = (1 - U) ** -0.5 * P / (2 * U * P * X + P * P + m * m) ** 1.5
    out.append(ChainCheck("drop 2 p mu_P", size * size,
                          bool(np.all(before >= after * (1 - 1e-12))), float(np.min(before - after))))
    # Feynman identity (a pointwise equality in p), checked against a 1D u-quadrature
    errs = []
    for pk in p[:: max(1, size // 10)]:
        A = pk * pk + m * m + 2 * pk * s
        B = pk * pk + m * m - 2 * pk * mu
        val = integrate.quad(lambda uu: (1 - uu) ** -0.5 / (uu * A + (1 - uu) * B) ** 1.5, 0, 1,
                             epsabs=1e-13, epsrel=1e-12)[0]
        errs.append(abs(0.5 * val - 1 / (A * math.sqrt(B))) * A * math.sqrt(B))
    out.append(ChainCheck("Feynman parametrization", len(errs), bool(max(errs) < 1e-8), -max(errs)))
    return out


def u_chain_checks(params: LightFrontParams, E: float, size: int = 100) -> list:
    """``(Delta+w+v)^2 >= (Delta+w)(Delta+v)`` on a ``size x size`` ``(w, v)`` grid."""
    delta = (params.n - 1) * params.m + params.mu_P - E
    w, _ = _grid(params.m, size)
    w = w + params.m
    W, V = np.meshgrid(w, w, indexing="ij")
    lhs = (delta + W + V) ** 2
    rhs = (delta + W) * (delta + V)
    return [ChainCheck("decouple w and v", size * size, bool(np.all(lhs >= rhs)), float(np.min(lhs - rhs)))]


def lightfront_table_csv(params: LightFrontParams, E_grid, h0: float = 0.0) -> str:
    """CSV ``E, k1, k1_lower_bound, u_quadrature, u_closed_form``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["E", "k1", "k1_lower_bound", "u_quadrature", "u_closed_form"])
    C0 = derive_c0(params)[0]
    for E in E_grid:
        E = float(E)
        kv = k1(params, E, h0).value
        lb = k1_log_bound(params, E, h0, C0)
        ub = u_norm_bound(params, E)
        wr.writerow([repr(E), repr(kv), repr(lb), repr(ub.quadrature.value), repr(ub.closed_form)])
    return buf.getvalue()
