"""Square-lattice specializations.

Two routes live here: the full column-correlation nonlinear system in the
(alpha1, alpha2) parametrization, and the diagonal-correlation pair (f_n, g_n)
with its one-parameter weight alpha = 1/k.  On top of those sit three
diagnostics: the convergence of the triangular engine onto the diagonal
system as k3 -> 0, the Painleve-VI sigma-form residual of the determinant
route, and the small-t boundary-series coefficient.

Convention note for the sigma form: with t = k^{-2} on both sides of the
transition, the residual vanishes for sigma = t(t-1) dlog I/dt - t/4; this is
the same function as the -1/4 subtraction written in the reciprocal variable
k^2.  The subtraction is exposed as a parameter, with the verified pairing as
the default.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from mpmath import fabs, factorial, log, mp, mpf, rf, sqrt

from .errors import (GuardSZero, IterationAborted, MissingMoments,
                     NonFiniteInput, RegimeRefusal, StencilCrossesCritical,
                     ZeroF)
from .lattice import Couplings, derive
from .moments import MomentTable, moment_window
from .precision import DEFAULT_PRECISION, to_mpf, workdps
from .toeplitz import CorrelationSeries, Method, determinant_series
from .weights import SquareDiagonalWeight, TriangularWeight
from . import garnier as _garnier


# ---------------------------------------------------------------------------
# column correlations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnParams:
    """Weight parameters of the column correlation with the modulus k.

    The admissible orderings are 0 < a1 <= a2 <= 1 <= 1/a2 <= 1/a1 below the
    transition (k > 1) and 0 < a1 <= 1/a2 <= 1 <= a2 <= 1/a1 above it.
    """

    alpha1: mpf
    alpha2: mpf
    k: mpf

    @classmethod
    def from_alphas(cls, alpha1, alpha2, prec: int = DEFAULT_PRECISION) -> "ColumnParams":
        with workdps(prec):
            a1, a2 = to_mpf(alpha1), to_mpf(alpha2)
            if not 0 < a1:
                raise NonFiniteInput("alpha1 must be positive")
            if a2 <= a1:
                raise NonFiniteInput("need alpha1 < alpha2")
            k = (1 - a1 * a2) / (a2 - a1)
            if k <= 0:
                raise NonFiniteInput("parameters give a non-positive modulus")
            ok_low = a1 <= a2 <= 1
            ok_high = a1 <= 1 / a2 <= 1 <= a2
            if not (ok_low or ok_high):
                raise NonFiniteInput("alphas violate the ordering inequalities")
            return cls(alpha1=a1, alpha2=a2, k=k)

    @classmethod
    def from_couplings(cls, k1, k2, prec: int = DEFAULT_PRECISION) -> "ColumnParams":
        with workdps(prec):
            c = Couplings(k1, k2, 0)
            z1, z2, _ = c.z(prec)
            v1, _, _ = c.v(prec)
            if z2 == 0:
                raise NonFiniteInput("K2 = 0 leaves the column direction uncoupled")
            return cls.from_alphas(z2 * v1, v1 / z2, prec)

    @property
    def singular_points(self) -> Tuple[mpf, mpf, mpf, mpf]:
        a1, a2 = self.alpha1, self.alpha2
        return (1 / a1, a2, 1 / a2, a1)


@dataclass(frozen=True)
class ColumnState:
    n: int
    f: Tuple[mpf, mpf, mpf]
    g: Tuple[mpf, mpf, mpf]


@dataclass(frozen=True)
class ColumnRun:
    states: List[ColumnState]
    recovery: List[_garnier.RecoveryState]
    series: CorrelationSeries


def _col_combos(a1, a2, f):
    """The four f-linear combinations driving the column system.

    T0 and T3 are the two combinations assumed nonzero; T1 and T2 carry the
    next symmetric-function layer.
    """
    f1, f2, f3 = f
    T0_terms = ((1 - a1**2), -(1 - a1**2) * a2**2 * f2,
                -(1 - a2**2) * f1, (1 - a2**2) * a1**2 * f3)
    T3_terms = (a1 * (1 - a1**2), -a1 * (1 - a1**2) * a2**4 * f2,
                -a2 * (1 - a2**2) * f1, a2 * (1 - a2**2) * a1**4 * f3)
    T1_terms = ((1 - a1**2) * (a1 + a2 * (1 + a1**2)),
                -(1 - a1**2) * (1 + a1 * (a1 + a2)) * a2**3 * f2,
                -(1 - a2**2) * (a2 + a1 * (1 + a2**2)) * f1,
                (1 - a2**2) * (1 + a2 * (a1 + a2)) * a1**3 * f3)
    T2_terms = ((1 - a1**2) * (1 + a1 * (a1 + a2)),
                -(1 - a1**2) * (a1 + a2 * (1 + a1**2)) * a2**3 * f2,
                -(1 - a2**2) * (1 + a2 * (a1 + a2)) * f1,
                (1 - a2**2) * (a2 + a1 * (1 + a2**2)) * a1**3 * f3)
    T = tuple(sum(ts) for ts in (T0_terms, T1_terms, T2_terms, T3_terms))
    scale = max(max(fabs(x) for x in ts)
                for ts in (T0_terms, T1_terms, T2_terms, T3_terms))
    return T, scale


def _col_init(a1, a2, t: MomentTable):
    f1 = (a1 / a2) * ((4*a1**2*a2*t[-2]
                       - a1*(a2*(1 + a1**2) + a1*(3 + a2**2))*t[-1]
                       - (a2*(1 - a1**2) - a1*(1 - a2**2))*t[0]
                       + 2*a1*a2*t[1])
                      / (4*a1*a2**2*t[-2]
                         - a2*(a2*(1 + 3*a1**2) + a1*(3 - a2**2))*t[-1]
                         + (a1*(1 - a2**2) - a2*(1 - a1**2))*t[0]
                         + 2*a1*a2*t[1]))
    den23 = (4*a1*a2**2*t[-2] - a2*(3*a1 + a2 + a1*a2*(3*a1 - a2))*t[-1]
             + (a1 - a2)*(1 + a1*a2)*t[0] + 2*a1*a2*t[1])
    f2 = (1 / a2**3) * ((4*a1*a2*t[-2] - (a1 + a2 + a1*a2*(3*a1 + a2))*t[-1]
                         + a2*(a1 - a2)*(1 + a1*a2)*t[0] + 2*a1*a2**2*t[1])
                        / den23)
    f3 = (1 / (a1**2 * a2)) * ((4*a2*a1*t[-2]
                                - (3*a1 - a2 + a1*a2*(3*a1 + a2))*t[-1]
                                + a1*(a1 - a2)*(1 + a1*a2)*t[0]
                                + 2*a1**2*a2*t[1]) / den23)
    g1 = -((a1*(1 - a2**2) - a2*(1 - a1**2))*t[0] + 2*a1*a2*t[1]) / (2*a1*a2*t[0])
    g2 = ((2*(a1**2 - a2**2)*t[-1]*t[0] + (a1 + 3*a2)*(1 + a1*a2)*t[-1]*t[1]
           - 4*a1*a2*t[-1]*t[2] + (a1 - a2)*(1 + a1*a2)*t[0]**2
           + 2*a1*a2*t[0]*t[1]) / (2*a1*a2*t[-1]*t[0]))
    g3 = ((4*a1*a2*t[-2]*t[0] - 2*a1*a2*t[-1]**2
           - (a1*(3 + a2**2) + a2*(1 + 3*a1**2))*t[0]*t[-1])
          / (2*a1*a2*t[-1]*t[0]))
    return (f1, f2, f3), (g1, g2, g3)


def _col_step_f(a1, a2, n, f, g, tol):
    g1, g2, g3 = g
    half = mpf(1) / 2
    B4 = a2*g1 + a2**2*g2 + a2**3*g3 + a2**4 - n
    B4b = (a2*g1 + a2**2*g2 + a2**3*g3 - n + half + a2**4/2
           - a2/(2*a1)*(1 + a1**2)*(1 - a2**2))
    scale = max(fabs(g1) + fabs(g2) + fabs(g3), mpf(n), mpf(1))
    if fabs(B4) <= tol * scale or fabs(B4b) <= tol * scale:
        raise GuardSZero(f"column denominator bracket vanished at n={n}")
    num1 = ((a1*g1 + a1**2*g2 + a1**3*g3 + a1**4 - n)
            * (a1*g1 + a1**2*g2 + a1**3*g3 - n - half + 3*a1**4/2
               + a1/(2*a2)*(1 - a1**2)*(1 + a2**2)))
    num2 = ((a2**3*g1 + a2**2*g2 + a2*g3 - n*a2**4 + 1)
            * (a2**3*g1 + a2**2*g2 + a2*g3 - (n + half)*a2**4 + mpf(3)/2
               - a2/(2*a1)*(1 + a1**2)*(1 - a2**2)))
    num3 = ((a1**3*g1 + a1**2*g2 + a1*g3 - n*a1**4 + 1)
            * (a1**3*g1 + a1**2*g2 + a1*g3 - (n - half)*a1**4 + half
               + a1/(2*a2)*(1 - a1**2)*(1 + a2**2)))
    den = B4 * B4b
    for j, fj in enumerate(f):
        if fj == 0:
            raise ZeroF(f"column f{j + 1} = 0 at n={n}")
    return (num1 / den / ((a1 / a2) * f[0]),
            num2 / den / (a2**6 * f[1]),
            num3 / den / ((a1**7 / a2) * f[2]))


def _col_step_g(a1, a2, n, f_next, g, tol):
    nn = n + 1
    (T0, T1, T2, T3), scale = _col_combos(a1, a2, f_next)
    if fabs(T0) <= tol * scale or fabs(T3) <= tol * scale:
        raise GuardSZero(f"column combination vanished at step {nn}")
    g1 = (-g[0] + (1 + a1*a2)/(2*a1*a2)*((2*nn - 3)*a1 + (2*nn - 1)*a2)
          - (nn + 1)/(a1*a2) * T3/T0 + nn * T2/T3)
    g2 = (-g[1] - (a2**2 - a1**2)/(a1*a2)
          - (nn - 1)/(a1*a2)*(a1**2 + a2**2 + (1 + a1*a2)**2)
          - nn * T1/T3 + (nn + 1)/(a1*a2) * T2/T0)
    g3 = (-g[2] + (1 + a1*a2)/(2*a1*a2)*((2*nn - 3)*a1 + (2*nn - 1)*a2)
          + a1*a2*nn * T0/T3 - (nn + 1)/(a1*a2) * T1/T0)
    return g1, g2, g3


def column_iterate(t: MomentTable, p: ColumnParams, nmax: int,
                   tol_guard: Optional[mpf] = None) -> ColumnRun:
    """Nonlinear column iteration with correlation recovery alongside."""
    try:
        t.require_window(-2, 2)
    except Exception as exc:
        raise MissingMoments("column initialisation needs w_-2..w_2") from exc
    prec = t.precision
    tol = tol_guard if tol_guard is not None else _garnier.default_tol_guard(prec)
    with workdps(prec + 10):
        a1, a2 = p.alpha1, p.alpha2
        f, g = _col_init(a1, a2, t)
        states = [ColumnState(n=0, f=f, g=g)]
        r: Dict[int, mpf] = {0: mpf(1)}
        rbar: Dict[int, mpf] = {0: mpf(1)}
        rbar_alt: Dict[int, mpf] = {0: mpf(1)}
        lam: Dict[int, mpf] = {0: mpf(0)}
        lamb: Dict[int, mpf] = {0: mpf(0)}
        I: Dict[int, mpf] = {0: mpf(1), 1: t[0]}
        for n in range(0, nmax + 1):
            try:
                (T0, T1, T2, T3), scale = _col_combos(a1, a2, f)
                if fabs(T0) <= tol * scale:
                    raise GuardSZero(f"column T0 vanished at n={n}")
                if n >= 1:
                    if fabs(T3) <= tol * scale:
                        raise GuardSZero(f"column T3 vanished at n={n}")
                    r[n + 1] = r[n] * (a1 * a2 * n / (n + 1)) * T0 / T3
                lam[n + 1] = (n * lam[n] + g[2]
                              - (a1 + a2) * (1 + a1*a2) / (a1*a2) * n
                              + (n + 1) / (a1*a2) * T1 / T0) / (n + 1)
                lamb[n + 1] = (n * lamb[n] + g[0]
                               - (1 + a1*a2)/(2*a1*a2)*((2*n - 1)*a1 + (2*n + 1)*a2)
                               + (n + 1) / (a1*a2) * T3 / T0) / (n + 1)
                if n == 0:
                    r[1] = lam[1]
                rbar[n] = (lam[n + 1] - lam[n]) / r[n + 1]
                rbar_alt[n + 1] = (lamb[n + 1] - lamb[n]) / r[n]
                if n >= 1:
                    I[n + 1] = (1 - r[n] * rbar[n]) * I[n]**2 / I[n - 1]
                if n < nmax:
                    f_next = _col_step_f(a1, a2, n, f, g, tol)
                    g_next = _col_step_g(a1, a2, n, f_next, g, tol)
                    f, g = f_next, g_next
                    states.append(ColumnState(n=n + 1, f=f, g=g))
            except (GuardSZero, ZeroF, ZeroDivisionError) as exc:
                raise IterationAborted(f"column step {n}: {exc}", step=n,
                                       snapshot={"n": n, "f": f, "g": g}) from exc
        recovery = [_garnier.RecoveryState(n=n, r=r[n], rbar=rbar[n],
                                           lam=lam[n], lambar=lamb[n], I=I[n],
                                           rbar_alt=rbar_alt.get(n))
                    for n in range(0, nmax + 1)]
        series = CorrelationSeries(values=[+I[n] for n in range(0, nmax + 1)],
                                   method=Method.COLUMN_RECOVERY, precision=prec,
                                   meta={"kind": "square-column",
                                         "alpha1": str(a1), "alpha2": str(a2)})
        return ColumnRun(states=states, recovery=recovery, series=series)


def column_system(t: MomentTable, p: ColumnParams, nmax: int) -> CorrelationSeries:
    return column_iterate(t, p, nmax).series


# ---------------------------------------------------------------------------
# square-lattice diagonal (one-parameter) system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DPVState:
    n: int
    f: mpf
    g: mpf
    alpha: mpf


@dataclass(frozen=True)
class DPVRun:
    states: List[DPVState]
    recovery: List[_garnier.RecoveryState]
    series: CorrelationSeries


def dpv_iterate(t: MomentTable, alpha, nmax: int,
                tol_guard: Optional[mpf] = None) -> DPVRun:
    """Iterate the diagonal pair (f_n, g_n) and recover the correlations."""
    try:
        t.require_window(-1, 0)
    except Exception as exc:
        raise MissingMoments("diagonal initialisation needs w_-1, w_0") from exc
    prec = t.precision
    tol = tol_guard if tol_guard is not None else _garnier.default_tol_guard(prec)
    with workdps(prec + 10):
        a = to_mpf(alpha)
        if a == 0:
            raise RegimeRefusal("alpha = 0 is the frozen-spin limit; all "
                                "correlations are 1 and the pair is degenerate")
        if a == 1:
            raise RegimeRefusal("alpha = 1 is critical")
        half = mpf(1) / 2
        if t[0] == 0 or t[-1] == 0 or (a * t[-1] + t[0]) == 0:
            raise IterationAborted("degenerate initial moments", step=0)
        f = a * (t[-1] + a * t[0]) / (a * t[-1] + t[0])
        g = (t[-1] / t[0] - t[0] / t[-1]) / 2
        states = [DPVState(n=0, f=f, g=g, alpha=a)]
        r: Dict[int, mpf] = {0: mpf(1)}
        rbar: Dict[int, mpf] = {0: mpf(1)}
        lam: Dict[int, mpf] = {0: mpf(0)}
        I: Dict[int, mpf] = {0: mpf(1), 1: t[0]}
        for n in range(0, nmax + 1):
            try:
                if fabs(1 - f) <= tol * max(1, fabs(f)):
                    raise ZeroF(f"f_n = 1 pole in the reflection ratio at n={n}")
                r[n + 1] = r[n] * (a - f / a) / (1 - f)
                lam[n + 1] = ((n - half) * lam[n] - n * (a + 1/a) - g
                              + (n + half) * (1 - f) / (a - f/a)) / (n + half)
                rbar[n] = (lam[n + 1] - lam[n]) / r[n + 1]
                if n >= 1:
                    I[n + 1] = (1 - r[n] * rbar[n]) * I[n]**2 / I[n - 1]
                if n < nmax:
                    guard1 = g + n / a
                    guard2 = g + (n + half) / a - a / 2
                    gscale = max(fabs(g), mpf(n), fabs(a), 1 / fabs(a))
                    if fabs(guard1) <= tol * gscale or fabs(guard2) <= tol * gscale:
                        raise GuardSZero(f"diagonal-pair denominator vanished at n={n}")
                    num = (g + (n + 1) * a - 1/a) * (g + (n + half) * a - 1/(2*a))
                    f_next = a**2 * num / (guard1 * guard2) / f
                    if fabs(1 - f_next) <= tol * max(1, fabs(f_next)) or \
                       fabs(a**2 - f_next) <= tol * max(a**2, fabs(f_next)):
                        raise ZeroF(f"f pole in the additive relation at n={n + 1}")
                    g_next = (-g - 2 * (n + 1) / a + (a + 1/a) / 2
                              - (n + mpf(3)/2) * (a**2 - 1) / a / (1 - f_next)
                              - (n + mpf(3)/2) * a * (a**2 - 1) / (a**2 - f_next))
                    f, g = f_next, g_next
                    states.append(DPVState(n=n + 1, f=f, g=g, alpha=a))
            except (GuardSZero, ZeroF, ZeroDivisionError) as exc:
                raise IterationAborted(f"diagonal step {n}: {exc}", step=n,
                                       snapshot={"n": n, "f": f, "g": g}) from exc
        recovery = [_garnier.RecoveryState(n=n, r=r[n], rbar=rbar[n],
                                           lam=lam[n], lambar=mpf(0), I=I[n])
                    for n in range(0, nmax + 1)]
        series = CorrelationSeries(values=[+I[n] for n in range(0, nmax + 1)],
                                   method=Method.DPV_RECOVERY, precision=prec,
                                   meta={"kind": "square-diagonal", "alpha": str(a)})
        return DPVRun(states=states, recovery=recovery, series=series)


def dpv_system(t: MomentTable, alpha, nmax: int) -> CorrelationSeries:
    return dpv_iterate(t, alpha, nmax).series


# ---------------------------------------------------------------------------
# triangular -> diagonal limit diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitReport:
    k3: mpf
    alpha: mpf
    residuals: List[mpf]            # |I_n^tri - I_n^diag| for n = 0..nmax
    state_residuals: Dict[str, mpf]  # scaled-variable mismatches at a probe step
    zeta_residuals: Tuple[mpf, mpf]  # |zeta2 - alpha|, |zeta3 - 1/alpha|

    @property
    def max_residual(self) -> mpf:
        return max(self.residuals)


def triangular_limit_check(c: Couplings, nmax: int,
                           prec: int = DEFAULT_PRECISION,
                           probe_step: int = 3) -> LimitReport:
    """Compare the triangular engine at small k3 against the diagonal system.

    The couplings must have small nonzero k3; the diagonal reference runs at
    the same (k1, k2) with k3 = 0.  Also reports the scaled-variable map at
    one probe step (f2 against alpha^{-4} f, g's against their leading
    orders) and the singularity limits.
    """
    with workdps(prec):
        k1, k2, k3 = c.values(prec)
        if k3 == 0:
            raise NonFiniteInput("limit check needs k3 != 0")
        dia = SquareDiagonalWeight.from_couplings(k1, k2, prec)
        a = dia.alpha
        d = derive(c, prec=prec)
        # extra digits: the triangular iteration mixes scales ~ zeta1^4
        tri_w = TriangularWeight.from_couplings(c, prec)
        lo, hi = -(nmax + 4), nmax + 4
        ttab = moment_window(tri_w, lo, hi, prec)
        dtab = moment_window(dia, lo, hi, prec)
        run_t = _garnier.iterate(ttab, d, nmax)
        run_d = dpv_iterate(dtab, a, nmax)
        residuals = [fabs(run_t.series[n] - run_d.series[n])
                     for n in range(nmax + 1)]
        v3 = d.v[2]
        eps2 = (v3 - 1)**2
        ns = min(probe_step, nmax)
        st_t = run_t.states[ns]
        st_d = run_d.states[ns]
        state_res = {
            "f2_scaled": fabs(st_t.f2 - st_d.f / a**4),
            "g2_scaled": fabs(st_t.g2 * eps2 - 4 * st_d.g / a),
            "g1_leading": fabs(st_t.g1 * eps2 - (4 * ns + 2) / a),
            "g3_leading": fabs(st_t.g3 * eps2 + 2 / a),
        }
        zeta_res = (fabs(d.zeta[1] - a), fabs(d.zeta[2] - 1 / a))
        return LimitReport(k3=k3, alpha=a, residuals=residuals,
                           state_residuals=state_res, zeta_residuals=zeta_res)


def limit_order_fit(k1, k2, k3_values: Sequence, nmax: int,
                    prec: int = DEFAULT_PRECISION) -> Tuple[mpf, List[LimitReport]]:
    """Log-log slope of the limit residual against k3 (expected ~ 1)."""
    reports = []
    for k3 in k3_values:
        # steep scale mixing near the limit: grow the working precision with 1/k3
        with workdps(prec):
            extra = int(8 * fabs(log(to_mpf(k3), 10))) + 20
        reports.append(triangular_limit_check(
            Couplings(k1, k2, k3), nmax, prec + extra))
    with workdps(prec):
        xs = [log(fabs(to_mpf(r.k3))) for r in reports]
        ys = [log(r.max_residual) for r in reports]
        # least-squares slope
        nn = len(xs)
        xbar = sum(xs) / nn
        ybar = sum(ys) / nn
        slope = (sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
                 / sum((x - xbar)**2 for x in xs))
    return slope, reports


# ---------------------------------------------------------------------------
# sigma-form residual of the determinant route
# ---------------------------------------------------------------------------

# order-4+ central-difference weights on the 7-point stencil, as exact ratios
_W7_D1 = ((-1, 60), (3, 20), (-3, 4), (0, 1), (3, 4), (-3, 20), (1, 60))
_W7_D2 = ((1, 90), (-3, 20), (3, 2), (-49, 18), (3, 2), (-3, 20), (1, 90))
_W7_D3 = ((1, 8), (-1, 1), (13, 8), (0, 1), (-13, 8), (1, 1), (-1, 8))


def _fd_weights(table):
    return [mpf(p) / q for p, q in table]


@dataclass(frozen=True)
class SigmaReport:
    t: mpf
    h: mpf
    subtraction: str               # "t/4" or "1/4"
    residuals: List[mpf]           # |equation residual| per N = 0..nmax
    halving_shift: Optional[mpf]   # max |res(h) - res(h/2)| when calibrated


def _diag_correlation_at(t_val, nmax: int, prec: int) -> List[mpf]:
    w = SquareDiagonalWeight.from_alpha(sqrt(t_val), prec)
    lo = -(nmax + 1)
    tab = moment_window(w, lo, -lo, prec)
    return determinant_series(tab, nmax, prec).values


def sigma_residual_at_t(t, nmax: int, h=None, prec: int = DEFAULT_PRECISION,
                        subtraction: str = "auto",
                        calibrate: bool = True) -> SigmaReport:
    """Residual of the second-order second-degree sigma equation per N.

    Derivatives of log I_N(t) come from 7-point central differences evaluated
    at doubled working precision, so truncation (h^4) dominates rounding; the
    optional calibration repeats the evaluation at h/2 and reports the shift.
    """
    inner = 2 * prec + 20
    with workdps(inner):
        t_val = to_mpf(t)
        if t_val <= 0:
            raise NonFiniteInput("t must be positive")
        if h is None:
            h_val = mpf(10) ** (-max(6, prec // 7))
        else:
            h_val = to_mpf(h)
        if (t_val - 3*h_val - 1) * (t_val + 3*h_val - 1) <= 0:
            raise StencilCrossesCritical(
                f"stencil [{t_val - 3*h_val}, {t_val + 3*h_val}] straddles t = 1")
        if subtraction == "auto":
            sub = "t/4"
        elif subtraction in ("t/4", "1/4"):
            sub = subtraction
        else:
            raise NonFiniteInput(f"unknown subtraction {subtraction!r}")

        wd1, wd2, wd3 = (_fd_weights(t) for t in (_W7_D1, _W7_D2, _W7_D3))

        def residuals_for(hh):
            stencil = [_diag_correlation_at(t_val + j * hh, nmax, inner)
                       for j in range(-3, 4)]
            out = []
            for N in range(nmax + 1):
                L = [log(stencil[j][N]) for j in range(7)]
                L1 = sum(w * x for w, x in zip(wd1, L)) / hh
                L2 = sum(w * x for w, x in zip(wd2, L)) / hh**2
                L3 = sum(w * x for w, x in zip(wd3, L)) / hh**3
                u = t_val * (t_val - 1) * L1
                u1 = (2*t_val - 1) * L1 + t_val*(t_val - 1) * L2
                u2 = 2*L1 + 2*(2*t_val - 1)*L2 + t_val*(t_val - 1)*L3
                if sub == "t/4":
                    s, s1, s2 = u - t_val/4, u1 - mpf(1)/4, u2
                else:
                    s, s1, s2 = u - mpf(1)/4, u1, u2
                lhs = (t_val * (t_val - 1) * s2)**2
                rhs = (N**2 * ((t_val - 1)*s1 - s)**2
                       - 4*s1*((t_val - 1)*s1 - s - mpf(1)/4)*(t_val*s1 - s))
                out.append(fabs(lhs - rhs))
            return out

        res = residuals_for(h_val)
        shift = None
        if calibrate:
            res_half = residuals_for(h_val / 2)
            shift = max(fabs(a - b) for a, b in zip(res, res_half))
            res = res_half
            h_val = h_val / 2
        return SigmaReport(t=t_val, h=h_val, subtraction=sub, residuals=res,
                           halving_shift=shift)


def sigma_pvi_residual(k1, k2, nmax: int, h=None,
                       prec: int = DEFAULT_PRECISION,
                       subtraction: str = "auto") -> SigmaReport:
    """Sigma-form residual for square-lattice couplings (K1, K2); t = k^{-2}."""
    with workdps(prec):
        c = Couplings(k1, k2, 0)
        z1, z2, _ = c.z(prec)
        s1 = 2 * z1 / (1 - z1**2)      # sinh 2K1
        s2 = 2 * z2 / (1 - z2**2)
        k = s1 * s2
        if k <= 0:
            raise NonFiniteInput("modulus k must be positive")
        if k == 1:
            raise RegimeRefusal("couplings sit on the critical manifold k = 1")
        t_val = 1 / k**2
    return sigma_residual_at_t(t_val, nmax, h=h, prec=prec, subtraction=subtraction)


# ---------------------------------------------------------------------------
# boundary series
# ---------------------------------------------------------------------------

def boundary_series_reference(N: int, prec: int = DEFAULT_PRECISION) -> mpf:
    """Closed-form coefficient of t^{N+1} in the small-t expansion."""
    with workdps(prec):
        half = mpf(1) / 2
        return rf(half, N) * rf(3 * half, N) / (4 * factorial(N + 1)**2)


def boundary_series_coefficient(N: int, prec: int = DEFAULT_PRECISION,
                                t_points: Tuple = ("0.002", "0.001")) -> mpf:
    """Extract the t^{N+1} coefficient of I_N(t) by small-t evaluation.

    Subtracts the (1-t)^{1/4} background and Richardson-extrapolates the
    remaining linear-in-t error between the two sample points.
    """
    with workdps(prec):
        t1, t2 = (to_mpf(x) for x in t_points)
        if not 0 < t2 < t1 < 1:
            raise NonFiniteInput("need 0 < t2 < t1 < 1")
        ests = []
        for tv in (t1, t2):
            I = _diag_correlation_at(tv, N, prec)[N]
            ests.append((I - (1 - tv) ** (mpf(1)/4)) / tv**(N + 1))
        e1, e2 = ests
        return e2 + (e2 - e1) * t2 / (t1 - t2)
