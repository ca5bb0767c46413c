"""Forward iteration of the triangular-lattice nonlinear recurrence system.

State is the six-tuple (f1, f2, f3, g1, g2, g3).  One step advances the f
variables through the multiplicative first family of relations (built from
the R auxiliaries of the current g), then the g variables through the
additive second family (built from the S auxiliaries of the new f).  The
correlations are recovered alongside through the reflection-coefficient pair
(r_n, rbar_n) and the subleading coefficients (lambda_n, lambdabar_n), with
I_{n+1} I_{n-1} / I_n^2 = 1 - r_n rbar_n and I_0 = 1, I_1 = w_0.

All arithmetic runs at the table precision plus guard digits that absorb the
dynamic range of the singularities (the auxiliaries mix powers of the
singularity moduli, which grow steep near the square-diagonal degeneration).
Guard quantities are compared against their own term-magnitude scale; a trip
is an error, not a regularisation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from mpmath import fabs, log10, mp, mpf

from .errors import (GuardBracketZero, GuardSZero, InitDenominatorZero,
                     IterationAborted, MissingMoments, RegimeRefusal, ZeroF)
from .lattice import LatticeData
from .moments import MomentTable
from .precision import GUARD_DIGITS
from .toeplitz import CorrelationSeries, Method


@dataclass(frozen=True)
class GarnierState:
    n: int
    f1: mpf
    f2: mpf
    f3: mpf
    g1: mpf
    g2: mpf
    g3: mpf

    @property
    def f(self) -> Tuple[mpf, mpf, mpf]:
        return (self.f1, self.f2, self.f3)

    @property
    def g(self) -> Tuple[mpf, mpf, mpf]:
        return (self.g1, self.g2, self.g3)


@dataclass(frozen=True)
class AuxRS:
    R1: mpf
    R2: mpf
    R3: mpf
    R4: mpf
    S1: mpf
    S2: mpf
    S3: mpf
    S4: mpf
    S_scale: mpf

    @property
    def R(self):
        return (self.R1, self.R2, self.R3, self.R4)

    @property
    def S(self):
        return (self.S1, self.S2, self.S3, self.S4)


@dataclass(frozen=True)
class RecoveryState:
    n: int
    r: mpf
    rbar: mpf
    lam: mpf
    lambar: mpf
    I: mpf
    rbar_alt: Optional[mpf] = None     # second route to rbar, kept for checks


def default_tol_guard(prec: int) -> mpf:
    return mpf(10) ** (-(prec // 2))


def scale_guard_digits(d: LatticeData) -> int:
    """Extra digits absorbing the singularity dynamic range during iteration."""
    lz = max(fabs(log10(fabs(z))) for z in d.zeta)
    return int(8 * lz) + 4


def _workdps(d: LatticeData):
    return mp.workdps(d.precision + GUARD_DIGITS + scale_guard_digits(d))


def _bases(d: LatticeData):
    """Singularity values seen by the R auxiliaries, in R1..R4 order."""
    return (d.zeta[3], d.zeta[2], d.zeta[0], d.zeta[1])


def aux_rs(s: GarnierState, d: LatticeData) -> AuxRS:
    """The four R and four S auxiliaries of a state; pure and branch-free."""
    with _workdps(d):
        g1, g2, g3 = s.g
        R = []
        for base in _bases(d):
            R.append(base * g1 + base**2 * g2 + base**3 * g3 + base**4)
        S, scale = _aux_s(s.f, d)
        return AuxRS(R1=R[0], R2=R[1], R3=R[2], R4=R[3],
                     S1=S[0], S2=S[1], S3=S[2], S4=S[3], S_scale=scale)


def _aux_s(f, d: LatticeData):
    """S1..S4 plus a magnitude scale built from the same terms in absolute value."""
    v1, v2, v3 = d.v
    G, D = d.gamma, d.delta
    pp = 2 * G * v3 + D * (1 + v3**2)
    pm = 2 * G * v3 - D * (1 + v3**2)
    q = (1 - v3)**2 / (1 + v3)**2
    f1, f2, f3 = f
    c1 = G * (3 * v3**2 - 2 * v3 + 3)
    c2 = G * (3 * v3**2 + 2 * v3 + 3)
    s1_terms = (pp * q * (G + D), -pp * (G - D) * f2,
                pm * (G + D) * f1, -pm * q * (G - D) * f3)
    s2_terms = (pp * q**2 * (G + D)**2, -pp * (G - D)**2 * f2,
                pm * (G + D)**2 * f1, -pm * q**2 * (G - D)**2 * f3)
    s3_terms = (pp * q * (c1 + D * (1 + v3)**2) * (G + D),
                -pp * (c2 - D * (1 - v3)**2) * (G - D) * f2,
                pm * (c2 + D * (1 - v3)**2) * (G + D) * f1,
                -pm * q * (c1 - D * (1 + v3)**2) * (G - D) * f3)
    s4_terms = (pp * q**2 * (c2 - D * (1 - v3)**2) * (G + D)**2,
                -pp * (c1 + D * (1 + v3)**2) * (G - D)**2 * f2,
                pm * (c1 - D * (1 + v3)**2) * (G + D)**2 * f1,
                -pm * q**2 * (c2 + D * (1 - v3)**2) * (G - D)**2 * f3)
    S = tuple(sum(ts) for ts in (s1_terms, s2_terms, s3_terms, s4_terms))
    scale = max(max(fabs(t) for t in ts)
                for ts in (s1_terms, s2_terms, s3_terms, s4_terms))
    return S, scale


def _first_pair_shifts(d: LatticeData):
    """Constant shifts in the second brackets of the multiplicative relations."""
    v1, v2, v3 = d.v
    G, D = d.gamma, d.delta
    A1 = (2*v3*D / (v1**2 * v2**2 * (1 + v3)**6)) \
        * (2 * (D**2 - 4*v1**2*v2**2*v3*(1 + v3)**2) / (G + D) - D)
    A2 = -(2*v3*D / (v1**2 * v2**2 * (1 + v3)**6)) \
        * (2 * (D**2 - 4*v1**2*v2**2*v3*(1 + v3)**2) / (G - D) + D)
    A3 = -(2*v3*D / (v1**2 * v2**2 * (1 - v3)**6)) \
        * (2 * (D**2 + 4*v1**2*v2**2*v3*(1 - v3)**2) / (G - D) + D)
    A4 = (2*v3*D / (v1**2 * v2**2 * (1 - v3)**6)) \
        * (2 * (D**2 + 4*v1**2*v2**2*v3*(1 - v3)**2) / (G + D) - D)
    return A1, A2, A3, A4


def init_state(t: MomentTable, d: LatticeData) -> GarnierState:
    """State at n = 0 from the five moments w_{-2}..w_2."""
    try:
        t.require_window(-2, 2)
    except Exception as exc:
        raise MissingMoments("initialisation needs w_-2..w_2") from exc
    with _workdps(d):
        v1, v2, v3 = d.v
        G, D = d.gamma, d.delta
        q = (1 - v3)**2 / (1 + v3)**2
        B = v1 * v2 * (1 - v3**2)**2

        def bracket(sign, pm):
            # sign selects G+D vs G-D; pm = +1 uses the (1+v3)^2 leading scale
            GD = G + sign * D
            s_lead = (1 + pm * v3)**2
            s_other = (1 - pm * v3)**2
            return (GD / (v1 * v2 * s_lead) * t[-2]
                    + GD / (4 * v1**2 * v2**2 * s_lead**2)
                    * (GD - 4 * (1 - v3 + v3**2) / s_other * G) * t[-1]
                    - 2 * v3 * G / B * t[0] + t[1])

        den = bracket(-1, -1)
        tol = default_tol_guard(d.precision)
        scale = max(fabs(t[n]) for n in range(-2, 2)) * max(1, fabs(G) + fabs(D))
        if fabs(den) <= tol * scale:
            raise InitDenominatorZero("common denominator of the f initial values")
        if t[0] == 0 or t[-1] == 0:
            raise InitDenominatorZero("w_0 or w_-1 vanishes in the g initial values")
        f1 = q * bracket(-1, +1) / den
        f2 = q * (G + D) / (G - D) * bracket(+1, +1) / den
        f3 = (G + D) / (G - D) * bracket(+1, -1) / den
        g1 = 2 * v3 * G / B - t[1] / t[0]
        g2 = (-8 * v3 * (1 + v3**2) / (1 - v3**2)**2
              - 2 * v3 * G / B * t[0] / t[-1]
              + 2 * (1 + v3 + v3**2) * G / B * t[1] / t[0]
              + t[1] / t[-1] - 2 * t[2] / t[0])
        g3 = 2 * t[-2] / t[-1] - t[-1] / t[0] - 2 * (1 - v3 + v3**2) * G / B
        return GarnierState(n=0, f1=f1, f2=f2, f3=f3, g1=g1, g2=g2, g3=g3)


def step_f(s: GarnierState, d: LatticeData,
           tol_guard: Optional[mpf] = None) -> Tuple[mpf, mpf, mpf]:
    """f at step n+1 from the state at n."""
    tol = tol_guard if tol_guard is not None else default_tol_guard(d.precision)
    with _workdps(d):
        n = s.n
        v1, v2, v3 = d.v
        G, D = d.gamma, d.delta
        q = (1 - v3)**2 / (1 + v3)**2
        aux = aux_rs(s, d)
        A1, A2, A3, A4 = _first_pair_shifts(d)
        R = aux.R
        bra_scale = max(max(fabs(x) for x in R), fabs(A4), mpf(n), mpf(1))
        den1 = R[3] - n
        den2 = R[3] - n + A4
        if fabs(den1) <= tol * bra_scale:
            raise GuardBracketZero(f"bracket [R4 - n] vanished at n={n}")
        if fabs(den2) <= tol * bra_scale:
            raise GuardBracketZero(f"shifted bracket [R4 - n + A4] vanished at n={n}")
        den = den1 * den2
        for j, fj in enumerate(s.f):
            if fj == 0:
                raise ZeroF(f"f{j + 1} = 0 at n={n}; multiplicative step undefined")
        rhs1 = (R[0] - n) * (R[0] - n + A1) / den
        rhs2 = (R[1] - n) * (R[1] - n + A2) / den
        rhs3 = (R[2] - n) * (R[2] - n + A3) / den
        return (rhs1 / (q * s.f1),
                rhs2 / (q * (G + D) / (G - D) * s.f2),
                rhs3 / ((G + D) / (G - D) * s.f3))


def step_g(f_next: Tuple[mpf, mpf, mpf], s: GarnierState, d: LatticeData,
           tol_guard: Optional[mpf] = None) -> Tuple[mpf, mpf, mpf]:
    """g at step n+1 from g at n and the already-advanced f at n+1."""
    tol = tol_guard if tol_guard is not None else default_tol_guard(d.precision)
    with _workdps(d):
        nn = s.n + 1                      # additive relations hold for nn >= 1
        v1, v2, v3 = d.v
        G = d.gamma
        q = (1 - v3)**2 / (1 + v3)**2
        S, scale = _aux_s(f_next, d)
        S1, S2, S3, S4 = S
        for name, val in (("S1", S1), ("S2", S2)):
            if fabs(val) <= tol * scale:
                raise GuardSZero(f"{name} = {val} vanished at step {nn}",
                                 which=name, magnitude=fabs(val))
        M = 2 * v1 * v2 * (1 - v3)**2
        Mbar = 2 * v1 * v2 * (1 - v3**2)**2
        e2num = ((v1**4 + 4*v1**2*v2**2 + v2**4) * v3**4
                 - 2 * (v1**2 + v2**2 - 6*v1**2*v2**2 + v1**4*v2**2
                        + v1**2*v2**4) * v3**2
                 + 1 + 4*v1**2*v2**2 + v1**4*v2**4)
        g1 = (-s.g1 + (G / M) * (2*nn - 1 + (2*nn - 3) * q)
              - (nn + 1) / M * S2 / S1 + nn / Mbar * S4 / S2)
        g2 = (-s.g2 - 8 * v3 * (1 + v3**2) / (1 - v3**2)**2
              - e2num / (v1**2 * v2**2 * (1 - v3**2)**2) * (nn - 1)
              + (nn + 1) / (4 * v1**2 * v2**2 * (1 + v3)**2 * (1 - v3)**4) * S4 / S1
              - nn / (1 + v3)**2 * S3 / S2)
        g3 = (-s.g3 + (G / M) * (2*nn - 1 + (2*nn - 3) * q)
              - (nn + 1) / Mbar * S3 / S1
              + 2 * nn * v1 * v2 * (1 - v3)**2 * S1 / S2)
        return g1, g2, g3


@dataclass(frozen=True)
class GarnierRun:
    states: List[GarnierState]
    recovery: List[RecoveryState]
    series: CorrelationSeries

    def dual_channel_residuals(self):
        """|rbar(lambda route) - rbar(lambdabar route)| per step, n >= 1."""
        out = []
        for rec in self.recovery[1:]:
            if rec.rbar_alt is not None:
                out.append(fabs(rec.rbar - rec.rbar_alt))
        return out


def iterate(t: MomentTable, d: LatticeData, nmax: int,
            tol_guard: Optional[mpf] = None) -> GarnierRun:
    """States for n = 0..nmax with the correlation recovery carried alongside.

    The r-ratio relation starts at n = 1; r_1 comes from the lambda update at
    n = 0 (where the S2 auxiliary vanishes identically, so the ratio form is
    indeterminate there).  The second rbar route is evaluated in parallel and
    kept on the recovery states for consistency checking.
    """
    if not d.regime.allows_nonlinear:
        raise RegimeRefusal(
            f"nonlinear route not licensed in regime {d.regime.value}",
            regime=d.regime)
    tol = tol_guard if tol_guard is not None else default_tol_guard(d.precision)
    with _workdps(d):
        v1, v2, v3 = d.v
        G = d.gamma
        q = (1 - v3)**2 / (1 + v3)**2
        M = 2 * v1 * v2 * (1 - v3)**2
        Mbar = 2 * v1 * v2 * (1 - v3**2)**2

        state = init_state(t, d)
        states = [state]
        r: Dict[int, mpf] = {0: mpf(1)}
        rbar: Dict[int, mpf] = {0: mpf(1)}
        rbar_alt: Dict[int, mpf] = {0: mpf(1)}
        lam: Dict[int, mpf] = {0: mpf(0)}
        lamb: Dict[int, mpf] = {0: mpf(0)}
        I: Dict[int, mpf] = {0: mpf(1), 1: t[0]}

        for n in range(0, nmax + 1):
            try:
                S, scale = _aux_s(state.f, d)
                S1, S2, S3, S4 = S
                if fabs(S1) <= tol * scale:
                    raise GuardSZero(f"S1 vanished in recovery at n={n}",
                                     which="S1", magnitude=fabs(S1))
                if n >= 1:
                    if fabs(S2) <= tol * scale:
                        raise GuardSZero(f"S2 vanished in recovery at n={n}",
                                         which="S2", magnitude=fabs(S2))
                    r[n + 1] = r[n] * (2 * n * v1 * v2 * (1 - v3)**2
                                       / (n + 1)) * S1 / S2
                lam[n + 1] = (n * lam[n]
                              - 2 * n * (1 + v3**2) * G / (v1 * v2 * (1 - v3**2)**2)
                              + state.g3 + (n + 1) / Mbar * S3 / S1) / (n + 1)
                lamb[n + 1] = (n * lamb[n] + state.g1
                               - G / M * (2*n + 1 + (2*n - 1) * q)
                               + (n + 1) / M * S2 / S1) / (n + 1)
                if n == 0:
                    r[1] = lam[1]                     # lambda_1 = r_1 rbar_0
                rbar[n] = (lam[n + 1] - lam[n]) / r[n + 1]
                rbar_alt[n + 1] = (lamb[n + 1] - lamb[n]) / r[n]
                if n >= 1:
                    I[n + 1] = (1 - r[n] * rbar[n]) * I[n]**2 / I[n - 1]
                if n < nmax:
                    f_next = step_f(state, d, tol)
                    g_next = step_g(f_next, state, d, tol)
                    state = GarnierState(n=n + 1, f1=f_next[0], f2=f_next[1],
                                         f3=f_next[2], g1=g_next[0],
                                         g2=g_next[1], g3=g_next[2])
                    states.append(state)
            except (GuardSZero, GuardBracketZero, ZeroF, ZeroDivisionError) as exc:
                snapshot = {"n": state.n, "f": state.f, "g": state.g}
                raise IterationAborted(f"step {n}: {exc}", step=n,
                                       snapshot=snapshot) from exc

        recovery = [RecoveryState(n=n, r=r[n], rbar=rbar[n], lam=lam[n],
                                  lambar=lamb[n], I=I[n],
                                  rbar_alt=rbar_alt.get(n))
                    for n in range(0, nmax + 1)]
        series = CorrelationSeries(
            values=[+I[n] for n in range(0, nmax + 1)],
            method=Method.GARNIER_RECOVERY, precision=d.precision,
            meta={"kind": "triangular"})
        return GarnierRun(states=states, recovery=recovery, series=series)


def garnier_series(t: MomentTable, d: LatticeData, nmax: int) -> CorrelationSeries:
    return iterate(t, d, nmax).series
