"""Fourier coefficients of the Toeplitz symbols.

Two routes: adaptive periodic-trapezoid quadrature (node doubling until two
successive levels agree, exploiting the even integrand and reusing nodes) and
the linear homogeneous recurrence generated by the weight's spectral data.
A MomentTable records which route produced each entry.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence

from mpmath import cos, fabs, mp, mpf, pi, sin, sqrt

from .errors import (DenominatorVanishes, LeadingCoefficientZero, NoConvergence,
                     OrderDropIndex, WindowTooSmall)
from .precision import DEFAULT_PRECISION, GUARD_DIGITS, workdps
from .weights import Weight

NODE_CAP = 2 ** 20


class Source(enum.Enum):
    QUADRATURE = "quadrature"
    LINEAR_RECURRENCE = "recurrence"


@dataclass(frozen=True)
class MomentTable:
    """Contiguous window of moments w_lo..w_hi for one weight."""

    weight: Weight
    lo: int
    hi: int
    values: Dict[int, mpf]
    sources: Dict[int, Source]
    precision: int

    def __post_init__(self):
        for n in range(self.lo, self.hi + 1):
            if n not in self.values:
                raise WindowTooSmall(f"window [{self.lo},{self.hi}] missing w_{n}")

    def __getitem__(self, n: int) -> mpf:
        if not self.lo <= n <= self.hi:
            raise WindowTooSmall(
                f"w_{n} outside window [{self.lo},{self.hi}]")
        return self.values[n]

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    def require_window(self, lo: int, hi: int) -> None:
        if lo < self.lo or hi > self.hi:
            raise WindowTooSmall(
                f"need window [{lo},{hi}], have [{self.lo},{self.hi}]")

    def source(self, n: int) -> Source:
        return self.sources[n]


def _half_circle_sums(weight, ns, level_nodes, accum, first):
    """Add the contribution of one doubling level to per-index accumulators.

    first=True evaluates the base grid j=0..M/2 (trapezoid weights 1,2,..,2,1);
    afterwards only the new interleaved nodes of each doubling are evaluated.
    """
    kmax = weight.max_harmonic(ns)
    tol_rad = mpf(10) ** (-(mp.dps // 2)) * weight.radicand_scale()
    M = level_nodes
    if first:
        js = range(0, M // 2 + 1)
        def theta_of(j):
            return 2 * pi * j / M
        def wt(j):
            return mpf(1) if j in (0, M // 2) else mpf(2)
    else:
        js = range(0, M // 4)
        def theta_of(i):
            return pi * (2 * i + 1) / (M // 2)
        def wt(i):
            return mpf(2)
    for j in js:
        th = theta_of(j)
        ct = cos(th)
        st = sin(th)
        c2t = 2 * ct * ct - 1
        rad = weight.radicand(ct, c2t)
        if rad <= tol_rad:
            raise DenominatorVanishes(
                f"weight radicand {rad} vanishes near theta={th}")
        invd = wt(j) / sqrt(rad)
        cosn = [mpf(1), ct]
        sinn = [mpf(0), st]
        for _ in range(2, kmax + 1):
            cosn.append(2 * ct * cosn[-1] - cosn[-2])
            sinn.append(2 * ct * sinn[-1] - sinn[-2])
        nums = weight.node_numerators(ns, cosn, sinn)
        for n in ns:
            accum[n] += nums[n] * invd


def moment_window(weight: Weight, lo: int, hi: int,
                  prec: int = DEFAULT_PRECISION, start_nodes: int = 64,
                  node_cap: int = NODE_CAP) -> MomentTable:
    """Quadrature moments for every index in [lo, hi].

    All indices share the node grid and the denominator evaluations; the node
    count doubles until two successive levels agree to the internal target.
    """
    if lo > hi:
        raise WindowTooSmall(f"empty window [{lo},{hi}]")
    ns = list(range(lo, hi + 1))
    with workdps(prec):
        target = mpf(10) ** (-(mp.dps - 5))
        M = start_nodes
        accum = {n: mpf(0) for n in ns}
        _half_circle_sums(weight, ns, M, accum, first=True)
        prev = {n: accum[n] / M for n in ns}
        while M < node_cap:
            M *= 2
            _half_circle_sums(weight, ns, M, accum, first=False)
            cur = {n: accum[n] / M for n in ns}
            scale = max(mpf(1), max(fabs(v) for v in cur.values()))
            diff = max(fabs(cur[n] - prev[n]) for n in ns)
            if diff <= target * scale:
                vals = {n: +cur[n] for n in ns}
                return MomentTable(weight=weight, lo=lo, hi=hi, values=vals,
                                   sources={n: Source.QUADRATURE for n in ns},
                                   precision=prec)
            prev = cur
        raise NoConvergence(
            f"trapezoid failed to converge within {node_cap} nodes")


def moment_quadrature(weight: Weight, n: int, prec: int = DEFAULT_PRECISION) -> mpf:
    """Single moment w_n by adaptive quadrature."""
    return moment_window(weight, n, n, prec)[n]


def recurrence_coefficients(weight: Weight, p: int):
    """Coefficients [c_{-1}, c_0, ..., c_{order-1}] of w_{p+1}, w_p, ...

    in the linear relation  sum_l c_l w_{p-l} = 0  at evaluation index p.
    """
    e, m = weight.spectral_data()
    order = weight.order
    coeffs = []
    for l in range(-1, order):
        idx = order - 1 - l
        sign = (-1) ** idx
        coeffs.append(sign * ((p - l) * e[idx] - m[idx]))
    return coeffs


def recurrence_residual(table: MomentTable, p: int) -> mpf:
    """Scale-relative residual of the linear recurrence at index p."""
    with workdps(table.precision):
        coeffs = recurrence_coefficients(table.weight, p)
        order = table.weight.order
        table.require_window(p - order + 1, p + 1)
        terms = [c * table[p - l] for l, c in zip(range(-1, order), coeffs)]
        scale = max(max(fabs(t) for t in terms), mpf(10) ** (-mp.dps))
        return fabs(sum(terms)) / scale


def _solve_step(weight, table_vals, p: int, target: int):
    """Solve the recurrence at index p for the moment at `target`."""
    coeffs = recurrence_coefficients(weight, p)
    order = weight.order
    idxs = list(range(p + 1, p - order, -1))        # p+1, p, ..., p-order+1
    pos = idxs.index(target)
    c_t = coeffs[pos]
    scale = max(fabs(c) for c in coeffs)
    if scale == 0 or fabs(c_t) <= mpf(10) ** (-(mp.dps - 5)) * scale:
        if target == 0:
            raise OrderDropIndex(
                "recurrence order drops: w_0 cannot be reached from one side")
        raise LeadingCoefficientZero(
            f"coefficient of w_{target} vanishes at recurrence index {p}")
    acc = mpf(0)
    for i, (c, idx) in enumerate(zip(coeffs, idxs)):
        if i != pos:
            acc += c * table_vals[idx]
    return -acc / c_t


def extend_by_recurrence(table: MomentTable, new_hi: Optional[int] = None,
                         new_lo: Optional[int] = None) -> MomentTable:
    """Extend the window with the linear recurrence; new entries are marked.

    Upward extension solves for the top index, downward for the bottom one.
    Requires order contiguous entries (2 for the square-diagonal weight).
    """
    order = table.weight.order
    if table.hi - table.lo + 1 < order:
        raise WindowTooSmall(
            f"extension needs at least {order} contiguous entries")
    with workdps(table.precision):
        vals = dict(table.values)
        srcs = dict(table.sources)
        hi, lo = table.hi, table.lo
        if new_hi is not None:
            while hi < new_hi:
                p = hi                                   # solve for w_{p+1}
                vals[hi + 1] = _solve_step(table.weight, vals, p, hi + 1)
                srcs[hi + 1] = Source.LINEAR_RECURRENCE
                hi += 1
        if new_lo is not None:
            while lo > new_lo:
                p = lo + order - 2                       # solve for w_{p-order+1}
                vals[lo - 1] = _solve_step(table.weight, vals, p, lo - 1)
                srcs[lo - 1] = Source.LINEAR_RECURRENCE
                lo -= 1
        return MomentTable(weight=table.weight, lo=lo, hi=hi, values=vals,
                           sources=srcs, precision=table.precision)
