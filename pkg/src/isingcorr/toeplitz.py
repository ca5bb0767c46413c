"""Dense Toeplitz determinants: the ground-truth route for the correlations.

Determinants are evaluated by Gaussian elimination with full pivoting at
working precision, recomputed independently for each size.  At desk scale
(N <= 30) this is cheap and leaves no room for update-formula subtleties;
the point of this module is to be simpler than everything it checks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from mpmath import fabs, mp, mpf

from .errors import SingularMatrix, WindowTooSmall
from .moments import MomentTable
from .precision import DEFAULT_PRECISION, workdps


class Method(enum.Enum):
    DETERMINANT = "determinant"
    GARNIER_RECOVERY = "garnier"
    DPV_RECOVERY = "dpv"
    COLUMN_RECOVERY = "column"


@dataclass(frozen=True)
class CorrelationSeries:
    """Correlation values I_0..I_Nmax with the route that produced them."""

    values: List[mpf]
    method: Method
    precision: int
    meta: Dict = field(default_factory=dict)

    def __getitem__(self, n: int) -> mpf:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def det_full_pivot(rows: List[List[mpf]]) -> mpf:
    """Determinant by elimination with full (row and column) pivoting."""
    n = len(rows)
    if n == 0:
        return mpf(1)
    a = [list(r) for r in rows]
    det = mpf(1)
    for k in range(n):
        piv_i, piv_j, piv = k, k, fabs(a[k][k])
        for i in range(k, n):
            for j in range(k, n):
                if fabs(a[i][j]) > piv:
                    piv_i, piv_j, piv = i, j, fabs(a[i][j])
        if piv == 0:
            return mpf(0)
        if piv_i != k:
            a[k], a[piv_i] = a[piv_i], a[k]
            det = -det
        if piv_j != k:
            for row in a:
                row[k], row[piv_j] = row[piv_j], row[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f == 0:
                continue
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return det


def determinant_series(table: MomentTable, nmax: int,
                       prec: Optional[int] = None) -> CorrelationSeries:
    """I_n = det[w_{j-k}] for n = 0..nmax, each size factorized afresh."""
    prec = prec or table.precision
    if nmax >= 1:
        table.require_window(-(nmax - 1), nmax - 1)
    with workdps(prec):
        values = [mpf(1)]
        for n in range(1, nmax + 1):
            rows = [[table[j - k] for k in range(n)] for j in range(n)]
            d = det_full_pivot(rows)
            if d == 0:
                raise SingularMatrix(f"Toeplitz determinant vanished at n={n}", n=n)
            values.append(d)
    return CorrelationSeries(values=values, method=Method.DETERMINANT,
                             precision=prec, meta=table.weight.describe())


def det_ratio_check(series: CorrelationSeries, r: Sequence, rbar: Sequence):
    """Residuals |I_{n+1} I_{n-1} / I_n^2 - (1 - r_n rbar_n)| for n >= 1."""
    nmax = min(len(series) - 2, len(r) - 1, len(rbar) - 1)
    with workdps(series.precision):
        out = []
        for n in range(1, nmax + 1):
            if series[n] == 0:
                raise SingularMatrix(f"I_{n} = 0 in ratio check", n=n)
            lhs = series[n + 1] * series[n - 1] / series[n] ** 2
            out.append(fabs(lhs - (1 - r[n] * rbar[n])))
        return out
