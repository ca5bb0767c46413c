"""Toeplitz symbol kinds: triangular, square-column and square-diagonal.

Each weight knows how to evaluate its Fourier-integrand at a quadrature node
(numerators for a batch of indices n over a common inverse square-root
denominator) and carries the spectral polynomial data (e, m) that drives the
linear moment recurrence.  The recurrence order is 4 for the two
four-singularity weights and 2 for the square-diagonal one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from mpmath import fabs, mpf, sqrt

from .errors import NonFiniteInput, RegimeRefusal
from .lattice import Couplings
from .precision import DEFAULT_PRECISION, to_mpf, workdps


def spectral_from_singularities(zetas: Sequence, rhos: Sequence) -> Tuple[List, List]:
    """Spectral data (e, m) of a weight from its singularities and residues.

    e are the signed elementary symmetric functions of the singularities;
    m are the coefficients of the numerator polynomial of the logarithmic
    derivative, in the alternating-sign convention matching e.
    """
    n = len(zetas)
    W = [mpf(1)]                       # ascending coefficients of prod (x - zeta)
    for zj in zetas:
        new = [mpf(0)] * (len(W) + 1)
        for i, cc in enumerate(W):
            new[i] += cc * (-zj)
            new[i + 1] += cc
        W = new
    evec = [(-1) ** l * W[n - l] for l in range(n + 1)]
    twoV = [mpf(0)] * n
    for zj, rj in zip(zetas, rhos):
        desc = W[::-1]                 # synthetic division by (x - zeta_j)
        q = [mpf(0)] * n
        q[0] = desc[0]
        for i in range(1, n):
            q[i] = desc[i] + zj * q[i - 1]
        qa = q[::-1]
        for i in range(n):
            twoV[i] += rj * qa[i]
    mvec = [(-1) ** l * twoV[n - 1 - l] for l in range(n)]
    return evec, mvec


@dataclass(frozen=True)
class TriangularWeight:
    """Symbol of the triangular-lattice diagonal correlation."""

    couplings: Couplings
    a: mpf
    b: mpf
    c: mpf
    e: Optional[Tuple]      # None when v3 = 1 (square-diagonal degeneration)
    m: Optional[Tuple]
    precision: int

    kind = "triangular"
    order = 4

    @classmethod
    def from_couplings(cls, c: Couplings, prec: int = DEFAULT_PRECISION) -> "TriangularWeight":
        with workdps(prec):
            z1, z2, z3 = c.z(prec)
            v1, v2, v3 = c.v(prec)
            a = 2 * z3 * (1 + z1**2) * (1 + z2**2) + 4 * z1 * z2 * (1 + z3**2)
            cc = (1 - z1**2) * (1 - z2**2)
            b = z3**2 * cc
            if v3 == 1:
                e = m = None
            else:
                q = (v1**2 + v2**2) * v3**2 - v1**2 * v2**2 - 1
                e13 = -2 * (1 + v3**2) * q / (v1 * v2 * (1 - v3**2)**2)
                e2 = (((v1**4 + 4*v2**2*v1**2 + v2**4) * v3**4
                       - 2 * (v2**2*v1**4 + v2**4*v1**2 - 6*v1**2*v2**2
                              + v1**2 + v2**2) * v3**2
                       + v1**4*v2**4 + 4*v1**2*v2**2 + 1)
                      / (v1**2 * v2**2 * (1 - v3**2)**2))
                m13 = 2 * v3 * q / (v1 * v2 * (1 - v3**2)**2)
                m2 = -8 * v3 * (1 + v3**2) / (1 - v3**2)**2
                e = (mpf(1), e13, e2, e13, mpf(1))
                m = (mpf(0), m13, m2, m13, mpf(0))
            return cls(couplings=c, a=a, b=b, c=cc, e=e, m=m, precision=prec)

    def max_harmonic(self, ns: Sequence[int]) -> int:
        return max(abs(n) for n in ns) + 1

    def radicand(self, ct, c2t):
        a, b, c = self.a, self.b, self.c
        return a*a + b*b + c*c - 2*a*(b + c)*ct + 2*b*c*c2t

    def radicand_scale(self):
        return self.a**2 + self.b**2 + self.c**2

    def node_numerators(self, ns, cosn, sinn):
        a, b, c = self.a, self.b, self.c
        return {n: a*cosn[abs(n)] - b*cosn[abs(n - 1)] - c*cosn[abs(n + 1)]
                for n in ns}

    def spectral_data(self):
        if self.e is None:
            raise RegimeRefusal("k3 = 0: triangular recurrence data degenerates; "
                                "use the square-diagonal weight")
        return self.e, self.m

    def describe(self) -> Dict[str, str]:
        return {"kind": self.kind,
                "k1": str(self.couplings.k1), "k2": str(self.couplings.k2),
                "k3": str(self.couplings.k3)}


@dataclass(frozen=True)
class SquareColumnWeight:
    """Symbol of the square-lattice column correlation."""

    alpha1: mpf
    alpha2: mpf
    precision: int

    kind = "square-column"
    order = 4

    @classmethod
    def from_alphas(cls, alpha1, alpha2, prec: int = DEFAULT_PRECISION) -> "SquareColumnWeight":
        with workdps(prec):
            a1, a2 = to_mpf(alpha1), to_mpf(alpha2)
            if a1 <= 0 or a2 <= 0:
                raise NonFiniteInput("column weight requires alpha1, alpha2 > 0")
            if a1 == 1 or a2 == 1:
                raise RegimeRefusal("alpha = 1 puts a singularity on the unit circle")
            return cls(alpha1=a1, alpha2=a2, precision=prec)

    @classmethod
    def from_couplings(cls, k1, k2, prec: int = DEFAULT_PRECISION) -> "SquareColumnWeight":
        """Column correlation of a square lattice with couplings (K1, K2)."""
        with workdps(prec):
            c = Couplings(k1, k2, 0)
            z1, z2, _ = c.z(prec)
            v1, _, _ = c.v(prec)
            if z2 == 0:
                raise NonFiniteInput("K2 = 0 leaves the column direction uncoupled")
            return cls.from_alphas(z2 * v1, v1 / z2, prec)

    @property
    def modulus(self):
        return (1 - self.alpha1 * self.alpha2) / (self.alpha2 - self.alpha1)

    def max_harmonic(self, ns) -> int:
        return max(abs(n) for n in ns)

    def radicand(self, ct, c2t):
        a1, a2 = self.alpha1, self.alpha2
        return (1 - 2*a1*ct + a1**2) * (1 - 2*a2*ct + a2**2)

    def radicand_scale(self):
        return (1 + self.alpha1)**2 * (1 + self.alpha2)**2

    def node_numerators(self, ns, cosn, sinn):
        a1, a2 = self.alpha1, self.alpha2
        ct, st = cosn[1], sinn[1]
        pref = 1 + a1*a2 - (a1 + a2)*ct
        diff = (a1 - a2) * st
        out = {}
        for n in ns:
            s_n = sinn[abs(n)] if n >= 0 else -sinn[abs(n)]
            out[n] = pref * cosn[abs(n)] - diff * s_n
        return out

    def spectral_data(self):
        a1, a2 = self.alpha1, self.alpha2
        half = mpf(1) / 2
        e, m = spectral_from_singularities(
            [1/a1, a2, 1/a2, a1], [half, half, -half, -half])
        return tuple(e), tuple(m) + (mpf(0),)

    def describe(self) -> Dict[str, str]:
        return {"kind": self.kind, "alpha1": str(self.alpha1), "alpha2": str(self.alpha2)}


@dataclass(frozen=True)
class SquareDiagonalWeight:
    """Symbol of the square-lattice diagonal correlation; alpha = 1/k."""

    alpha: mpf
    precision: int

    kind = "square-diagonal"
    order = 2

    @classmethod
    def from_alpha(cls, alpha, prec: int = DEFAULT_PRECISION) -> "SquareDiagonalWeight":
        with workdps(prec):
            a = to_mpf(alpha)
            if a < 0:
                raise NonFiniteInput("square-diagonal weight requires alpha >= 0")
            if a == 1:
                raise RegimeRefusal("alpha = 1 is the critical point; "
                                    "the weight vanishes on the unit circle")
            return cls(alpha=a, precision=prec)

    @classmethod
    def from_modulus(cls, k, prec: int = DEFAULT_PRECISION) -> "SquareDiagonalWeight":
        with workdps(prec):
            kk = to_mpf(k)
            if kk <= 0:
                raise NonFiniteInput("modulus k must be positive")
            return cls.from_alpha(1 / kk, prec)

    @classmethod
    def from_couplings(cls, k1, k2, prec: int = DEFAULT_PRECISION) -> "SquareDiagonalWeight":
        with workdps(prec):
            c = Couplings(k1, k2, 0)
            z1, z2, _ = c.z(prec)
            if z1 == 0 or z2 == 0:
                raise NonFiniteInput("square-diagonal case requires K1, K2 != 0")
            return cls.from_alpha((1 - z1**2) * (1 - z2**2) / (4 * z1 * z2), prec)

    @property
    def modulus(self):
        return 1 / self.alpha

    def max_harmonic(self, ns) -> int:
        return max(abs(n) for n in ns) + 1

    def radicand(self, ct, c2t):
        a = self.alpha
        return 1 - 2*a*ct + a*a

    def radicand_scale(self):
        return (1 + self.alpha)**2

    def node_numerators(self, ns, cosn, sinn):
        a = self.alpha
        return {n: cosn[abs(n)] - a*cosn[abs(n + 1)] for n in ns}

    def spectral_data(self):
        a = self.alpha
        if a == 0:
            raise RegimeRefusal("alpha = 0 weight is the identity; "
                                "the recurrence degenerates")
        half = mpf(1) / 2
        return (mpf(1), a + 1/a, mpf(1)), (-half, -a, -half)

    def describe(self) -> Dict[str, str]:
        return {"kind": self.kind, "alpha": str(self.alpha)}


Weight = TriangularWeight | SquareColumnWeight | SquareDiagonalWeight
