"""Coupling algebra: derived variables, weight singularities and regime tests.

The three couplings (K1, K2, K3) enter through z_i = tanh K_i and
v_i = exp(-2 K_i).  Everything downstream — the four singularities of the
Toeplitz symbol, the spectral polynomial data feeding the linear moment
recurrence, and the thermodynamic-regime classification that gates the
nonlinear routes — is derived here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from mpmath import exp, fabs, mp, mpf, sqrt, tanh

from .errors import (AmbiguousRegime, ComplexDiscriminant, InvalidFlipPattern,
                     NonFiniteInput, RegimeRefusal)
from .precision import DEFAULT_PRECISION, to_mpf, workdps

DEFAULT_TOL_REGIME = mpf("1e-12")
DEFAULT_TOL_SEP = mpf("1e-10")

# Sign patterns under which the moment sequence is invariant (possibly up to
# an alternating sign): identity and the three double flips.
_VALID_FLIPS = {
    (1, 1, 1): False,
    (-1, -1, 1): False,
    (-1, 1, -1): True,
    (1, -1, -1): True,
}


class Regime(enum.Enum):
    FERRO_ORDERED = "ferro.ordered"
    FERRO_DISORDERED = "ferro.disordered"
    ANTIFERRO_LOW_T = "antiferro.lowT"
    ANTIFERRO_INTERMEDIATE = "antiferro.intermediate"
    ANTIFERRO_HIGH_T = "antiferro.highT"
    CURIE_POINT = "curie"
    NEEL_POINT = "neel"
    DISORDER_POINT = "disorder"
    ZERO_T = "zeroT"
    INFINITE_T = "infiniteT"
    COMPLEX = "complex"

    @property
    def is_critical(self) -> bool:
        return self in (Regime.CURIE_POINT, Regime.NEEL_POINT,
                        Regime.DISORDER_POINT, Regime.ZERO_T, Regime.INFINITE_T)

    @property
    def allows_nonlinear(self) -> bool:
        """Whether the nonlinear (Garnier/dPV) routes are licensed."""
        return self in (Regime.FERRO_ORDERED, Regime.FERRO_DISORDERED,
                        Regime.ANTIFERRO_LOW_T, Regime.ANTIFERRO_INTERMEDIATE)


@dataclass(frozen=True)
class Couplings:
    """Dimensionless couplings; k3 = 0 selects the square-lattice diagonal case.

    Values are kept in their raw form (decimal strings preferred) and realised
    as mpf at the precision of each computation, so one Couplings object can be
    reused across precisions without rounding at construction time.
    """

    k1: object
    k2: object
    k3: object

    def __post_init__(self):
        vals = self.values(DEFAULT_PRECISION)
        if all(v == 0 for v in vals):
            raise NonFiniteInput("at least one coupling must be nonzero")

    def values(self, prec: int = DEFAULT_PRECISION) -> Tuple[mpf, mpf, mpf]:
        with workdps(prec):
            return (to_mpf(self.k1), to_mpf(self.k2), to_mpf(self.k3))

    def z(self, prec: int = DEFAULT_PRECISION) -> Tuple[mpf, mpf, mpf]:
        with workdps(prec):
            return tuple(tanh(k) for k in self.values(prec))

    def v(self, prec: int = DEFAULT_PRECISION) -> Tuple[mpf, mpf, mpf]:
        with workdps(prec):
            return tuple(exp(-2 * k) for k in self.values(prec))

    def sign_class(self) -> int:
        """+1 for the ferromagnetic-equivalent class, -1 antiferromagnetic, 0 boundary."""
        k1, k2, k3 = self.values(DEFAULT_PRECISION)
        prod = k1 * k2 * k3
        nonzero = [k for k in (k1, k2, k3) if k != 0]
        if len(nonzero) < 3:
            neg = sum(1 for k in nonzero if k < 0)
            return 1 if neg % 2 == 0 else -1
        return 1 if prod > 0 else -1


@dataclass(frozen=True)
class MomentParity:
    """Index-dependent sign relating moments of flip-transformed couplings."""

    alternating: bool

    def sign(self, n: int) -> int:
        return (-1) ** (n + 1) if self.alternating else 1

    def __call__(self, n: int) -> int:
        return self.sign(n)


def symmetry_transform(c: Couplings, flips: Sequence[int]) -> Tuple[Couplings, MomentParity]:
    """Apply one of the coupling sign flips that preserve the moment sequence.

    Returns the transformed couplings together with the per-index parity, so
    w_n(original) = parity(n) * w_n(transformed).
    """
    pattern = tuple(int(s) for s in flips)
    if pattern not in _VALID_FLIPS:
        raise InvalidFlipPattern(f"flip pattern {pattern} is not a moment identity")
    with workdps(DEFAULT_PRECISION):
        ks = [to_mpf(k) for k in (c.k1, c.k2, c.k3)]
        flipped = Couplings(*[(-k if s < 0 else k) for k, s in zip(ks, pattern)])
    return flipped, MomentParity(alternating=_VALID_FLIPS[pattern])


def canonicalize(c: Couplings) -> Tuple[Couplings, MomentParity]:
    """Flip signs to the canonical frame: all couplings >= 0 (class A) or <= 0."""
    k = c.values(DEFAULT_PRECISION)
    neg = [i for i in range(3) if k[i] < 0]
    cls = c.sign_class()
    if cls >= 0:
        want = set(neg)            # clear the negatives
    else:
        want = {0, 1, 2} - set(neg)  # make every nonzero coupling negative
        want = {i for i in want if k[i] != 0}
    if not want:
        return c, MomentParity(alternating=False)
    patterns = [p for p in _VALID_FLIPS if {i for i in range(3) if p[i] < 0} == want]
    if not patterns:
        # a single flip cannot fix it (e.g. one zero coupling); compose two
        for p in _VALID_FLIPS:
            c2, par2 = symmetry_transform(c, p)
            if all(x >= 0 for x in c2.values(DEFAULT_PRECISION)) or \
               all(x <= 0 for x in c2.values(DEFAULT_PRECISION)):
                return c2, par2
        raise InvalidFlipPattern("no flip pattern canonicalizes these couplings")
    return symmetry_transform(c, patterns[0])


# ---------------------------------------------------------------------------
# regime classification
# ---------------------------------------------------------------------------

def _regime_factors(v1, v2, v3):
    """Critical-manifold factors in the canonical frame.

    fc vanishes on the Curie manifold, fn[j] on the Neel manifold whose
    ferromagnetically-ordered axis is j, fd[j] on the disorder manifold of
    axis j.  The products fd[0]*fd[1]*fd[2]*allp and fc*fn[0]*fn[1]*fn[2]
    are the two squared discriminants.
    """
    v12, v13, v23 = v1 * v2, v1 * v3, v2 * v3
    fc = 1 - v12 - v13 - v23
    fn = (1 + v12 + v13 - v23, 1 + v12 - v13 + v23, 1 - v12 + v13 + v23)
    fd = (1 + v23 - v12 - v13, 1 + v13 - v12 - v23, 1 + v12 - v13 - v23)
    allp = 1 + v12 + v13 + v23
    return fc, fn, fd, allp


def classify_couplings(c: Couplings, tol_regime=DEFAULT_TOL_REGIME,
                       prec: int = DEFAULT_PRECISION) -> Regime:
    """Thermodynamic regime of a coupling triple.

    Critical manifolds are detected by scale-relative residuals of the
    factor conditions; the generic phase follows from the factor signs.
    Raises AmbiguousRegime when two critical conditions hold at once.
    """
    with workdps(prec):
        tol = to_mpf(tol_regime)
        canon, _ = canonicalize(c)
        v = canon.v(prec)
        # temperature-boundary cases; capped so a widened critical tolerance
        # cannot swallow generic points into the T = 0 / T = infinity bins
        tol_edge = min(tol, mpf("1e-6"))
        if all(fabs(vi - 1) <= tol_edge for vi in v):
            return Regime.INFINITE_T
        if any(vi <= tol_edge or (vi > 1 and 1 / vi <= tol_edge) for vi in v):
            return Regime.ZERO_T
        fc, fn, fd, allp = _regime_factors(*v)
        scale = allp
        cls = canon.sign_class()
        hits = []
        if cls >= 0:
            if fabs(fc) / scale <= tol:
                hits.append(("curie", Regime.CURIE_POINT))
        else:
            for j in range(3):
                if fabs(fn[j]) / scale <= tol:
                    hits.append((f"neel.axis{j + 1}", Regime.NEEL_POINT))
                if fabs(fd[j]) / scale <= tol:
                    hits.append((f"disorder.axis{j + 1}", Regime.DISORDER_POINT))
        if len(hits) > 1:
            raise AmbiguousRegime(
                "multiple critical conditions within tolerance: "
                + ", ".join(name for name, _ in hits),
                candidates=[r for _, r in hits])
        if hits:
            return hits[0][1]
        if cls >= 0:
            return Regime.FERRO_ORDERED if fc > 0 else Regime.FERRO_DISORDERED
        delta_sq = fd[0] * fd[1] * fd[2] * allp
        if delta_sq < 0:
            return Regime.ANTIFERRO_HIGH_T
        if any(x < 0 for x in fn):
            return Regime.ANTIFERRO_LOW_T
        return Regime.ANTIFERRO_INTERMEDIATE


@dataclass(frozen=True)
class LatticeData:
    """All algebraic data derived from a coupling triple."""

    couplings: Couplings
    z: Tuple[mpf, mpf, mpf]
    v: Tuple[mpf, mpf, mpf]
    gamma: mpf
    delta_sq: mpf
    delta: mpf
    delta_bar_sq: mpf
    d_script: mpf
    zeta: Tuple[mpf, mpf, mpf, mpf]
    rho: Tuple[mpf, mpf, mpf, mpf]
    e: Tuple[mpf, mpf, mpf, mpf, mpf]
    m: Tuple[mpf, mpf, mpf, mpf]
    regime: Regime
    precision: int

    def min_zeta_separation(self) -> mpf:
        """min pairwise |zeta_i - zeta_j| normalised by max |zeta|."""
        zs = self.zeta
        mx = max(fabs(z) for z in zs)
        sep = min(fabs(zs[i] - zs[j]) for i in range(4) for j in range(i + 1, 4))
        return sep / mx


def classify(d: LatticeData, tol_regime=DEFAULT_TOL_REGIME) -> Regime:
    """Regime of an existing LatticeData (recomputed from its couplings)."""
    return classify_couplings(d.couplings, tol_regime=tol_regime, prec=d.precision)


def derive(c: Couplings, prec: int = DEFAULT_PRECISION,
           tol_regime=DEFAULT_TOL_REGIME, tol_sep=DEFAULT_TOL_SEP) -> LatticeData:
    """Populate LatticeData from couplings.

    Refuses k3 = 0 (the square-lattice diagonal specialization has its own
    parametrization) and a negative squared discriminant (the singularities
    leave the real axis, outside the scope of the real iteration engine).
    Coalescing singularities are not an error: they are reported through the
    regime field.
    """
    with workdps(prec):
        k1, k2, k3 = c.values(prec)
        if k3 == 0:
            raise RegimeRefusal(
                "k3 = 0 is the square-lattice diagonal case; "
                "use the square-diagonal weight instead")
        z = tuple(tanh(k) for k in (k1, k2, k3))
        v = tuple(exp(-2 * k) for k in (k1, k2, k3))
        v1, v2, v3 = v
        gamma = 1 + v1**2 * v2**2 - (v1**2 + v2**2) * v3**2
        delta_sq = ((1 + v1*v2 - v1*v3 - v2*v3) * (1 - v1*v2 - v1*v3 + v2*v3)
                    * (1 - v1*v2 + v1*v3 - v2*v3) * (1 + v1*v2 + v1*v3 + v2*v3))
        delta_bar_sq = ((1 - v1*v2 + v1*v3 + v2*v3) * (1 + v1*v2 + v1*v3 - v2*v3)
                        * (1 + v1*v2 - v1*v3 + v2*v3) * (1 - v1*v2 - v1*v3 - v2*v3))
        regime = classify_couplings(c, tol_regime=tol_regime, prec=prec)
        if delta_sq < 0:
            raise ComplexDiscriminant(
                f"squared discriminant {delta_sq} < 0: complex singularities "
                f"(regime {regime.value})", regime=regime)
        delta = sqrt(delta_sq)
        d_script = 4 * delta / ((1 + v1)**2 * (1 + v2)**2 * (1 + v3)**2)
        half = mpf(1) / 2
        zeta = (
            (gamma + delta) / (2 * v1 * v2 * (1 - v3)**2),
            (gamma - delta) / (2 * v1 * v2 * (1 - v3)**2),
            (gamma + delta) / (2 * v1 * v2 * (1 + v3)**2),
            (gamma - delta) / (2 * v1 * v2 * (1 + v3)**2),
        )
        # spectral data; e1 == e3 and m1 == m3 by construction (same objects)
        q = (v1**2 + v2**2) * v3**2 - v1**2 * v2**2 - 1    # = -gamma
        e13 = -2 * (1 + v3**2) * q / (v1 * v2 * (1 - v3**2)**2)
        e2 = (((v1**4 + 4*v2**2*v1**2 + v2**4) * v3**4
               - 2 * (v2**2*v1**4 + v2**4*v1**2 - 6*v1**2*v2**2 + v1**2 + v2**2) * v3**2
               + v1**4*v2**4 + 4*v1**2*v2**2 + 1)
              / (v1**2 * v2**2 * (1 - v3**2)**2))
        m13 = 2 * v3 * q / (v1 * v2 * (1 - v3**2)**2)
        m2 = -8 * v3 * (1 + v3**2) / (1 - v3**2)**2
        data = LatticeData(
            couplings=c, z=z, v=v, gamma=gamma, delta_sq=delta_sq, delta=delta,
            delta_bar_sq=delta_bar_sq, d_script=d_script, zeta=zeta,
            rho=(half, half, -half, -half),
            e=(mpf(1), e13, e2, e13, mpf(1)),
            m=(mpf(0), m13, m2, m13),
            regime=regime, precision=prec)
        # coalescence backstop: flag near-degenerate singularities not already
        # caught by a critical-residual condition
        if not regime.is_critical and data.min_zeta_separation() <= to_mpf(tol_sep):
            object.__setattr__(data, "regime", _coalescence_regime(data))
        return data


def _coalescence_regime(d: LatticeData) -> Regime:
    """Name the critical regime from which singularity pair coalesced."""
    z1, z2, z3, z4 = d.zeta
    pairs = {
        (0, 1): Regime.DISORDER_POINT,
        (2, 3): Regime.DISORDER_POINT,
        (1, 2): Regime.CURIE_POINT if d.couplings.sign_class() >= 0 else Regime.NEEL_POINT,
        (0, 3): Regime.CURIE_POINT if d.couplings.sign_class() >= 0 else Regime.NEEL_POINT,
        (0, 2): Regime.ZERO_T,
        (1, 3): Regime.ZERO_T,
    }
    mx = max(fabs(z) for z in d.zeta)
    best, bestsep = None, None
    for (i, j), reg in pairs.items():
        sep = fabs(d.zeta[i] - d.zeta[j]) / mx
        if bestsep is None or sep < bestsep:
            best, bestsep = reg, sep
    return best
