"""Exception hierarchy for the correlation toolkit.

Errors split into three families: bad inputs, regime refusals (the requested
route is not defined at the given couplings) and numerical failures (a guard
quantity vanished or an iteration lost convergence).
"""
from __future__ import annotations


class IsingCorrError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteInput(IsingCorrError):
    """An input coupling or parameter is NaN/infinite or out of domain."""


class RegimeRefusal(IsingCorrError):
    """The requested computation is gated off in this thermodynamic regime."""

    def __init__(self, message: str, regime=None):
        super().__init__(message)
        self.regime = regime


class ComplexDiscriminant(RegimeRefusal):
    """The squared discriminant is negative: singularities leave the real axis."""


class AmbiguousRegime(RegimeRefusal):
    """Two critical conditions hold simultaneously within tolerance."""

    def __init__(self, message: str, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class InvalidFlipPattern(IsingCorrError):
    """Sign pattern is not one of the coupling-flip identities."""


class NumericalFailure(IsingCorrError):
    """Base class for runtime numerical failures."""


class DenominatorVanishes(NumericalFailure):
    """Weight radicand dropped to zero on the integration grid."""


class NoConvergence(NumericalFailure):
    """Node doubling hit the cap without meeting the target accuracy."""


class WindowTooSmall(NumericalFailure):
    """Moment table window does not cover the requested operation."""


class MissingMoments(WindowTooSmall):
    """Garnier initialisation needs w_{-2}..w_2 in the table."""


class LeadingCoefficientZero(NumericalFailure):
    """Recurrence coefficient of the target moment vanishes."""


class OrderDropIndex(LeadingCoefficientZero):
    """Structural order drop: the recurrence cannot reach w_0 from one side."""


class SingularMatrix(NumericalFailure):
    """Toeplitz determinant is zero to working precision."""

    def __init__(self, message: str, n: int | None = None):
        super().__init__(message)
        self.n = n


class InitDenominatorZero(NumericalFailure):
    """A denominator in the Garnier initial-value formulas vanished."""


class ZeroF(NumericalFailure):
    """An f-variable hit zero; the multiplicative step cannot be solved."""


class GuardBracketZero(NumericalFailure):
    """A first-Lax-pair denominator bracket vanished within tolerance."""


class GuardSZero(NumericalFailure):
    """One of the S auxiliaries vanished where it is used as a denominator."""

    def __init__(self, message: str, which: str = "", magnitude=None):
        super().__init__(message)
        self.which = which
        self.magnitude = magnitude


class IterationAborted(NumericalFailure):
    """A step error aborted the nonlinear iteration; carries a state snapshot."""

    def __init__(self, message: str, step: int, snapshot=None):
        super().__init__(message)
        self.step = step
        self.snapshot = snapshot


class StencilCrossesCritical(IsingCorrError):
    """A finite-difference stencil straddles the critical point t = 1."""
