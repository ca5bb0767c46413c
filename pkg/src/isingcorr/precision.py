"""Precision plumbing around mpmath.

All public operations take a decimal-digit precision ``prec`` and compute with
``GUARD_DIGITS`` extra digits internally, so values reported at ``prec`` are
fully converged.  Nothing mutates the global mpmath context outside a
``workdps`` block.
"""
from __future__ import annotations

import os

from mpmath import mp, mpf, mpmathify

from .errors import NonFiniteInput

GUARD_DIGITS = 10
DEFAULT_PRECISION = 60
MIN_PRECISION = 30

PRECISION_ENV_VAR = "ISINGCORR_PRECISION"


def default_precision() -> int:
    """Library default, overridable through the environment."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        prec = int(raw)
    except ValueError as exc:
        raise NonFiniteInput(f"{PRECISION_ENV_VAR}={raw!r} is not an integer") from exc
    return max(prec, MIN_PRECISION)


def workdps(prec: int):
    """Context manager running at prec + guard digits."""
    return mp.workdps(int(prec) + GUARD_DIGITS)


def to_mpf(x) -> mpf:
    """Convert a number-like input to mpf at the current precision.

    Floats are converted through repr so that decimal string inputs and the
    equivalent Python floats agree; strings are taken verbatim.
    """
    if isinstance(x, str):
        val = mpmathify(x)
    elif isinstance(x, float):
        val = mpmathify(repr(x))
    else:
        val = mpmathify(x)
    if not mp.isfinite(val):
        raise NonFiniteInput(f"non-finite input {x!r}")
    return val


def matching_digits(approx, reference) -> float:
    """Number of agreeing decimal digits of approx against a reference value.

    Relative when the reference is away from zero, absolute otherwise.
    Capped at the current working precision.
    """
    from mpmath import fabs, log10

    ref = fabs(reference)
    err = fabs(approx - reference)
    if err == 0:
        return float(mp.dps)
    scale = ref if ref > 0 else mpf(1)
    digits = -log10(err / scale)
    return min(float(digits), float(mp.dps))
