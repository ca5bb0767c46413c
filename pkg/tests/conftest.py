from __future__ import annotations

import pytest

from isingcorr.garnier import iterate
from isingcorr.lattice import Couplings, derive
from isingcorr.moments import moment_window
from isingcorr.toeplitz import determinant_series
from isingcorr.weights import (SquareColumnWeight, SquareDiagonalWeight,
                               TriangularWeight)

PREC = 60


@pytest.fixture(scope="session")
def tri_point():
    """Everything about the reference triangular point (0.30, 0.20, 0.10)."""
    c = Couplings("0.30", "0.20", "0.10")
    d = derive(c, prec=PREC)
    w = TriangularWeight.from_couplings(c, PREC)
    table = moment_window(w, -16, 16, PREC)
    det = determinant_series(table, 13, PREC)
    run = iterate(table, d, 12)
    return {"couplings": c, "lattice": d, "weight": w, "table": table,
            "det": det, "run": run, "prec": PREC}


@pytest.fixture(scope="session")
def col_point():
    w = SquareColumnWeight.from_alphas("0.2", "0.5", PREC)
    table = moment_window(w, -14, 14, PREC)
    return {"weight": w, "table": table, "prec": PREC}


@pytest.fixture(scope="session")
def dpv_point():
    w = SquareDiagonalWeight.from_alpha("0.5", PREC)
    table = moment_window(w, -15, 15, PREC)
    return {"weight": w, "table": table, "prec": PREC}
