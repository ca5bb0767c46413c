from __future__ import annotations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from mpmath import fabs, mp, mpf

from isingcorr.errors import (AmbiguousRegime, ComplexDiscriminant,
                              InvalidFlipPattern, NonFiniteInput, RegimeRefusal)
from isingcorr.lattice import (Couplings, Regime, canonicalize, classify,
                               classify_couplings, derive, symmetry_transform)
from isingcorr.precision import workdps

from oracles import FROZEN

PREC = 60
TOL = mpf("1e-50")


def test_frozen_singularities(tri_point):
    d = tri_point["lattice"]
    with workdps(PREC):
        for got, want in zip(d.zeta, FROZEN["ZETA"]):
            assert fabs(got - mpf(want)) < TOL
        assert fabs(d.gamma - mpf(FROZEN["GAMMA"])) < TOL
        assert fabs(d.delta_sq - mpf(FROZEN["DELTA_SQ"])) < TOL


def test_structural_identities(tri_point):
    d = tri_point["lattice"]
    with workdps(PREC):
        z1, z2, z3, z4 = d.zeta
        assert fabs(z1 * z2 * z3 * z4 - 1) < TOL
        assert fabs(z3 * z2 - 1) < TOL
        assert fabs(z4 * z1 - 1) < TOL
        assert fabs(z3 - d.z[2] ** 2 * z1) < TOL
        assert fabs(z4 - d.z[2] ** 2 * z2) < TOL
        # identical objects, not merely equal values
        assert d.e[1] is d.e[3]
        assert d.m[1] is d.m[3]
        assert d.e[0] == 1 and d.e[4] == 1 and d.m[0] == 0
        assert d.rho == (mpf(1) / 2, mpf(1) / 2, -mpf(1) / 2, -mpf(1) / 2)


coupling_vals = st.floats(min_value=-1.2, max_value=1.2,
                          allow_nan=False, allow_infinity=False)


@settings(max_examples=25, deadline=None)
@given(coupling_vals, coupling_vals, coupling_vals)
def test_zeta_identities_property(k1, k2, k3):
    assume(abs(k3) > 0.02 and abs(k1) > 0.02 and abs(k2) > 0.02)
    c = Couplings(k1, k2, k3)
    with workdps(PREC):
        try:
            d = derive(c, prec=PREC)
        except (ComplexDiscriminant, AmbiguousRegime):
            assume(False)
        z1, z2, z3, z4 = d.zeta
        tol = mpf("1e-45") * max(1, max(fabs(z) for z in d.zeta)) ** 2
        assert fabs(z1 * z2 * z3 * z4 - 1) < tol
        assert fabs(z3 * z2 - 1) < tol
        assert fabs(z4 * z1 - 1) < tol
        # squared-discriminant consistency and the two d-script forms
        alt = ((1 + d.v[2] ** 2) ** 2 * d.delta_sq
               - 4 * d.v[2] ** 2 * d.gamma ** 2) / (1 - d.v[2] ** 2) ** 2
        assert fabs(d.delta_bar_sq - alt) <= mpf("1e-40") * max(1, fabs(alt))
        zz1, zz2, zz3 = d.z
        dsq_z = ((zz1 + zz2 * zz3) * (zz2 + zz1 * zz3)
                 * (zz3 + zz1 * zz2) * (1 + zz1 * zz2 * zz3))
        assert fabs(d.d_script ** 2 - dsq_z) <= mpf("1e-45") * max(1, fabs(dsq_z))


def test_swap_and_flip_invariance(tri_point):
    d = tri_point["lattice"]
    with workdps(PREC):
        swapped = derive(Couplings("0.20", "0.30", "0.10"), prec=PREC)
        for a, b in zip(d.zeta, swapped.zeta):
            assert fabs(a - b) < TOL
        assert fabs(d.gamma - swapped.gamma) < TOL
        assert fabs(d.delta_sq - swapped.delta_sq) < TOL
        flipped = derive(Couplings("-0.30", "-0.20", "0.10"), prec=PREC)
        for a, b in zip(d.zeta, flipped.zeta):
            assert fabs(a - b) < mpf("1e-45")


def test_regime_grid_expectations():
    cases = [
        (("0.30", "0.20", "0.10"), Regime.FERRO_DISORDERED),
        (("0.60", "0.40", "0.20"), Regime.FERRO_ORDERED),
        (("1", "1", "1"), Regime.FERRO_ORDERED),
        (("-0.55", "-0.45", "0.15"), Regime.FERRO_ORDERED),
        (("-1.00", "-0.90", "-0.35"), Regime.ANTIFERRO_LOW_T),
        (("-0.55", "-0.495", "-0.1925"), Regime.ANTIFERRO_INTERMEDIATE),
        (("-0.30", "-0.27", "-0.105"), Regime.ANTIFERRO_HIGH_T),
        (("20", "20", "20"), Regime.ZERO_T),
        (("1e-14", "1e-14", "1e-14"), Regime.INFINITE_T),
    ]
    for ks, want in cases:
        assert classify_couplings(Couplings(*ks), prec=PREC) == want


def test_critical_detection():
    curie = Couplings(*("0.274653072167027422848811309230631",) * 3)
    assert classify_couplings(curie, prec=PREC) == Regime.CURIE_POINT
    neel = Couplings("-0.5", "-0.5", "-0.0807196807855978168050598642211747")
    assert classify_couplings(neel, prec=PREC) == Regime.NEEL_POINT
    disorder = Couplings("-0.423648930193601806855053753260327",
                         "-0.423648930193601806855053753260327",
                         "-0.161386696131525515341337025998103")
    assert classify_couplings(disorder, prec=PREC) == Regime.DISORDER_POINT
    # classify() on derived data agrees
    d = derive(disorder, prec=PREC)
    assert classify(d) == Regime.DISORDER_POINT
    assert d.regime == Regime.DISORDER_POINT


def test_ambiguous_regime_with_wide_tolerance():
    disorder = Couplings("-0.423648930193601806855053753260327",
                         "-0.423648930193601806855053753260327",
                         "-0.161386696131525515341337025998103")
    with pytest.raises(AmbiguousRegime) as err:
        classify_couplings(disorder, tol_regime="2", prec=PREC)
    assert len(err.value.candidates) >= 2


def test_symmetry_transform_patterns():
    c = Couplings("0.30", "0.20", "0.10")
    flipped, parity = symmetry_transform(c, (-1, -1, 1))
    assert not parity.alternating and parity(4) == 1
    assert flipped.values(PREC)[0] < 0
    _, parity2 = symmetry_transform(c, (-1, 1, -1))
    assert parity2.alternating and parity2(4) == -1 and parity2(3) == 1
    _, parity3 = symmetry_transform(c, (1, -1, -1))
    assert parity3.alternating
    same, parity4 = symmetry_transform(c, (1, 1, 1))
    assert not parity4.alternating
    with pytest.raises(InvalidFlipPattern):
        symmetry_transform(c, (-1, 1, 1))


def test_canonicalize_classes():
    c2, _ = canonicalize(Couplings("-0.55", "-0.45", "0.15"))
    assert all(v >= 0 for v in c2.values(PREC))
    c3, _ = canonicalize(Couplings("0.8", "0.7", "-0.2"))
    assert all(v <= 0 for v in c3.values(PREC))


def test_derive_refusals():
    with pytest.raises(RegimeRefusal):
        derive(Couplings("0.3", "0.2", "0"), prec=PREC)
    with pytest.raises(ComplexDiscriminant) as err:
        derive(Couplings("-0.30", "-0.27", "-0.105"), prec=PREC)
    assert err.value.regime == Regime.ANTIFERRO_HIGH_T
    with pytest.raises(NonFiniteInput):
        Couplings("0", "0", "0")
    with pytest.raises(NonFiniteInput):
        derive(Couplings("nan", "0.2", "0.1"), prec=PREC)


def test_coalescence_backstop():
    # just below the disorder manifold: residual ~1e-7 escapes a 1e-30 regime
    # tolerance, but the singularity separation trips the tol_sep backstop
    base = Couplings("-0.423648930193601806855053753260327",
                     "-0.423648930193601806855053753260327",
                     "-0.16138668")
    d = derive(base, prec=PREC, tol_regime="1e-30", tol_sep="1e-3")
    assert d.regime == Regime.DISORDER_POINT
    assert d.min_zeta_separation() < mpf("1e-3")
