"""Symbol algebra: rational families, matching, windings, ellipticity."""

import numpy as np
import pytest

from conelab.errors import MatchingViolation, NotElliptic, PoleOnRealAxis
from conelab.index import interior_ratio_variation, rational_winding
from conelab.symbols import (
    ConeSymbol,
    ConormalFamily,
    InteriorFunction,
    RationalFunction,
    core_ramp,
)


def test_core_ramp_plateaus():
    t = np.linspace(-20, 8, 1001)
    r = core_ramp(t)
    assert np.all(r[t <= -2.75] == 1.0)
    assert np.all(r[t >= -0.25] == 0.0)
    assert np.all(np.diff(r) <= 1e-12)


# ---------------------------------------------------------------------------
# rational conormal families
# ---------------------------------------------------------------------------


def test_cayley_values_and_limits():
    f = RationalFunction.cayley(1)
    assert abs(f.limit - 1.0) < 1e-14
    p = np.array([-1.0, 0.0, 1.0])
    assert np.allclose(f(p), [1j, -1.0, -1j])
    assert rational_winding(f) == 1
    assert rational_winding(RationalFunction.cayley(-2)) == -2
    assert rational_winding(RationalFunction.constant(3.0)) == 0


def test_rational_rejects_real_poles():
    with pytest.raises(PoleOnRealAxis):
        RationalFunction([1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])  # den p^2 - 1


def test_rational_rejects_degree_mismatch():
    with pytest.raises(MatchingViolation):
        RationalFunction([1.0], [1j, 1.0])  # 1/(p+i) has limit 0 != matching form


def test_rational_algebra():
    f = RationalFunction.cayley(1)
    g = f * f
    p = np.linspace(-5, 5, 41)
    assert np.allclose(g(p), f(p) ** 2)
    assert np.allclose(f.inverse()(p), 1.0 / f(p))
    assert np.allclose(f.conjugate()(p), np.conj(f(p)))


def test_conormal_adjoint_family():
    fam = ConormalFamily(RationalFunction.constant(2.0), RationalFunction.cayley(1))
    conj = fam.conjugate()
    p = np.linspace(-8, 8, 33)
    assert np.allclose(conj.function(1)(p), np.conj(fam.function(1)(p)))
    lims = fam.limits()
    assert lims[(0, 1)] == lims[(0, -1)] == 2.0


# ---------------------------------------------------------------------------
# interior functions and matching
# ---------------------------------------------------------------------------


def test_winding_generator_is_valid_symbol():
    for w, v in [(1, 0), (-2, 0), (2, 1), (0, 0)]:
        sym = ConeSymbol.interior_winding(w, v)
        sym.validate(t_min=-3.25)
        assert sym.is_elliptic()
        turns = interior_ratio_variation(sym) / (2 * np.pi)
        assert abs(turns - (w - v)) < 1e-9


def test_winding_generator_core_continuity():
    sym = ConeSymbol.interior_winding(3)
    assert sym.core_continuity_residual(-3.25) < 1e-12
    # values at the core bottom are the half-turn phase (-1)^w
    val = sym.interior[(0, -1)](np.array([-3.25]))[0]
    assert abs(val - (-1.0) ** 3) < 1e-12


def test_matching_violation_detected():
    bad = ConeSymbol(
        {k: InteriorFunction.constant(2.0) for k in ConeSymbol.unit().interior},
        ConormalFamily.unit(),
    )
    with pytest.raises(MatchingViolation):
        bad.validate()
    assert bad.matching_residual() == pytest.approx(1.0)


def test_core_continuity_violation_detected():
    interior = dict(ConeSymbol.unit().interior)
    interior[(0, -1)] = InteriorFunction.half_winding(1)  # unmatched half turn
    bad = ConeSymbol(interior, ConormalFamily.unit())
    assert bad.core_continuity_residual(-3.25) == pytest.approx(2.0)
    with pytest.raises(MatchingViolation):
        bad.validate(t_min=-3.25)


def test_cayley_symbol_matches_by_construction():
    sym = ConeSymbol.cayley(2, -1)
    sym.validate()
    assert sym.matching_residual() < 1e-14


def test_symbol_products_and_inverse():
    a = ConeSymbol.interior_winding(1) * ConeSymbol.cayley(1)
    ai = a.inverse()
    t = np.linspace(-8, 8, 41)
    for key in a.interior:
        assert np.allclose(a.interior[key](t) * ai.interior[key](t), 1.0)
    p = np.linspace(-10, 10, 41)
    assert np.allclose(
        a.conormal.function(1)(p) * ai.conormal.function(1)(p), 1.0
    )
    (a * ai).validate()


def test_non_elliptic_detected():
    interior = {
        k: InteriorFunction.from_ramp_coeffs({0: 0.5, 1: 0.5})  # vanishes mid-ramp
        for k in ConeSymbol.unit().interior
    }
    sym = ConeSymbol(interior, ConormalFamily.unit())
    assert not sym.is_elliptic()
    with pytest.raises(NotElliptic):
        sym.require_elliptic()


def test_ramp_coefficient_form():
    f = InteriorFunction.from_ramp_coeffs({-1: 1.0})
    t = np.linspace(-6, 1, 301)
    assert np.allclose(f(t), np.exp(-1j * np.pi * core_ramp(t)))
