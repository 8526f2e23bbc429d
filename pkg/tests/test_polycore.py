import numpy as np
import pytest

from polyan import config
from polyan.errors import NotRepresentable, PreconditionViolation, SingularPoint
from polyan.tools import polycore
from polyan.tools.polycore import CPoly, PolyAnalytic, RationalHolo


def _random_poly_coefficients(rng, degree=2, order=3):
    polys = {}
    for b in range(order):
        terms = {(d,): complex(*rng.normal(size=2)) for d in range(degree + 1)}
        polys[(b,)] = CPoly(1, terms)
    return PolyAnalytic.from_polys(polys)


# --- eval --------------------------------------------------------------------


def test_eval_one_minus_zzbar(one_minus_zzbar):
    assert abs(one_minus_zzbar.eval(1.0)[0]) < 1e-15
    assert one_minus_zzbar.eval(0.0)[0] == pytest.approx(1.0)


def test_eval_unimodular_quotient(unimodular_quotient):
    assert abs(unimodular_quotient.eval(1j)[0]) == pytest.approx(1.0, abs=1e-14)


def test_eval_at_pole_raises(unimodular_quotient):
    with pytest.raises(SingularPoint):
        unimodular_quotient.eval(1.0)


def test_eval_at_pole_nan_mode(unimodular_quotient):
    out = unimodular_quotient.eval(np.array([1.0, 0.5j]), singular="nan")
    assert np.isnan(out[0])
    assert abs(out[1]) == pytest.approx(1.0)


def test_eval_batch_in_two_variables():
    f = PolyAnalytic.zbar(0, n=2) * PolyAnalytic.z(1, n=2)
    pts = np.array([[1j, 2.0], [3.0, 1j]])
    np.testing.assert_allclose(f.eval(pts), [-2j, 3j])


def test_eval_rejects_dimension_mismatch():
    f = PolyAnalytic.z(0, n=2)
    with pytest.raises(PreconditionViolation):
        f.eval(np.zeros((4, 3)))


# --- Wirtinger derivatives ---------------------------------------------------


def test_dbar_of_one_minus_zzbar(one_minus_zzbar):
    out = polycore.dbar(one_minus_zzbar, 1, 1)
    assert out.equals(-PolyAnalytic.z())
    assert out.order == (1,)


def test_dbar_power_rule():
    out = polycore.dbar(PolyAnalytic.zbar(power=2), 1, 2)
    assert out.equals(PolyAnalytic.constant(2.0))


def test_dbar_to_the_order_vanishes(rng):
    f = _random_poly_coefficients(rng, order=4)
    assert polycore.dbar(f, 1, f.order[0]).is_zero()


def test_dbar_lowers_exact_order_by_one(rng):
    f = _random_poly_coefficients(rng, order=3)
    assert polycore.exact_order(polycore.dbar(f, 1, 1)) == (2,)


def test_dbar_checks_arguments(one_minus_zzbar):
    with pytest.raises(PreconditionViolation):
        polycore.dbar(one_minus_zzbar, 2, 1)
    with pytest.raises(PreconditionViolation):
        polycore.dbar(one_minus_zzbar, 1, 0)


def test_dz_of_zzbar():
    f = PolyAnalytic.z() * PolyAnalytic.zbar()
    assert polycore.dz(f, 1).equals(PolyAnalytic.zbar())


def test_dz_quotient_rule():
    den = CPoly(1, {(1,): 1.0, (0,): -1.0})
    f = PolyAnalytic.holomorphic(RationalHolo(CPoly.constant(1.0, 1), den))
    expected = PolyAnalytic.holomorphic(RationalHolo(CPoly.constant(-1.0, 1), den * den))
    assert polycore.dz(f, 1).equals(expected)
    assert polycore.dz(PolyAnalytic.constant(3.0), 1).is_zero()


# --- exact order -------------------------------------------------------------


def test_exact_order_examples():
    f = PolyAnalytic.zbar(power=2) + PolyAnalytic.z() * PolyAnalytic.zbar()
    assert polycore.exact_order(f) == (3,)
    assert polycore.exact_order(PolyAnalytic.holomorphic(CPoly.monomial((5,)))) == (1,)
    assert polycore.exact_order(PolyAnalytic.zero()) == (0,)


def test_exact_order_ignores_declared_order():
    f = PolyAnalytic.zbar().with_order((6,))
    assert polycore.exact_order(f) == (2,)


# --- conj_mul ----------------------------------------------------------------


def test_conj_mul_z_z():
    z = PolyAnalytic.z()
    out = polycore.conj_mul(z, z)
    assert out.order == (2,)
    assert out.equals(PolyAnalytic.z() * PolyAnalytic.zbar())


def test_conj_mul_z_one():
    out = polycore.conj_mul(PolyAnalytic.z(), PolyAnalytic.constant(1.0))
    assert out.equals(PolyAnalytic.zbar())


def test_conj_mul_two_variable_example():
    P = PolyAnalytic.holomorphic(CPoly.monomial((1, 2)))
    out = polycore.conj_mul(P, P)
    assert polycore.exact_order(out) == (2, 3)


def test_conj_mul_is_squared_modulus(rng):
    f = _random_poly_coefficients(rng, order=2)
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    values = polycore.conj_mul(f, f).eval(z)
    expected = np.abs(f.eval(z)) ** 2
    scale = np.max(expected)
    np.testing.assert_allclose(values.real, expected, rtol=1e-10, atol=1e-12 * scale)
    assert np.max(np.abs(values.imag)) <= 1e-10 * scale


def test_conj_mul_rejects_rational(unimodular_quotient):
    with pytest.raises(NotRepresentable):
        polycore.conj_mul(unimodular_quotient, PolyAnalytic.constant(1.0))


# --- algebra -----------------------------------------------------------------


def test_addition_is_pointwise(rng, unimodular_quotient):
    f = _random_poly_coefficients(rng)
    z = 0.3 * (rng.normal(size=10) + 1j * rng.normal(size=10))
    np.testing.assert_allclose(
        (f + unimodular_quotient).eval(z), f.eval(z) + unimodular_quotient.eval(z), rtol=1e-12
    )


def test_cancellation_is_exact():
    f = PolyAnalytic.z() * PolyAnalytic.zbar()
    assert (f - f).is_zero()


def test_order_must_dominate_conj_powers():
    with pytest.raises(PreconditionViolation):
        PolyAnalytic(1, (1,), {(1,): RationalHolo.constant(1.0, 1)})


def test_denominator_is_normalized():
    a = RationalHolo(CPoly.constant(2.0, 1), CPoly(1, {(1,): 2.0, (0,): 4.0}))
    assert a.den.coefficient((1,)) == 1
    assert a.num.coefficient((0,)) == 1


def test_symbolic_zero_follows_active_tolerances():
    p = CPoly(1, {(0,): 1.0, (1,): 1e-9})
    q = CPoly(1, {(0,): -1.0})
    assert not (p + q).is_zero()
    config.activate(config.Tolerances(symbolic_zero=1e-6))
    assert (p + q).is_zero()


# --- limits and coordinate changes -------------------------------------------


def test_uniform_limit_of_geometric_sequence():
    seq = []
    for k in range(1, 11):
        polys = {(1,): CPoly(1, {(1,): 1.0 - 0.5**k}), (0,): CPoly.constant(0.5**k, 1)}
        seq.append(PolyAnalytic.from_polys(polys))
    limit = polycore.uniform_limit(seq)
    assert limit.coefficient((1,)).num.coefficient((1,)) == pytest.approx(1.0, abs=1e-12)
    assert abs(limit.coefficient((0,)).num.coefficient((0,))) < 1e-12
    z = np.array([0.2 + 0.1j, -0.5j])
    np.testing.assert_allclose(limit.eval(z), z * np.conj(z), atol=1e-12)


def test_uniform_limit_of_order_three_sequences(rng):
    for _ in range(5):
        target = {(b,): CPoly(1, {(d,): complex(*rng.normal(size=2)) for d in range(3)}) for b in range(3)}
        drift = {(b,): CPoly(1, {(d,): complex(*rng.normal(size=2)) for d in range(3)}) for b in range(3)}
        ratio = rng.uniform(0.3, 0.7)
        seq = [
            PolyAnalytic.from_polys({b: target[b] + drift[b].scaled(ratio**k) for b in target}, order=(3,))
            for k in range(1, 13)
        ]
        limit = polycore.uniform_limit(seq)
        assert all(a <= 3 for a in polycore.exact_order(limit))
        z = np.sqrt(rng.uniform(0, 1, 100)) * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
        expected = PolyAnalytic.from_polys(target, order=(3,)).eval(z)
        np.testing.assert_allclose(limit.eval(z), expected, rtol=0, atol=1e-10)


def test_uniform_limit_requires_common_order():
    with pytest.raises(PreconditionViolation):
        polycore.uniform_limit([PolyAnalytic.zbar(), PolyAnalytic.zbar(power=2)])


def test_linear_change_matches_composition(rng):
    f = PolyAnalytic.zbar(0, n=2, power=2) * PolyAnalytic.z(1, n=2)
    theta = 0.4
    U = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)
    g = polycore.linear_change(f, U)
    w = rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
    np.testing.assert_allclose(g.eval(w), f.eval(w @ U.T), rtol=1e-10)
    # conj-degree 2 in the first variable spreads over both
    assert g.order == (3, 3)
    assert polycore.changed_order_bound(f) == (3, 3)


def test_bipoly_round_trip(rng):
    f = _random_poly_coefficients(rng)
    assert polycore.from_bipoly(polycore.to_bipoly(f)).equals(f)
