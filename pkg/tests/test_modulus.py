import numpy as np
import pytest

from polyan.errors import NoSolution
from polyan.tools import modulus
from polyan.tools.modulus import BalkForm
from polyan.tools.polycore import CPoly, PolyAnalytic, RationalHolo


def _unit_disc(rng, size):
    r = np.sqrt(rng.uniform(0, 1, size))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, size))


def _z_minus_one():
    return CPoly(1, {(1,): 1.0, (0,): -1.0})


def test_modulus_squared_examples(one_minus_zzbar):
    zz = PolyAnalytic.z() * PolyAnalytic.zbar()
    assert modulus.modulus_squared(PolyAnalytic.zbar()).equals(zz)
    assert modulus.modulus_squared(one_minus_zzbar).equals(one_minus_zzbar * one_minus_zzbar)
    assert modulus.modulus_squared(PolyAnalytic.constant(3 - 4j)).equals(PolyAnalytic.constant(25.0))


def test_constant_modulus_of_unimodular_quotient(unimodular_quotient):
    assert modulus.is_constant_modulus(unimodular_quotient) == pytest.approx(1.0, abs=1e-12)
    assert modulus.is_constant_modulus(unimodular_quotient.scale(2j)) == pytest.approx(2.0, abs=1e-12)


def test_one_minus_zzbar_is_not_constant(one_minus_zzbar):
    assert modulus.is_constant_modulus(one_minus_zzbar) is None
    with pytest.raises(NoSolution):
        modulus.balk_decompose(one_minus_zzbar)


def test_balk_direct_form(unimodular_quotient):
    form = modulus.balk_decompose(unimodular_quotient)
    assert form.lam == pytest.approx(1.0, abs=1e-10)
    assert form.Q.equals(_z_minus_one())
    assert modulus.balk_soundness(unimodular_quotient, form) < 1e-9 * 2


def test_balk_separable_form():
    Q = CPoly.monomial((1, 1))
    f = PolyAnalytic(2, (2, 2), {(1, 1): RationalHolo(CPoly.constant(1.0, 2), Q)})
    form = modulus.balk_decompose(f)
    assert form.lam == pytest.approx(1.0, abs=1e-10)
    assert form.Q.equals(Q)


def test_constant_function_has_degree_zero_q():
    form = modulus.balk_decompose(PolyAnalytic.constant(3 + 4j))
    assert form.modulus == pytest.approx(5.0)
    assert form.lam == pytest.approx(3 + 4j)
    assert form.Q.degrees() == (0,)


def test_zero_function_modulus():
    assert modulus.is_constant_modulus(PolyAnalytic.zero()) == 0.0
    assert modulus.balk_decompose(PolyAnalytic.zero()).lam == 0


def test_balk_round_trip(rng):
    for case in range(200):
        degree = int(rng.integers(0, 4))
        lower = _unit_disc(rng, degree)
        Q = CPoly(1, {(degree,): 1.0, **{(k,): c for k, c in enumerate(lower)}})
        lam = complex(rng.uniform(0.5, 3.0) * np.exp(2j * np.pi * rng.uniform()))
        f = BalkForm(lam, Q).to_polyanalytic()
        form = modulus.balk_decompose(f)
        assert form.lam == pytest.approx(lam, abs=1e-9), case
        assert (form.Q - Q).scale() < 1e-9, case
        assert modulus.balk_soundness(f, form) < 1e-9 * (1 + abs(lam)), case


def test_balk_round_trip_two_variables():
    Q = CPoly(2, {(1, 1): 1.0, (1, 0): 0.5j, (0, 0): -0.25})
    f = BalkForm(2j, Q).to_polyanalytic()
    form = modulus.balk_decompose(f)
    assert form.lam == pytest.approx(2j, abs=1e-9)
    assert (form.Q - Q).scale() < 1e-9


def test_entire_constant_modulus_is_constant(rng):
    for _ in range(20):
        c = complex(*rng.normal(size=2))
        f = PolyAnalytic.constant(c)
        assert modulus.is_constant_modulus(f) == pytest.approx(abs(c))
        assert modulus.balk_decompose(f).Q.degrees() == (0,)


def test_non_constant_polynomial_coefficients(rng):
    for q in range(1, 5):
        polys = {(j,): CPoly(1, {(m,): complex(*rng.normal(size=2)) for m in range(3)}) for j in range(q)}
        f = PolyAnalytic.from_polys(polys)
        values = np.abs(f.eval(np.array([0.1, 0.6 + 0.2j])))
        assert abs(values[0] - values[1]) > 1e-6
        assert modulus.is_constant_modulus(f) is None


def test_q_zeros_inside_box():
    form = BalkForm(1.0, _z_minus_one())
    zeros = modulus.balk_q_zeros(form, (0, 2, -1, 1))
    assert len(zeros) == 1
    assert zeros[0][0] == pytest.approx(1.0)
    assert modulus.balk_q_zeros(form, (-0.5, 0.5, -0.5, 0.5)) == []
