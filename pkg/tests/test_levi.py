import numpy as np
import pytest

from polyan import report_text
from polyan.errors import (
    NoPositiveEigenvalue,
    NotHermitianWithinTolerance,
    PreconditionViolation,
    SingularOnClosure,
)
from polyan.tools import levi
from polyan.tools.polycore import CPoly
from polyan.tools.witnesses import KINDS, HoloExp, MWitness, random_witness


@pytest.fixture(scope="module")
def sphere():
    return levi.builtin("sphere")


@pytest.fixture(scope="module")
def sphere_family(sphere):
    return levi.build_disc_family(sphere, levi.levi_form(sphere), eps=0.1, delta=0.3)


# --- hypersurfaces ---------------------------------------------------------------------


def test_builtin_names():
    assert set(levi.BUILTIN) >= {"sphere", "negative", "harmonic", "saddle", "cubic"}
    with pytest.raises(PreconditionViolation):
        levi.builtin("torus")


def test_linear_part_is_rejected():
    with pytest.raises(PreconditionViolation):
        levi.from_terms(2, [((1,), (0,), 0, 1.0)])
    with pytest.raises(PreconditionViolation):
        levi.from_terms(1, [])


def test_graph_evaluation(sphere):
    w = np.array([[0.3 + 0.4j], [1j]])
    np.testing.assert_allclose(sphere.eval(w, [0.0, 0.5]), [0.25, 1.0])
    assert sphere.is_quadric()
    assert sphere.third_bound() == 0.0
    assert not levi.builtin("cubic").is_quadric()


# --- Levi form -------------------------------------------------------------------------


def test_sphere_levi_eigenvalue(sphere):
    L = levi.levi_form(sphere)
    assert L.Lambda[0] == pytest.approx(1.0, abs=1e-12)
    assert L.positive


def test_harmonic_graph_is_levi_flat():
    L = levi.levi_form(levi.builtin("harmonic"))
    assert np.all(L.S == 0)
    assert not L.positive


def test_saddle_eigenvalues_are_ordered():
    L = levi.levi_form(levi.builtin("saddle"))
    np.testing.assert_allclose(L.Lambda, [1.0, -1.0], atol=1e-12)
    assert L.to_dict()["eigenvalues"] == [1.0, -1.0]


def test_eigenvalues_survive_a_unitary_rotation(rng):
    M = levi.builtin("saddle")
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    V, _ = np.linalg.qr(A)
    rotated = levi.rotate_hypersurface(M, V)
    np.testing.assert_allclose(levi.levi_form(rotated).Lambda, levi.levi_form(M).Lambda, atol=1e-10)
    w = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    np.testing.assert_allclose(rotated.eval(w, 0.0), M.eval(w @ V.T, 0.0), atol=1e-12)


def test_rotation_needs_a_unitary():
    with pytest.raises(PreconditionViolation):
        levi.rotate_hypersurface(levi.builtin("saddle"), np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_non_hermitian_matrix_is_rejected():
    with pytest.raises(NotHermitianWithinTolerance):
        levi.levi_from_matrix([[1.0, 1.0], [0.0, 1.0]])


def test_callable_levi_matrix_by_finite_differences():
    M = levi.from_callable(2, lambda w, x: 2 * np.abs(w[:, 0]) ** 2 + x**2 / 4)
    assert levi.levi_matrix(M)[0, 0] == pytest.approx(2.0, abs=1e-6)


# --- attached discs ---------------------------------------------------------------------


def test_negative_graph_has_no_discs():
    M = levi.builtin("negative")
    with pytest.raises(NoPositiveEigenvalue):
        levi.build_disc_family(M, levi.levi_form(M), eps=0.1, delta=0.3)


def test_disc_family_needs_a_positive_box(sphere):
    with pytest.raises(PreconditionViolation):
        levi.build_disc_family(sphere, levi.levi_form(sphere), eps=0.0, delta=0.3)


def test_sphere_family_covers_the_one_sided_box(sphere_family):
    assert len(sphere_family) > 50
    assert sphere_family.halvings == 0
    assert sphere_family.coverage["missed"] == 0
    assert sphere_family.c1 < sphere_family.c2
    summary = sphere_family.to_dict()
    assert summary["discs"] == len(sphere_family)


def test_disc_boundaries_lie_on_the_hypersurface(sphere, sphere_family):
    for d in (0, len(sphere_family) // 2, len(sphere_family) - 1):
        pts = sphere_family.boundary(d)
        h = sphere.eval(pts[:, :1], pts[:, 1].real)
        assert np.max(np.abs(pts[:, 1].imag - h)) < sphere_family.attachment_tol


def test_one_sided_samples(sphere, sphere_family):
    D = sphere_family
    pts = levi.sample_one_sided(sphere, D.delta, D.eps, D.c1, D.c2, 50, seed=4)
    gap = pts[:, 1].imag - sphere.eval(pts[:, :1], pts[:, 1].real)
    assert np.all((gap > D.c1) & (gap < D.c2))


def test_cubic_graph_shrinks_the_box():
    M = levi.builtin("cubic")
    D = levi.build_disc_family(M, levi.levi_form(M), eps=0.1, delta=0.3, verify_coverage=False)
    assert M.third_bound() * D.delta / 6 <= levi.levi_form(M).Lambda[0] / 4
    assert D.attachment_defect < D.attachment_tol


# --- maximum modulus -------------------------------------------------------------------


def test_maximum_modulus_on_catalog_witnesses(sphere_family):
    rng = np.random.default_rng(11)
    for k in range(20):
        kind = KINDS[k % len(KINDS)]
        f = random_witness(kind, rng)
        report = levi.bmmp_verify(f, sphere_family)
        assert report.holds, (kind, report.to_dict())
        assert report.remark == report_text.BMMP_REMARK


def test_reciprocal_check_for_nonvanishing_holomorphic(sphere_family):
    f = MWitness.holomorphic(HoloExp(np.array([1.0 + 0.5j, -0.3j])))
    report = levi.bmmp_verify(f, sphere_family, reciprocal=True)
    assert report.holds
    assert report.reciprocal["applies"]
    assert report.reciprocal["holds"]


def test_pole_on_a_disc_is_reported(sphere_family):
    f = MWitness.balk_quotient(1.0, CPoly.var(0, 2))
    with pytest.raises(SingularOnClosure):
        levi.bmmp_verify(f, sphere_family)


def test_witness_dimension_must_match(sphere_family):
    f = MWitness.squared_modulus(CPoly.var(0, 3))
    with pytest.raises(PreconditionViolation):
        levi.bmmp_verify(f, sphere_family)


# --- constant modulus on the trace -----------------------------------------------------


def test_balk_quotient_trace_is_recovered(sphere, sphere_family):
    Q = CPoly(2, {(1, 0): 1.0, (0, 0): -3.0})
    report = levi.constant_modulus_trace(MWitness.balk_quotient(2j, Q), sphere, sphere_family)
    assert report.verdict == "constant_trace"
    assert report.mean_modulus == pytest.approx(2.0, abs=1e-9)
    assert report.matches_balk_form
    assert report.form.lam == pytest.approx(2j, abs=1e-6)
    assert report.remark == report_text.TRACE_REMARK


def test_squared_modulus_trace_is_not_constant(sphere, sphere_family):
    report = levi.constant_modulus_trace(MWitness.squared_modulus(CPoly.var(0, 2)), sphere, sphere_family)
    assert report.verdict == "non_constant_trace"
    assert report.form is None


def test_constant_witness_has_a_trivial_form(sphere, sphere_family):
    f = MWitness.holomorphic(CPoly.constant(5.0, 2))
    report = levi.constant_modulus_trace(f, sphere, sphere_family)
    assert report.verdict == "constant_trace"
    assert report.form.lam == pytest.approx(5.0, abs=1e-6)
    assert report.form.Q.total_degree() == 0
    assert report.to_dict()["form"]["modulus"] == pytest.approx(5.0, abs=1e-6)


def test_disc_slice_masks_the_outside(sphere_family):
    f = MWitness.squared_modulus(CPoly.var(0, 2))
    img = levi.disc_slice(f, sphere_family, size=32)
    assert img.shape == (32, 32)
    assert np.isnan(img[0, 0])
    assert np.isfinite(img[16, 16])
