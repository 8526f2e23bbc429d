import math

import numpy as np
import pytest

from polyan.errors import InsufficientSamples, PreconditionViolation, RankDeficient
from polyan.tools import sampling
from polyan.tools.polycore import PolyAnalytic
from polyan.tools.sampling import PointSet


def _line_gap(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


@pytest.fixture
def two_lines():
    return sampling.lines_through(0j, [0.0, math.pi / 2])


@pytest.fixture
def tangent_circle():
    psi = np.concatenate([2.0 ** -np.arange(1, 17), -(2.0 ** -np.arange(1, 17))])
    return PointSet(0j, 1 - np.exp(1j * psi))


@pytest.fixture
def zzbar():
    return PolyAnalytic.z() * PolyAnalytic.zbar()


# --- limiting directions -----------------------------------------------------------


def test_two_lines_give_two_directions(two_lines):
    report = sampling.limiting_directions(two_lines)
    assert report.order == 2
    assert min(_line_gap(a, 0.0) for a in report.angles) < 0.05
    assert min(_line_gap(a, math.pi / 2) for a in report.angles) < 0.05


def test_tangent_circle_has_one_direction(tangent_circle):
    report = sampling.limiting_directions(tangent_circle)
    assert report.order == 1
    assert _line_gap(report.angles[0], math.pi / 2) < 0.05


def test_random_disc_points_condense_in_many_directions():
    E = sampling.random_disc_points(500, seed=42)
    assert sampling.limiting_directions(E, angular_resolution=0.2).order >= 4


def test_far_dense_cluster_does_not_hide_the_inner_direction():
    line = sampling.lines_through(0j, [0.0]).points
    rng = np.random.default_rng(7)
    cluster = 1j * rng.choice([-1.0, 1.0], 200) * rng.uniform(0.5, 1.0, 200)
    E = PointSet(0j, np.concatenate([line, cluster]))
    report = sampling.limiting_directions(E)
    assert report.order == 1
    assert _line_gap(report.angles[0], 0.0) < 0.05
    assert report.counts[0] >= 8


def test_single_scale_cannot_populate_shells():
    E = PointSet(0j, 0.5 * np.exp(1j * np.linspace(0, math.pi, 40)))
    with pytest.raises(InsufficientSamples):
        sampling.limiting_directions(E)


def test_directions_rotate_with_the_set():
    E = sampling.lines_through(0j, [0.3, 1.2])
    phi = 0.5
    before = sampling.limiting_directions(E)
    after = sampling.limiting_directions(E.rotated(phi))
    assert after.order == before.order == 2
    for a in before.angles:
        assert min(_line_gap(a + phi, b) for b in after.angles) <= after.angular_resolution


def test_limiting_directions_preconditions(two_lines):
    with pytest.raises(PreconditionViolation):
        sampling.limiting_directions(two_lines, angular_resolution=1.0)
    with pytest.raises(InsufficientSamples):
        sampling.limiting_directions(PointSet(0j, [0.5, 0.25j]))


def test_condensation_order(two_lines, tangent_circle):
    assert sampling.condensation_order(two_lines, 2)
    assert sampling.condensation_order(two_lines, 1)
    assert not sampling.condensation_order(two_lines, 3)
    assert not sampling.condensation_order(tangent_circle, 2)


# --- fitting -------------------------------------------------------------------------


def _grid_samples(f):
    x = np.linspace(-1, 1, 8)
    pts = (x[:, None] + 1j * x[None, :]).ravel()
    return PointSet(0j, pts, f.eval(pts))


def test_fit_recovers_zzbar(zzbar):
    fit = sampling.fit_polyanalytic(_grid_samples(zzbar), q=2, d=1)
    assert fit.residual < 1e-10
    assert fit.f.coefficient((1,)).num.coefficient((1,)) == pytest.approx(1.0, abs=1e-10)
    assert abs(fit.f.coefficient((0,)).num.coefficient((0,))) < 1e-10


def test_holomorphic_model_misfits(zzbar):
    fit = sampling.fit_polyanalytic(_grid_samples(zzbar), q=1, d=1)
    assert fit.residual > 0.1


def test_fit_on_one_line_is_rank_deficient(zzbar):
    E = sampling.lines_through(0j, [0.0])
    with pytest.raises(RankDeficient) as info:
        sampling.fit_polyanalytic(E.with_values(zzbar.eval(E.points)), q=2, d=1)
    assert info.value.condition == float("inf")


def test_fit_needs_enough_samples(zzbar):
    E = PointSet(0j, [0.5, 0.5j], zzbar.eval(np.array([0.5, 0.5j])))
    with pytest.raises(InsufficientSamples):
        sampling.fit_polyanalytic(E, q=2, d=1)


# --- uniqueness ----------------------------------------------------------------------


def test_equal_on_two_lines(zzbar, two_lines):
    report = sampling.uniqueness_test(zzbar, zzbar, two_lines, 2)
    assert report.verdict == "equal"


def test_agreement_on_one_line_is_inconclusive(zzbar):
    g = zzbar + PolyAnalytic.zbar() - PolyAnalytic.z()
    E = sampling.lines_through(0j, [0.0])
    report = sampling.uniqueness_test(zzbar, g, E, 2)
    assert report.verdict == "inconclusive"
    assert not report.condensation
    assert not report.symbolic_equal


def test_disagreement_is_distinct(zzbar, two_lines):
    g = zzbar + PolyAnalytic.constant(1.0)
    assert sampling.uniqueness_test(zzbar, g, two_lines, 2).verdict == "distinct"


def _random_f(rng):
    a, b, c = (complex(*rng.normal(size=2)) for _ in range(3))
    return PolyAnalytic.z().scale(a) + PolyAnalytic.zbar().scale(b) + PolyAnalytic.constant(c)


def test_random_functions_agreeing_on_fewer_lines_are_never_equal(rng):
    for _ in range(50):
        angle = rng.uniform(0, math.pi)
        E = sampling.lines_through(0j, [angle])
        # conj(z) - e^{-2i angle} z vanishes on the line at that angle
        kernel = PolyAnalytic.zbar() - PolyAnalytic.z().scale(np.exp(-2j * angle))
        f = _random_f(rng)
        report = sampling.uniqueness_test(f, f + kernel, E, 2)
        assert report.verdict != "equal"


def test_identical_functions_on_two_random_lines_are_equal(rng):
    for _ in range(50):
        a = rng.uniform(0, math.pi)
        b = a + rng.uniform(0.5, math.pi - 0.5)
        f = _random_f(rng)
        report = sampling.uniqueness_test(f, f, sampling.lines_through(0j, [a, b]), 2)
        assert report.verdict == "equal"


def test_fit_on_one_random_line_is_rank_deficient(rng):
    for _ in range(50):
        E = sampling.lines_through(0j, [rng.uniform(0, math.pi)])
        f = _random_f(rng)
        with pytest.raises(RankDeficient):
            sampling.fit_polyanalytic(E.with_values(f.eval(E.points)), q=2, d=1)
