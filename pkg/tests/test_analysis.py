import json
from fractions import Fraction

import numpy as np
import pytest

from cetaev.analysis import (
    AnalysisSettings,
    Verdict,
    analyze,
    build_w_region,
    check_h1,
    check_h2,
    check_h3,
    check_strict_cetaev,
    find_tangent_directions,
    label_regions,
    verify_sandwich,
    w_polynomial,
)
from cetaev.corpus import example_pi, painleve_field
from cetaev.field import PotentialField
from cetaev.poly import Polynomial, homogeneous_parts
from cetaev.sampling import sphere_sample

from oracles import grid_points

x, y = Polynomial.variables(2)
EPS_EXAMPLE = (29 / 60) ** (1 / 12)
SADDLE = y**2 - x**2 + x**3
WELL = -(x**4 + y**4)


@pytest.fixture(scope="module")
def circle():
    return sphere_sample(2)


def exact_point(point):
    return [Fraction(float(v)) for v in point]


def field(p, s=None):
    return PotentialField.from_polynomial(p, s)


# -- H1 --------------------------------------------------------------------------------

def test_h1_refuted_for_example(circle):
    jets = homogeneous_parts(example_pi(), 12)
    res = check_h1(jets, 12, circle)
    assert res.verdict is Verdict.REFUTED
    assert res.witnesses
    for w in res.witnesses:
        ell = int(w.quantity.split("^")[1])
        assert jets.jet(ell).evaluate(exact_point(w.point)) < 0


def test_h1_direct_value_behind_refutation():
    j8 = homogeneous_parts(example_pi(), 8).jet(8)
    v = Fraction(8, 3) * Fraction(3, 10) ** 6 - 3 * Fraction(3, 10) ** 4
    assert j8.evaluate([1, Fraction(3, 10)]) == v < 0


def test_h1_order_11_part_is_nonnegative(circle):
    res = check_h1(homogeneous_parts(example_pi(), 12), 12, circle)
    assert res.details["min_scaled_value_by_order"]["11"] >= -1e-9


def test_h1_vacuous_for_quartic_well(circle):
    res = check_h1(homogeneous_parts(WELL, 4), 4, circle)
    assert res.verdict is Verdict.CERTIFIED
    assert res.margin == 0.0


def test_h1_input_validation(circle):
    with pytest.raises(ValueError):
        check_h1(homogeneous_parts(WELL, 4), 1, circle)


# -- tangent directions and H2 -----------------------------------------------------------

def test_tangent_directions_of_example_include_axis(circle):
    jets = homogeneous_parts(example_pi(), 12)
    t = find_tangent_directions(jets, 12, circle)
    assert len(t) >= 2
    for target in ([1.0, 0.0], [-1.0, 0.0]):
        d = np.linalg.norm(t.directions - np.array(target), axis=1)
        i = int(np.argmin(d))
        assert d[i] < 1e-6
        assert t.values[i] == pytest.approx(-1 / 12, rel=1e-9)
        assert t.exact[i]
    assert np.all(t.residuals <= 1e-9)
    assert np.all(t.values <= -1e-6)


def test_every_direction_is_tangent_for_quartic_well(circle):
    t = find_tangent_directions(homogeneous_parts(WELL, 4), 4, circle)
    assert len(t) == len(circle)


def test_no_tangent_direction_for_positive_definite(circle):
    assert len(find_tangent_directions(homogeneous_parts(x**2 + y**2, 2), 2, circle)) == 0


def test_h2_verdicts(circle):
    jets = homogeneous_parts(example_pi(), 12)
    t = find_tangent_directions(jets, 12, circle)
    assert check_h2(jets, 12, t, circle).verdict is Verdict.CERTIFIED
    pd = homogeneous_parts(x**2 + y**2, 2)
    res = check_h2(pd, 2, find_tangent_directions(pd, 2, circle), circle)
    assert res.verdict is Verdict.REFUTED


def test_h2_cubic_x2y_has_descending_rays(circle):
    # Pi_2 = 0 so every direction is in Z_2, and x^2 y < 0 whenever y < 0, x != 0
    jets = homogeneous_parts(x**2 * y, 3)
    t = find_tangent_directions(jets, 3, circle)
    res = check_h2(jets, 3, t, circle)
    assert res.verdict is Verdict.CERTIFIED
    pts = grid_points(1.0, 41)
    assert np.any((x**2 * y).evaluate_many(pts) < 0)
    assert np.all(t.directions[:, 1] < 0)


def test_h2_inconclusive_when_nothing_decides(circle):
    jets = homogeneous_parts(x**2 * y**2, 4)
    res = check_h2(jets, 4, find_tangent_directions(jets, 4, circle), circle)
    assert res.verdict is Verdict.INCONCLUSIVE


# -- labelling -------------------------------------------------------------------------

def test_quadratic_saddle_has_two_components(circle):
    lab = label_regions(homogeneous_parts(SADDLE, 2), 2, circle, 0.1)
    assert len(lab.groups) == 2
    right, left = lab.component_of([1, 0]), lab.component_of([-1, 0])
    assert right is not None and left is not None and right.id != left.id
    for k in range(4):
        labels = lab.layer_labels[k]
        pts = lab.points(k)
        neg = labels >= 0
        assert np.all(np.abs(pts[neg, 1]) < np.abs(pts[neg, 0]))


def test_example_component_contains_axis(circle):
    lab = label_regions(homogeneous_parts(example_pi(), 12), 12, circle, 0.3)
    assert lab.component_of([1, 0]) is not None
    assert lab.component_of([-1, 0]) is not None


def test_quartic_well_single_component(circle):
    lab = label_regions(homogeneous_parts(WELL, 4), 4, circle, 0.5)
    assert len(lab.groups) == 1
    assert all(m.size == len(circle) for m in lab.groups[0].members)


def test_labelling_invariants(circle):
    lab = label_regions(field(SADDLE), 2, circle, 0.5)
    for k in range(len(lab.radii)):
        neg = lab.values[k] < -lab.zero_tol * lab.radii[k] ** 2
        assert np.array_equal(lab.layer_labels[k] >= 0, neg)
    counts = np.zeros(lab.values.shape, dtype=int)
    for g in lab.groups:
        for k, m in enumerate(g.members):
            counts[k, m] += 1
    assert np.array_equal(counts > 0, lab.layer_labels >= 0)
    assert counts.max() == 1


@pytest.mark.parametrize("p, s", [(WELL, 4), (x**4 - y**4, 4), (x**2 * y - y**3, 3)])
def test_scaling_invariance_for_homogeneous_input(circle, p, s):
    lab = label_regions(homogeneous_parts(p, s), s, circle, 0.5)
    signs = lab.signs()
    for k in range(1, len(lab.radii)):
        assert np.array_equal(signs[k], signs[0])
        assert np.array_equal(lab.layer_labels[k] >= 0, lab.layer_labels[0] >= 0)


def test_tie_breaking_puts_zeros_on_boundary(circle):
    lab = label_regions(homogeneous_parts(x**2 * y**2, 4), 4, circle, 0.5)
    assert len(lab.groups) == 0


def test_label_regions_rejects_bad_input(circle):
    with pytest.raises(ValueError):
        label_regions(field(WELL), 4, circle, 0.0)
    with pytest.raises(TypeError):
        label_regions(WELL, 4, circle, 0.5)


# -- H3 --------------------------------------------------------------------------------

def test_h3_refuted_for_counterexample(circle):
    jets = homogeneous_parts(SADDLE, 2)
    lab = label_regions(jets, 2, circle, 0.5)
    res = check_h3(lab, jets, 2, 0.5)
    assert res.verdict is Verdict.REFUTED
    r2 = jets.jet(2).radial_derivative()
    for w in res.witnesses:
        assert r2.evaluate(exact_point(w.point)) > 0


def test_h3_certified_for_example(circle):
    jets = homogeneous_parts(example_pi(), 12)
    lab = label_regions(jets, 12, circle, EPS_EXAMPLE)
    res = check_h3(lab, jets, 12, EPS_EXAMPLE)
    assert res.verdict is Verdict.CERTIFIED
    axis = lab.component_of([1, 0])
    assert axis.id in res.details["certified_components"]


def test_h3_certified_for_quartic_well(circle):
    jets = homogeneous_parts(WELL, 4)
    res = check_h3(label_regions(jets, 4, circle, 0.5), jets, 4, 0.5)
    assert res.verdict is Verdict.CERTIFIED
    assert res.margin == pytest.approx(-4.0 * 0.5, rel=1e-6)


def test_h3_certification_implies_samples_in_radial_region(circle):
    for p, s, eps in [(example_pi(), 12, EPS_EXAMPLE), (WELL, 4, 0.5), (y**2 - x**4, 4, 0.5)]:
        jets = homogeneous_parts(p, s)
        lab = label_regions(jets, s, circle, eps)
        res = check_h3(lab, jets, s, eps)
        assert res.verdict is Verdict.CERTIFIED
        for gid in res.details["certified_components"]:
            g = lab.groups[gid]
            for k, m in enumerate(g.members):
                assert np.all(lab.radial[k, m] < 0)


def test_doubling_density_never_flips_certified_to_refuted():
    for p, s, eps in [(example_pi(), 12, EPS_EXAMPLE), (WELL, 4, 0.5)]:
        jets = homogeneous_parts(p, s)
        for count in (4096, 8192):
            sample = sphere_sample(2, count)
            res = check_h3(label_regions(jets, s, sample, eps), jets, s, eps)
            assert res.verdict is not Verdict.REFUTED


# -- strict Cetaev -----------------------------------------------------------------------

def test_strict_cetaev_refuted_for_example_on_half_parabola(circle):
    res = check_strict_cetaev(field(example_pi(), 12), EPS_EXAMPLE, circle)
    assert res.verdict is Verdict.REFUTED
    r = example_pi().radial_derivative()
    for w in res.witnesses:
        assert r.evaluate(exact_point(w.point)) >= 0
    near = min(res.witnesses, key=lambda w: abs(abs(w.point[1] / w.point[0] ** 2) - 0.5))
    assert abs(abs(near.point[1] / near.point[0] ** 2) - 0.5) <= 0.05
    # exact scan of y = c x^2 at the witness abscissa: interior points of U with R >= 0
    t = Fraction(float(abs(near.point[0])))
    pi, r = example_pi(), example_pi().radial_derivative()
    hits = [c for c in (Fraction(i, 400) for i in range(180, 261))
            if pi.evaluate([t, c * t * t]) < 0 <= r.evaluate([t, c * t * t])]
    assert hits


def test_strict_cetaev_certified_for_quartic_well(circle):
    res = check_strict_cetaev(field(WELL), 0.5, circle)
    assert res.verdict is Verdict.CERTIFIED
    assert res.margin < -1e-6


def test_strict_cetaev_for_counterexample_per_component(circle):
    res = check_strict_cetaev(field(SADDLE, 2), 0.5, circle, degree=2)
    lab = label_regions(field(SADDLE, 2), 2, circle, 0.5)
    right = lab.component_of([1, 0]).id
    left = lab.component_of([-1, 0]).id
    per = {c["component"]: c["verdict"] for c in res.details["per_component"]}
    assert per[right] == "Refuted"
    assert per[left] == "Certified"
    assert res.verdict is Verdict.CERTIFIED
    assert res.details["certified_component"] == left


def test_counterexample_brute_force_oracle():
    # R = 2 pi + x^3: negative on the closed left part of {pi <= 0}, positive on the right boundary
    pts = grid_points(0.5, 401)
    pts = pts[(np.linalg.norm(pts, axis=1) <= 0.5) & (np.linalg.norm(pts, axis=1) > 1e-3)]
    pi = SADDLE.evaluate_many(pts)
    r = SADDLE.radial_derivative().evaluate_many(pts)
    left = (pi <= 0) & (pts[:, 0] < 0)
    assert np.all(r[left] < 0)
    right = (np.abs(pi) <= 1e-4) & (pts[:, 0] > 0.1)
    assert np.all(r[right] > 0)


def test_counterexample_refuted_on_right_for_large_eps(circle):
    res = check_strict_cetaev(field(SADDLE, 2), 0.9, circle, degree=2)
    per = {c["component"]: c["verdict"] for c in res.details["per_component"]}
    lab = label_regions(field(SADDLE, 2), 2, circle, 0.9)
    right = lab.component_of([1, 0]).id
    assert per[right] == "Refuted"
    worst = {c["component"]: c["max_scaled_radial"] for c in res.details["per_component"]}
    assert worst[right] >= 0
    point = [Fraction(7, 10), Fraction(0)]
    assert SADDLE.evaluate(point) < 0 < SADDLE.radial_derivative().evaluate(point)


# -- W region and sandwich ------------------------------------------------------------------

def test_w_polynomial_homogeneous():
    assert w_polynomial(homogeneous_parts(WELL, 4), 4) == WELL.scale(Fraction(7, 2))


def test_w_polynomial_example_identity():
    jets = homogeneous_parts(example_pi(), 12)
    q = w_polynomial(jets, 12)
    tail = jets.part(12)
    for ell in range(2, 11):
        tail = tail - jets.jet(ell)
    assert jets.jet(12).radial_derivative() == q + tail.scale(Fraction(1, 2))
    assert q.evaluate([1, 0]) == 11 * Fraction(-1, 12) + Fraction(-1, 24)
    assert w_polynomial(jets, 12) == jets.jet(12).scale(11) + tail.scale(Fraction(1, 2))


def test_w_membership():
    region = build_w_region(homogeneous_parts(WELL, 4), 4)
    inside = region.contains(np.array([[0.1, 0.0], [0.0, 0.0], [0.6, 0.0]]), eps=0.5)
    assert inside.tolist() == [True, False, False]


def test_sandwich_quartic_well_holds_at_eps(circle):
    res = verify_sandwich(field(WELL), homogeneous_parts(WELL, 4), 4, 0.5, circle)
    assert res.verdict is Verdict.CERTIFIED
    assert res.margin == 0.5
    assert res.details["schedule"][0]["boundary"] == 0


def test_sandwich_degenerate_saddle(circle):
    p = y**2 - x**4
    res = verify_sandwich(field(p), homogeneous_parts(p, 4), 4, 0.5, circle)
    assert res.verdict is Verdict.CERTIFIED


def test_sandwich_fails_for_x4_minus_y4_plus_y6(circle):
    p = x**4 - y**4 + y**6
    res = verify_sandwich(field(p), homogeneous_parts(p, 4), 4, 0.5, circle)
    assert res.verdict is Verdict.INCONCLUSIVE
    # oracle: Q_W = 7/2 (x^4 - y^4); on |x| = |y| the radial derivative is 6 y^6 > 0
    t = np.linspace(0.01, 0.3, 50)
    pts = np.stack([t, t], axis=1)
    assert np.all(p.radial_derivative().evaluate_many(pts) > 0)


def test_sandwich_fails_for_counterexample(circle):
    res = verify_sandwich(field(SADDLE, 2), homogeneous_parts(SADDLE, 2), 2, 0.5, circle)
    assert res.verdict is Verdict.INCONCLUSIVE
    assert any(w.quantity.startswith("R") and w.value >= 0 for w in res.witnesses)


# -- driver --------------------------------------------------------------------------------

def test_settings_validation():
    with pytest.raises(ValueError):
        AnalysisSettings(zero_tol=0)
    with pytest.raises(ValueError):
        AnalysisSettings(s=1)
    with pytest.raises(ValueError):
        AnalysisSettings(eps=-1)


def test_report_shape_and_contracts():
    rep = analyze(field(example_pi(), 12), AnalysisSettings(s=12, eps=EPS_EXAMPLE))
    doc = rep.to_dict()
    assert list(doc["results"]) == ["H1", "H2", "H3", "strictCetaev", "sandwich"]
    for key in ("s", "eps", "sample_points", "zero_tol", "neg_margin", "eta"):
        assert key in doc["parameters"]
    for res in rep.results.values():
        if res.verdict is Verdict.REFUTED:
            assert res.witnesses
        if res.verdict is Verdict.CERTIFIED:
            assert res.margin is not None
    json.dumps(doc)


def test_callable_field_gets_inconclusive_jet_checks():
    rep = analyze(painleve_field(), AnalysisSettings(eps=0.5))
    for key in ("H1", "H2", "H3", "sandwich"):
        assert rep.verdict(key) is Verdict.INCONCLUSIVE
