import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpmult.circle_geometry import (Arc, ClosedCircleSet, GeometryError, StarDomain, Triangle,
                                    build_star_domain, chordal_dist, complementary_arcs,
                                    contains, inscribed_constant, inscribed_seed,
                                    probe_circle_inside, vinogradov_contains)
from lpmult.lp_sets import generate_dyadic_gap

PI = math.pi
FOUR = ClosedCircleSet.from_angles([0, PI / 2, PI, 1.5 * PI])


def valid_sets():
    """Random valid sets: sorted distinct angles with every gap below pi."""
    def build(raw):
        angles = np.cumsum(np.asarray(raw, dtype=float))
        angles = angles / angles[-1] * 2 * PI
        return ClosedCircleSet.from_angles(angles[:-1].tolist() + [0.0])
    return (st.lists(st.floats(0.05, 1.0), min_size=4, max_size=12)
            .filter(lambda r: max(r) / sum(r) * 2 * PI < PI * 0.98)
            .map(build))


class TestClosedCircleSet:
    def test_four_points_give_quarter_arcs(self):
        lengths = [a.length for a in complementary_arcs(FOUR)]
        assert np.allclose(lengths, [PI / 2] * 4, atol=1e-15)

    def test_hand_enumerated_gaps(self):
        F = ClosedCircleSet.from_angles([0, PI / 8, PI / 4, PI / 2, PI, 1.5 * PI])
        lengths = [a.length for a in complementary_arcs(F)]
        assert np.allclose(lengths, [PI / 8, PI / 8, PI / 4, PI / 2, PI / 2, PI / 2])
        assert math.isclose(sum(lengths), 2 * PI, abs_tol=1e-12)

    def test_half_circle_gap_is_rejected(self):
        with pytest.raises(GeometryError):
            ClosedCircleSet.from_angles([0, PI])

    def test_needs_two_points(self):
        with pytest.raises(GeometryError):
            ClosedCircleSet((0.0,))

    def test_unsorted_points_rejected(self):
        with pytest.raises(GeometryError):
            ClosedCircleSet((1.0, 0.5, 3.0, 4.5))

    def test_from_angles_wraps_and_dedupes(self):
        F = ClosedCircleSet.from_angles([2 * PI, PI / 2, PI, 1.5 * PI, 0.0])
        assert F.points == (0.0, PI / 2, PI, 1.5 * PI)

    def test_record_roundtrip(self):
        F = generate_dyadic_gap(4)
        assert ClosedCircleSet.from_record(F.to_record()) == F

    def test_arc_length_bounds(self):
        with pytest.raises(GeometryError):
            Arc(0.0, PI)
        with pytest.raises(GeometryError):
            Arc(0.0, 0.0)

    @given(valid_sets())
    @settings(max_examples=60, deadline=None)
    def test_arcs_partition_circle(self, F):
        total = sum(a.length for a in complementary_arcs(F))
        assert abs(total - 2 * PI) <= 1e-12


class TestChordalDistance:
    def test_equidistant_point(self):
        F = ClosedCircleSet.from_angles([0, PI / 2, PI, 1.5 * PI])
        G = ClosedCircleSet.from_angles([0, 0.9 * PI, PI, 1.9 * PI])
        assert math.isclose(chordal_dist(PI / 2, FOUR), 0.0, abs_tol=0)
        assert chordal_dist(0.0, F) == 0.0
        assert math.isclose(chordal_dist(PI / 2, G), 2 * math.sin(0.2 * PI), rel_tol=1e-14)

    def test_two_point_closed_form(self):
        # {0, pi} itself is invalid, so evaluate the min over s in {0, pi} on a valid superset
        F = ClosedCircleSet.from_angles([0, PI, 1.5 * PI, 0.5 * PI + 1e-9])
        d = min(2 * abs(math.sin((PI / 6 - s) / 2)) for s in (0, PI))
        assert math.isclose(d, 0.517638, abs_tol=1e-6)
        assert math.isclose(chordal_dist(PI / 6, F), d, rel_tol=1e-12)

    def test_midpoint_of_quarter_arc(self):
        # {0, pi} has a half-circle gap, so check the same closed form on the 4-point set
        assert math.isclose(chordal_dist(PI / 4, FOUR), 2 * math.sin(PI / 8), rel_tol=1e-14)
        assert math.isclose(2 * abs(math.sin(PI / 4)), math.sqrt(2), rel_tol=1e-15)

    @given(valid_sets())
    @settings(max_examples=40, deadline=None)
    def test_zero_on_set(self, F):
        assert np.all(chordal_dist(F.angles, F) == 0.0)

    @given(st.floats(0, 2 * PI), st.floats(0, 2 * PI), st.floats(0, 2 * PI))
    def test_chord_metric_triangle_inequality(self, a, b, c):
        def d(x, y):
            return 2 * abs(math.sin((x - y) / 2))
        assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


class TestStarDomain:
    def test_symmetric_base_angles(self):
        dom = build_star_domain(FOUR, PI / 6)
        assert np.allclose([t.base_angle for t in dom.triangles], PI / 6 + PI / 4)
        assert math.isclose(dom.theta_min, PI / 6, rel_tol=1e-14)

    def test_dyadic_theta_min(self):
        dom = build_star_domain(generate_dyadic_gap(8), PI / 12)
        assert math.isclose(dom.theta_min, PI / 12, rel_tol=1e-14)

    @pytest.mark.parametrize("theta0", [0.0, -0.1])
    def test_nonpositive_theta0_rejected(self, theta0):
        with pytest.raises(GeometryError):
            build_star_domain(FOUR, theta0)

    def test_clamp_keeps_base_angle_acute(self):
        dom = build_star_domain(FOUR, PI / 3)
        for tri in dom.triangles:
            assert tri.base_angle < PI / 2
            assert tri.theta > 0

    def test_apex_outside_disk(self):
        for tri in build_star_domain(generate_dyadic_gap(5), 0.2).triangles:
            p1, apex, p2 = tri.vertices()
            assert abs(apex) > 1

    def test_membership_examples(self):
        dom = build_star_domain(FOUR, PI / 6)
        assert contains(dom, 0j)
        assert not contains(dom, 2.0)
        # the arc midpoint pushed just outside the circle stays under the apex
        tri = dom.triangles[0]
        height = abs(tri.vertices()[1]) - 1.0
        assert contains(dom, (1 + 0.5 * height) * np.exp(1j * PI / 4))
        assert not contains(dom, (1 + 1.5 * height) * np.exp(1j * PI / 4))

    def test_membership_matches_triangle_oracle(self):
        # oracle: barycentric coordinates against the explicit vertices
        dom = build_star_domain(FOUR, 0.4)
        rng = np.random.default_rng(5)
        z = rng.uniform(-3, 3, 4000) + 1j * rng.uniform(-3, 3, 4000)
        expected = np.abs(z) < 1
        for tri in dom.triangles:
            a, b, c = tri.vertices()
            m = np.array([[b.real - a.real, c.real - a.real], [b.imag - a.imag, c.imag - a.imag]])
            uv = np.linalg.solve(m, np.array([z.real - a.real, z.imag - a.imag]))
            u, v = uv
            expected |= (u > 0) & (v > 0) & (u + v < 1)
        away = np.abs(np.abs(z) - 1) > 1e-9
        assert np.array_equal(contains(dom, z)[away], expected[away])

    @given(st.floats(0, 2 * PI), st.floats(0.01, 3.0), st.floats(0.0, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_star_shaped_about_origin(self, t, r, s):
        dom = build_star_domain(generate_dyadic_gap(4), PI / 6)
        z = r * np.exp(1j * t)
        if contains(dom, z) and abs(z) < 1:
            assert contains(dom, s * z)

    def test_distance_zero_inside(self):
        dom = build_star_domain(FOUR, PI / 6)
        assert dom.distance(0.5 + 0.5j) == 0.0
        assert 0.0 < dom.distance(5.0) <= 4.0

    def test_record_roundtrip(self):
        dom = build_star_domain(generate_dyadic_gap(3), 0.3)
        again = StarDomain.from_record(dom.to_record())
        assert again.to_record() == dom.to_record()


class TestInscribedConstant:
    def test_symmetric_seed_and_range(self):
        dom = build_star_domain(FOUR, PI / 4)
        c = inscribed_constant(dom)
        assert 0 < c <= 1
        assert c >= 0.5 * math.sin(PI / 8)
        assert inscribed_seed(dom) == pytest.approx(0.5 * math.sin(dom.theta_min / 2))

    def test_monotone_in_angle(self):
        c_small = inscribed_constant(build_star_domain(FOUR, PI / 12))
        c_large = inscribed_constant(build_star_domain(FOUR, PI / 6))
        assert c_small <= c_large + 1e-4

    def test_circle_at_arc_midpoint_fits(self):
        dom = build_star_domain(FOUR, PI / 6)
        assert probe_circle_inside(dom, PI / 4, 0.5 * inscribed_constant(dom))

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            inscribed_constant(build_star_domain(FOUR, PI / 6), samples=8)

    def test_cauchy_disks_stay_inside(self):
        dom = build_star_domain(generate_dyadic_gap(8), PI / 6)
        c = dom.inscribed_constant()
        t = np.random.default_rng(1).uniform(0, 2 * PI, 10_000)
        t = t[chordal_dist(t, dom.set) > 0]
        assert np.all(probe_circle_inside(dom, t, c, probes=256))


class TestVinogradov:
    def test_examples(self):
        assert vinogradov_contains(2.0, PI / 4, 0j)
        assert not vinogradov_contains(2.0, PI / 4, 1 + 0j)
        # arg(i) = pi/2 lies in (pi/4, 7pi/4) and |1 + i| < 2
        assert vinogradov_contains(2.0, PI / 4, 1 + 1j)
        assert not vinogradov_contains(2.0, PI / 4, 1.5 + 0.1j)

    def test_parameter_checks(self):
        with pytest.raises(GeometryError):
            vinogradov_contains(1.0, 0.1, 0j)


def test_triangle_rejects_obtuse_base():
    with pytest.raises(GeometryError):
        Triangle(Arc(0.0, 1.0), PI / 2)
