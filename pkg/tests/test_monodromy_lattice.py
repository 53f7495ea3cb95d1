"""Lattice charts, transport, unwinding, Pick counting."""

import math

import numpy as np
import pytest

from champagne.errors import ChartError, DomainError, TransportError
from champagne.monodromy_lattice import (ChartTransition, SpectrumPolygon,
                                         count_in_polygon, fit_local_chart,
                                         l0_line, lattice_point_in_polygon,
                                         make_loop_polygon, pick_count,
                                         transport_chart, unwind,
                                         winding_around_origin)

H = 1e-3


def square_lattice(m=10):
    ij = np.array([[i, j] for i in range(-m, m + 1)
                   for j in range(-m, m + 1)], dtype=float)
    return ij, H * ij


def test_chart_on_exact_lattice():
    ij, pts = square_lattice()
    chart = fit_local_chart(pts, (0, 0), H, radius=4 * H)
    assert chart.residual < 1e-12
    # the fitted linear part is h * (an integer unimodular matrix)
    m = chart.linear
    assert np.allclose(m, np.rint(m), atol=1e-10)
    assert abs(round(np.linalg.det(np.rint(m)))) == 1


def test_chart_on_sheared_lattice():
    ij, _ = square_lattice()
    M = np.array([[1.0, 0.3], [0.0, 1.0]])
    pts = (H * ij) @ M.T
    chart = fit_local_chart(pts, (0, 0), H, radius=4 * H)
    assert chart.residual < 1e-10
    # linear inverts the shear up to a left GL(2, Z) factor
    g = chart.linear @ M
    assert np.allclose(g, np.rint(g), atol=1e-8)
    assert abs(round(np.linalg.det(np.rint(g)))) == 1


def test_chart_tolerates_bounded_noise():
    ij, pts = square_lattice()
    rng = np.random.default_rng(1)
    noisy = pts + 0.02 * H * rng.uniform(-1, 1, pts.shape)
    chart = fit_local_chart(noisy, (0, 0), H, radius=4 * H)
    assert chart.residual <= 0.05


def test_chart_needs_enough_points():
    _, pts = square_lattice(1)
    with pytest.raises(ChartError):
        fit_local_chart(pts[:4], (0, 0), H, radius=10 * H)


def test_chart_rejects_large_distortion():
    ij, pts = square_lattice()
    warped = pts + 0.2 * H * np.sin(ij[:, :1] * 2.0)
    with pytest.raises(ChartError):
        fit_local_chart(warped, (0, 0), H, radius=8 * H)


def test_transport_keeps_the_frame():
    _, pts = square_lattice()
    chart = fit_local_chart(pts, (0, 0), H, radius=4 * H)
    moved, trans = transport_chart(chart, (3 * H, H), pts, radius=4 * H)
    probe = np.array([[2 * H, 2 * H]])
    assert np.array_equal(chart.labels(probe), moved.labels(probe))
    assert abs(round(np.linalg.det(trans.matrix))) == 1


def test_transport_needs_overlap():
    _, pts = square_lattice()
    chart = fit_local_chart(pts, (-8 * H, -8 * H), H, radius=3 * H)
    with pytest.raises(TransportError):
        transport_chart(chart, (8 * H, 8 * H), pts, radius=3 * H)


def test_transition_algebra():
    t = ChartTransition(np.array([[1, 1], [0, 1]]), np.array([2, -1]))
    u = t.compose(t.inverse())
    assert u.is_identity()
    k = np.array([3, 4])
    assert np.array_equal(t.inverse().apply(t.apply(k)), k)
    with pytest.raises(ChartError):
        ChartTransition(np.array([[2, 0], [0, 1]]), np.zeros(2, dtype=int))


# --- exact lattice geometry -------------------------------------------------

def test_pick_unit_square():
    assert pick_count([(0, 0), (1, 0), (1, 1), (0, 1)]) == 4


def test_pick_triangle():
    assert pick_count([(0, 0), (2, 0), (0, 2)]) == 6


def test_pick_orientation_independent():
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert pick_count(square) == pick_count(list(reversed(square)))


def test_pick_rejects_degenerate():
    with pytest.raises(DomainError):
        pick_count([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DomainError):
        pick_count([(0, 0), (1, 0), (1, 0), (0, 1)])
    with pytest.raises(DomainError):
        pick_count([(0, 0), (3, 1), (3, -1), (0, 2)])  # crossing edges


def random_simple_polygon(rng):
    """Star-shaped polygon through random integer points in [-20, 20]^2."""
    while True:
        m = int(rng.integers(3, 9))
        pts = rng.integers(-20, 21, (m, 2))
        if len({tuple(p) for p in pts}) < m:
            continue
        c = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
        v = [tuple(map(int, pts[i])) for i in order]
        try:
            pick_count(v)
        except DomainError:
            continue
        return v


def test_pick_against_brute_force_100_polygons():
    rng = np.random.default_rng(42)
    for _ in range(100):
        v = random_simple_polygon(rng)
        xs = [p[0] for p in v]
        ys = [p[1] for p in v]
        brute = sum(lattice_point_in_polygon((x, y), v)
                    for x in range(min(xs), max(xs) + 1)
                    for y in range(min(ys), max(ys) + 1))
        assert pick_count(v) == brute, v


def test_point_in_polygon_boundary_inclusive():
    sq = [(0, 0), (4, 0), (4, 4), (0, 4)]
    assert lattice_point_in_polygon((0, 2), sq)
    assert lattice_point_in_polygon((2, 2), sq)
    assert not lattice_point_in_polygon((5, 2), sq)
    assert not lattice_point_in_polygon((-1, 0), sq)


# --- real spectra -------------------------------------------------------------

def exact_line_count(spectrum, polygon):
    """Chart-free oracle: per line, the points between its two vertices."""
    per = {}
    for v in polygon.vertices:
        per.setdefault(v.n, []).append(v.x)
    total = 0
    for n, xs in per.items():
        lo, hi = min(xs), max(xs)
        total += sum(1 for p in spectrum.line(n) if lo <= p.x <= hi)
    return total


def test_unwind_enclosing_loop(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 20.0, seed=0)
    res = unwind(poly, spec_h5em3)
    assert res.closed
    M = res.monodromy.matrix
    assert int(np.trace(M)) == 2
    assert round(float(np.linalg.det(M))) == 1
    assert not res.monodromy.is_identity()
    I = np.eye(2, dtype=int)
    assert np.array_equal((M - I) @ (M - I), 0 * I)


def test_unwind_non_enclosing_is_identity(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 4.0, n_top=3, seed=1,
                             center=(18.0, 6.0), enclosing=False)
    res = unwind(poly, spec_h5em3)
    assert res.monodromy.is_identity()
    assert res.closed


def test_count_equality_and_oracle(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 18.0, seed=7)
    n_spec, n_pick = count_in_polygon(spec_h5em3, poly)
    assert n_spec == n_pick
    assert n_spec == exact_line_count(spec_h5em3, poly)


def test_count_non_enclosing(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 4.0, n_top=3, seed=2,
                             center=(-18.0, -5.0), enclosing=False)
    assert winding_around_origin(poly.vertex_points()) == 0
    n_spec, n_pick = count_in_polygon(spec_h5em3, poly)
    assert n_spec == n_pick == exact_line_count(spec_h5em3, poly)


def test_enclosing_must_start_on_l0(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 18.0, seed=3)
    shifted = SpectrumPolygon(vertices=poly.vertices[5:] + poly.vertices[:5],
                              starts_on_L0=False)
    with pytest.raises(DomainError):
        count_in_polygon(spec_h5em3, shifted)


def test_l0_line_is_the_n0_line(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 20.0, seed=0)
    res = unwind(poly, spec_h5em3)
    fixed = l0_line(spec_h5em3, res.charts, res.monodromy)
    assert len(fixed) > 0
    assert all(p.n == 0 for p in fixed)


def test_l0_line_identity_monodromy_warns(spec_h5em3):
    poly = make_loop_polygon(spec_h5em3, 4.0, n_top=3, seed=1,
                             center=(18.0, 6.0), enclosing=False)
    res = unwind(poly, spec_h5em3)
    with pytest.warns(UserWarning):
        assert l0_line(spec_h5em3, res.charts, res.monodromy) == []


def test_chain_failure_names_the_segment(spec_h5em3):
    # a polygon with a huge jump cannot be glued; the error says where
    verts = [spec_h5em3.line(0)[0], spec_h5em3.line(20)[-1],
             spec_h5em3.line(-20)[0]]
    poly = SpectrumPolygon(vertices=verts, starts_on_L0=True)
    with pytest.raises((ChartError, TransportError), match="segment"):
        unwind(poly, spec_h5em3)
