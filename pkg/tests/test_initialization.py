import math

import numpy as np
import pytest

from oracles import HEPTAGON, SQUARE10
from polycover.errors import InfeasibleFit, InvalidArgument
from polycover.geometry import CircleConfiguration, ConvexPolygon, signed_distance
from polycover.initialization import (
    InitParams,
    corner_slots,
    filter_and_insert,
    fit_lattice,
    full_layer_count,
    generate_hex_lattice,
    initialize,
    principal_direction,
)


def pairwise(points):
    d = np.hypot(*(points[:, None, :] - points[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    return d


@pytest.mark.parametrize("layers, count", [(0, 1), (1, 7), (2, 19), (3, 37), (4, 61)])
def test_full_layer_counts(layers, count):
    assert full_layer_count(layers) == count
    lat = generate_hex_lattice(count, 1.0)
    assert lat.n == count and lat.layers == layers


def test_lattice_spacing_and_rotational_symmetry():
    r = 0.7
    lat = generate_hex_lattice(37, r)
    d = pairwise(lat.points)
    assert d.min() == pytest.approx(2 * r, rel=1e-12)
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    rotated = lat.points @ np.array([[c, -s], [s, c]]).T
    # every rotated point coincides with a lattice point
    assert np.hypot(*(rotated[:, None, :] - lat.points[None]).transpose(2, 0, 1)).min(axis=1).max() < 1e-9


def test_lattice_bounding_boxes():
    assert generate_hex_lattice(7, 1.0).bounding_box == pytest.approx((4.0, 2 * math.sqrt(3)))
    assert generate_hex_lattice(19, 1.0).bounding_box == pytest.approx((8.0, 4 * math.sqrt(3)))


def test_truncation_keeps_nearest_points():
    lat = generate_hex_lattice(10, 1.0)
    radii = np.hypot(*lat.points.T)
    assert lat.n == 10 and lat.layers == 2
    assert radii.max() == pytest.approx(2 * math.sqrt(3))
    assert np.all(np.diff(np.round(radii, 9)) >= 0)


def test_lattice_is_deterministic():
    np.testing.assert_array_equal(generate_hex_lattice(23, 1.0).points, generate_hex_lattice(23, 1.0).points)


def test_params_validation():
    with pytest.raises(InvalidArgument):
        InitParams(n=5, r=1.0, alpha_safety=0.97)
    with pytest.raises(InvalidArgument):
        InitParams(n=0, r=1.0)
    with pytest.raises(InvalidArgument):
        generate_hex_lattice(3, -1.0)


def test_principal_direction_follows_long_side():
    u, angle = principal_direction(ConvexPolygon([(0, 0), (2, 0), (2, 6), (0, 6)]))
    assert abs(u[1]) == pytest.approx(1.0)
    assert angle == pytest.approx(math.pi / 2)


def test_fit_lattice_scale_and_centre():
    poly = ConvexPolygon(SQUARE10)
    params = InitParams(n=7, r=1.0, alpha_safety=0.92)
    cfg = fit_lattice(generate_hex_lattice(7, 1.0), poly, params)
    beta = 0.92 * min(8 / 4, 8 / (2 * math.sqrt(3)))
    assert pairwise(cfg.centers).min() == pytest.approx(2 * beta, rel=1e-12)
    mid = 0.5 * (cfg.centers.max(axis=0) + cfg.centers.min(axis=0))
    np.testing.assert_allclose(mid, [5, 5], atol=1e-12)


def test_fit_lattice_infeasible():
    poly = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    with pytest.raises(InfeasibleFit):
        fit_lattice(generate_hex_lattice(7, 1.0), poly, InitParams(n=7, r=1.0))


def test_corner_slots_in_square():
    slots = corner_slots(ConvexPolygon(SQUARE10), 1.0)
    assert sorted(map(tuple, np.round(slots, 12))) == [(1, 1), (1, 9), (9, 1), (9, 9)]


def test_corner_slots_tangent_to_both_edges():
    poly = ConvexPolygon(HEPTAGON)
    slots = corner_slots(poly, 0.3)
    d = poly.edge_distances(slots)
    # each slot sits at distance r from exactly two edge lines (its corner's)
    assert np.all(np.sum(np.isclose(d, 0.3, atol=1e-12), axis=1) >= 2)


def test_filter_removes_boundary_circles_and_refills():
    poly = ConvexPolygon(SQUARE10)
    cfg = CircleConfiguration(np.array([[0.5, 5.0], [5.0, 5.0], [9.9, 9.9]]), 1.0)
    out = filter_and_insert(cfg, poly, InitParams(n=3, r=1.0))
    assert out.n == 3
    assert np.all(signed_distance(out.centers, poly) >= 0.98 - 1e-12)
    assert pairwise(out.centers).min() >= 2 * (1 - 0.05) - 1e-12


@pytest.mark.parametrize("n", [1, 2, 7, 19, 50])
def test_initialize_returns_n_interior_circles(n):
    poly = ConvexPolygon(HEPTAGON)
    cfg = initialize(poly, InitParams(n=n, r=0.3, seed=1))
    assert cfg.n == n
    assert np.all(signed_distance(cfg.centers, poly) > 0)


def test_heptagon_init_inset():
    poly = ConvexPolygon(HEPTAGON)
    cfg = initialize(poly, InitParams(n=19, r=0.5))
    assert cfg.n == 19
    assert signed_distance(cfg.centers, poly).min() >= 0.98 * 0.5 - 1e-12


def test_initialize_deficit_filled_deterministically():
    poly = ConvexPolygon([(0, 0), (3, 0), (3, 3), (0, 3)])
    a = initialize(poly, InitParams(n=12, r=1.0, seed=5))
    b = initialize(poly, InitParams(n=12, r=1.0, seed=5))
    assert a.n == 12
    np.testing.assert_array_equal(a.centers, b.centers)
