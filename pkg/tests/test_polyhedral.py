"""
Polyhedral toolkit: LP with duals, vertex and ray enumeration, projection.
"""
import numpy as np
import pytest

from dc_modules.errors import ArgumentError, EmptyPolyhedron, ScaleError
from dc_modules.polyhedral import (
    STATUS_INFEASIBLE,
    STATUS_UNBOUNDED,
    Polyhedron,
    bounding_box,
    chebyshev_radius,
    distance_batch,
    enumerate_extreme_rays,
    enumerate_vertices,
    is_empty,
    lp_solve,
    project,
    project_batch,
)


def unit_square():
    return Polyhedron.from_box([0.0, 0.0], [1.0, 1.0])


class TestPolyhedron:
    def test_box_contains(self):
        P = unit_square()
        assert P.contains([0.5, 0.5])
        assert not P.contains([1.5, 0.5])
        assert P.contains(np.array([[0.0, 0.0], [2.0, 0.0]])).tolist() == [True, False]

    def test_from_geq(self):
        P = Polyhedron.from_geq([[1.0, 1.0]], [1.0])
        assert P.contains([1.0, 0.0])
        assert not P.contains([0.0, 0.0])

    def test_row_mismatch(self):
        with pytest.raises(ArgumentError):
            Polyhedron([[1.0, 0.0]], [1.0, 2.0])

    def test_empty_rows_need_dim(self):
        with pytest.raises(ArgumentError):
            Polyhedron(np.zeros((0,)), [])
        assert Polyhedron(np.zeros((0, 3)), [], dim=3).dim == 3

    def test_dict_round_trip(self):
        P = Polyhedron([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0], eq_rows=[1])
        Q = Polyhedron.from_dict(P.to_dict())
        assert np.array_equal(P.A, Q.A) and Q.eq_rows == (1,)

    def test_read_only(self):
        P = unit_square()
        with pytest.raises(ValueError):
            P.A[0, 0] = 5.0


class TestLinearProgramming:
    def test_optimal_with_dual(self):
        res = lp_solve([-1.0, -1.0], unit_square())
        assert res.optimal
        assert res.value == pytest.approx(-2.0)
        assert np.allclose(res.point, [1.0, 1.0])
        assert res.duality_gap <= 1e-8
        assert np.all(res.dual >= -1e-9)

    def test_max_sense(self):
        res = lp_solve([1.0, 2.0], unit_square(), "max")
        assert res.value == pytest.approx(3.0)

    def test_unbounded(self):
        P = Polyhedron.from_geq(np.eye(2), [0.0, 0.0])
        assert lp_solve([-1.0, 0.0], P).status == STATUS_UNBOUNDED

    def test_infeasible(self):
        P = Polyhedron([[1.0], [-1.0]], [0.0, -1.0])
        assert lp_solve([1.0], P).status == STATUS_INFEASIBLE
        assert is_empty(P)

    def test_beyond_enumeration_caps(self):
        P = Polyhedron.from_box(np.zeros(20), np.ones(20))
        assert P.n_rows > 24
        res = lp_solve(np.ones(20), P, "max")
        assert res.optimal and res.value == pytest.approx(20.0)
        with pytest.raises(ScaleError):
            enumerate_vertices(P)

    def test_bad_sense(self):
        with pytest.raises(ArgumentError):
            lp_solve([1.0, 1.0], unit_square(), "sideways")

    def test_bounding_box(self):
        P = Polyhedron.from_geq([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [0.0, 0.0, -1.0])
        lo, hi = bounding_box(P)
        assert np.allclose(lo, [0.0, 0.0]) and np.allclose(hi, [1.0, 1.0])

    def test_bounding_box_empty(self):
        with pytest.raises(EmptyPolyhedron):
            bounding_box(Polyhedron([[1.0], [-1.0]], [0.0, -1.0]))

    def test_chebyshev_radius(self):
        assert chebyshev_radius(unit_square()) == pytest.approx(0.5)
        flat = Polyhedron([[1.0, 0.0]], [0.0], eq_rows=[0])
        assert chebyshev_radius(flat) == 0.0


class TestEnumeration:
    def test_square_vertices(self):
        verts = enumerate_vertices(unit_square())
        assert verts.status == "ok"
        got = {tuple(np.round(v, 9)) for v in verts.points}
        assert got == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}

    def test_vertices_are_deterministic(self):
        a = enumerate_vertices(unit_square()).points
        b = enumerate_vertices(unit_square()).points
        assert np.array_equal(a, b)

    def test_empty_and_line(self):
        assert enumerate_vertices(Polyhedron([[1.0], [-1.0]], [0.0, -1.0])).status == "empty"
        halfplane = Polyhedron([[1.0, 0.0]], [0.0])
        assert enumerate_vertices(halfplane).status == "no_vertices"

    def test_scale_cap(self):
        P = Polyhedron.from_box(np.zeros(13), np.ones(13))
        with pytest.raises(ScaleError):
            enumerate_vertices(P)

    def test_orthant_rays(self):
        cone = Polyhedron(-np.eye(2), np.zeros(2))
        rays = enumerate_extreme_rays(cone)
        assert rays.lineality_dim == 0
        assert {tuple(r) for r in rays.directions} == {(1.0, 0.0), (0.0, 1.0)}

    def test_lineality(self):
        cone = Polyhedron([[0.0, -1.0]], [0.0])
        rays = enumerate_extreme_rays(cone)
        assert rays.lineality_dim == 1
        got = {tuple(r) for r in rays.directions}
        assert {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)} <= got

    def test_pointed_trivial_cone(self):
        cone = Polyhedron(np.vstack([np.eye(2), -np.eye(2)]), np.zeros(4))
        assert len(enumerate_extreme_rays(cone)) == 0

    def test_rays_need_homogeneous(self):
        with pytest.raises(ArgumentError):
            enumerate_extreme_rays(unit_square())


class TestProjection:
    def test_project_outside_point(self):
        assert np.allclose(project([2.0, 0.5], unit_square()), [1.0, 0.5])
        assert np.allclose(project([2.0, 3.0], unit_square()), [1.0, 1.0])

    def test_inside_point_is_fixed(self):
        assert np.allclose(project([0.25, 0.75], unit_square()), [0.25, 0.75])

    def test_distance_matches_closed_form(self, rng):
        X = rng.normal(scale=3.0, size=(50, 2))
        clipped = np.clip(X, 0.0, 1.0)
        assert np.allclose(distance_batch(X, unit_square()), np.linalg.norm(X - clipped, axis=1), atol=1e-9)

    def test_halfspace_projection(self):
        P = Polyhedron([[1.0, 1.0]], [1.0])
        Y = project_batch([[1.0, 1.0], [0.0, 0.0]], P)
        assert np.allclose(Y, [[0.5, 0.5], [0.0, 0.0]])

    def test_projection_onto_empty(self):
        with pytest.raises(EmptyPolyhedron):
            project([0.0], Polyhedron([[1.0], [-1.0]], [0.0, -1.0]))
