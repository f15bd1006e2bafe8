"""
Parametric QP value function: copositivity, domain certificates, KKT solving,
pieces and dc decompositions.
"""
import numpy as np
import pytest

from dc_modules.convex_core import Domain
from dc_modules.errors import (
    ArgumentError,
    FailedCopositivity,
    NotInDomain,
    NotPositiveDefinite,
    RegionNotInDomain,
    ScaleError,
)
from dc_modules.qp_value import (
    QpInstance,
    RecourseMap,
    RecourseScenario,
    check_copositive,
    dom_certificate,
    dom_convexity_certificate,
    dom_membership,
    enumerate_pieces,
    find_descent_ray,
    parse_instance,
    pd_value_dc,
    qp_solve,
    qp_value_batch,
    recourse_dc,
    value_dc,
)
from dc_modules.verification import check_convexity, check_dc_identity


def brute_force(inst, q, b, lo=-3.0, hi=3.0, step=1e-3):
    """Grid minimum of a one-dimensional QP over [lo, hi]."""
    z = np.concatenate([np.arange(lo, hi + step, step), b / inst.D[:, 0]])
    feasible = np.all(np.outer(z, inst.D[:, 0]) >= b - 1e-12, axis=1)
    values = q[0] * z + 0.5 * inst.Q[0, 0] * z * z
    return float(values[feasible].min())


class TestInstance:
    def test_validation(self):
        with pytest.raises(ArgumentError):
            QpInstance([[1.0, 0.0]], [[1.0, 0.0]])
        with pytest.raises(ArgumentError):
            QpInstance([[1.0, 2.0], [0.0, 1.0]], np.eye(2))
        with pytest.raises(ArgumentError):
            QpInstance([[1.0]], [[1.0, 1.0]])
        with pytest.raises(ScaleError):
            QpInstance(np.eye(9), np.eye(9))

    def test_matrices_are_read_only(self, qp_scalar):
        with pytest.raises(ValueError):
            qp_scalar.Q[0, 0] = 3.0

    def test_parse_instance(self):
        inst = parse_instance({"Q": [[2.0]], "D": [[1.0]]})
        assert inst.m == 1 and inst.k == 1 and inst.n_params == 2

    def test_split(self, qp_saddle):
        q, b = qp_saddle.split([1.0, 2.0, 3.0, 4.0])
        assert q.tolist() == [1.0, 2.0] and b.tolist() == [3.0, 4.0]
        with pytest.raises(ArgumentError):
            qp_saddle.split([1.0])


class TestCopositivity:
    def test_orthant_pass(self, qp_saddle):
        assert qp_saddle.verdict.status == "ray_pass"
        assert qp_saddle.verdict.n_rays == 2

    def test_failure_has_witness(self):
        verdict = check_copositive([[-1.0]], [[1.0]])
        assert verdict.status == "fail"
        assert verdict.witness.tolist() == [1.0]

    def test_no_rays(self):
        verdict = check_copositive([[-1.0]], [[1.0], [-1.0]])
        assert verdict.status == "ray_pass" and verdict.n_rays == 0

    def test_failed_instance_blocks_domain(self):
        inst = QpInstance([[-1.0]], [[1.0]])
        with pytest.raises(FailedCopositivity):
            dom_certificate(inst, [0.0], [0.0])


class TestDomain:
    def test_pd_domain_is_everything(self, qp_scalar):
        assert dom_membership(qp_scalar, [-5.0], [3.0])
        assert dom_convexity_certificate(qp_scalar) == "psd"

    def test_linear_objective(self):
        inst = QpInstance([[0.0]], [[1.0]])
        assert dom_membership(inst, [1.0], [0.0])
        assert not dom_membership(inst, [-1.0], [0.0])
        assert len(inst.dom_generators) == 1

    def test_saddle_domain(self, qp_saddle):
        assert dom_membership(qp_saddle, [1.0, 1.0], [0.0, 0.0])
        assert dom_membership(qp_saddle, [-1.0, 0.0], [0.0, 1.0])      # q1 + b2 >= 0
        cert = dom_certificate(qp_saddle, [-1.0, 0.0], [0.0, 0.0])
        assert cert.feasible and not cert.member
        assert min(cert.margins) == pytest.approx(-1.0)

    def test_trivial_recession(self):
        inst = QpInstance([[-1.0]], [[1.0], [-1.0]])
        assert dom_convexity_certificate(inst) == "trivial_recession"

    def test_infeasible_parameters(self):
        inst = QpInstance([[1.0]], [[1.0], [-1.0]])
        cert = dom_certificate(inst, [0.0], [1.0, 0.0])     # z >= 1 and z <= 0
        assert not cert.feasible and not cert.member

    def test_descent_ray(self, qp_saddle):
        ray = find_descent_ray(qp_saddle, [-1.0, 0.0], [0.0, 0.0])
        assert ray is not None
        assert ray.objective <= -1e6
        assert np.all(ray.v >= 0.0)

    def test_no_descent_ray_inside_domain(self, qp_saddle):
        assert find_descent_ray(qp_saddle, [1.0, 1.0], [0.0, 0.0]) is None


class TestSolve:
    @pytest.mark.parametrize("q,b,value,z", [
        (-2.0, 0.0, -1.0, 1.0),
        (2.0, 0.0, 0.0, 0.0),
        (0.0, 1.0, 1.0, 1.0),
    ])
    def test_scalar(self, qp_scalar, q, b, value, z):
        sol = qp_solve(qp_scalar, [q], [b])
        assert sol.value == pytest.approx(value)
        assert sol.minimizer[0] == pytest.approx(z)

    def test_scalar_against_grid(self, qp_scalar, rng):
        for q, b in rng.uniform(-2.0, 2.0, size=(10, 2)):
            got = qp_solve(qp_scalar, [q], [b]).value
            assert abs(got - brute_force(qp_scalar, np.array([q]), np.array([b]))) <= 1e-4

    def test_saddle(self, qp_saddle):
        sol = qp_solve(qp_saddle, [1.0, 1.0], [0.0, 0.0])
        assert sol.value == pytest.approx(0.0)
        assert np.allclose(sol.minimizer, [0.0, 0.0])
        for face in sol.faces:
            assert face.residual(qp_saddle, np.array([1.0, 1.0]), np.zeros(2)) <= 1e-9

    def test_outside_domain(self, qp_saddle):
        with pytest.raises(NotInDomain):
            qp_solve(qp_saddle, [-1.0, 0.0], [0.0, 0.0])

    def test_concave_on_interval(self):
        inst = QpInstance([[-1.0]], [[1.0], [-1.0]])
        sol = qp_solve(inst, [0.0], [-1.0, -1.0])
        assert sol.value == pytest.approx(-0.5)
        assert len(sol.faces) == 2

    def test_degenerate_linear(self):
        inst = QpInstance([[0.0]], [[1.0]])
        assert qp_solve(inst, [2.0], [1.5]).value == pytest.approx(3.0)
        assert qp_solve(inst, [0.0], [1.5]).value == pytest.approx(0.0)

    def test_wrong_sizes(self, qp_scalar):
        with pytest.raises(ArgumentError):
            qp_solve(qp_scalar, [1.0, 2.0], [0.0])


class TestPieces:
    def test_scalar_pieces(self, qp_scalar):
        pieces = {p.subset: p for p in enumerate_pieces(qp_scalar)}
        assert set(pieces) == {(), (0,)}
        w = np.array([[2.0, -2.0], [1.0, 3.0]])
        assert pieces[()].value(w[:1])[0] == pytest.approx(-1.0)            # -q^2/4
        assert pieces[(0,)].value(w[1:])[0] == pytest.approx(12.0)          # qb + b^2
        assert pieces[()].validity.contains([2.0, -2.0])
        assert not pieces[()].validity.contains([1.0, 3.0])

    def test_min_of_valid_pieces(self, qp_saddle, rng):
        pieces = enumerate_pieces(qp_saddle)
        W = np.column_stack([rng.uniform(1.0, 2.0, size=(20, 2)), rng.uniform(-1.0, 1.0, size=(20, 2))])
        for w in W:
            got = min(p.value(w)[0] for p in pieces if p.validity.contains(w))
            assert got == pytest.approx(qp_solve(qp_saddle, w[:2], w[2:]).value, abs=1e-6)

    def test_scalar_grid(self, qp_scalar):
        pieces = enumerate_pieces(qp_scalar)
        axis = np.linspace(-2.0, 2.0, 20)
        for q in axis:
            for b in axis:
                w = np.array([q, b])
                got = min(p.value(w)[0] for p in pieces if p.validity.contains(w))
                assert got == pytest.approx(qp_solve(qp_scalar, [q], [b]).value, abs=1e-6)

    def test_saddle_grid(self, qp_saddle):
        pieces = enumerate_pieces(qp_saddle)
        for s in np.linspace(0.0, 1.0, 20):
            for t in np.linspace(-0.9, 0.9, 20):
                w = np.array([1.0 + s, 2.0 - s, t, -t])
                got = min(p.value(w)[0] for p in pieces if p.validity.contains(w))
                assert got == pytest.approx(qp_solve(qp_saddle, w[:2], w[2:]).value, abs=1e-6)

    def test_region_filter(self, qp_scalar):
        region = Domain.box([1.0, 1.0], [2.0, 2.0])     # b >= -q/2 throughout
        pieces = enumerate_pieces(qp_scalar, region)
        assert [p.subset for p in pieces] == [(0,)]


class TestDcDecompositions:
    def test_value_dc_scalar(self, qp_scalar):
        region = Domain.box([-2.0, -2.0], [2.0, 2.0])
        dc = value_dc(qp_scalar, region)
        assert dc.value([2.0, -2.0]) == pytest.approx(-1.0)
        assert sorted(dc.meta["pieces"]) == [[], [0]]
        assert check_dc_identity(dc, lambda w: qp_solve(qp_scalar, w[:1], w[1:]).value, samples=100,
                                 tol=1e-6).passed
        assert check_convexity(dc.g, region, trials=200).passed
        assert check_convexity(dc.h, region, trials=200).passed

    def test_value_dc_saddle(self, qp_saddle):
        region = Domain.box([1.0, 1.0, -1.0, -1.0], [2.0, 2.0, 1.0, 1.0])
        dc = value_dc(qp_saddle, region)
        assert check_dc_identity(dc, lambda w: qp_solve(qp_saddle, w[:2], w[2:]).value, samples=60,
                                 tol=1e-6).passed
        assert check_convexity(dc.g, region, trials=200).passed
        assert check_convexity(dc.h, region, trials=200).passed

    def test_region_outside_domain(self, qp_saddle):
        region = Domain.box([-2.0, -2.0, -1.0, -1.0], [0.0, 0.0, 0.0, 0.0])
        with pytest.raises(RegionNotInDomain):
            value_dc(qp_saddle, region)

    def test_pd_shortcut(self, qp_scalar):
        dc = pd_value_dc(qp_scalar)
        assert dc.value([-2.0, 0.0]) == pytest.approx(-1.0)
        assert dc.meta["shortcut"] == "positive_definite"
        box = Domain.box([-2.0, -2.0], [2.0, 2.0])
        W = box.sample(np.random.default_rng(1), 30)
        assert np.allclose(dc.eval_batch(W), qp_value_batch(qp_scalar, W), atol=1e-8)

    def test_pd_shortcut_matches_generic_path(self, qp_scalar):
        box = Domain.box([-2.0, -2.0], [2.0, 2.0])
        shortcut, generic = pd_value_dc(qp_scalar), value_dc(qp_scalar, box)
        W = np.array([[q, b] for q in np.linspace(-2.0, 2.0, 9) for b in np.linspace(-2.0, 2.0, 9)])
        assert np.allclose(shortcut.eval_batch(W), generic.eval_batch(W), atol=1e-6)

    def test_pd_shortcut_needs_pd(self, qp_saddle):
        with pytest.raises(NotPositiveDefinite):
            pd_value_dc(qp_saddle)


class TestRecourse:
    def test_pd_recourse(self, qp_scalar):
        rm = RecourseMap([RecourseScenario(np.zeros(1), np.ones((1, 1)), np.zeros((1, 1)), np.zeros(1))],
                         qp_scalar)
        dc = recourse_dc(qp_scalar, rm, 0, Domain.box([-2.0], [2.0]))
        assert dc.value([1.0]) == pytest.approx(0.0)
        assert dc.value([-2.0]) == pytest.approx(-1.0)
        assert dc.meta["scenario"] == 0

    def test_piece_recourse(self):
        inst = QpInstance([[0.0]], [[1.0]])
        rm = RecourseMap([RecourseScenario(np.ones(1), np.ones((1, 1)), np.zeros((1, 1)), np.ones(1))], inst)
        dc = recourse_dc(inst, rm, 0, Domain.box([0.0], [2.0]))
        assert check_dc_identity(dc, lambda x: x[0] + 1.0, samples=50).passed

    def test_scenario_index(self, qp_scalar):
        rm = RecourseMap([RecourseScenario(np.zeros(1), np.ones((1, 1)), np.zeros((1, 1)), np.zeros(1))],
                         qp_scalar)
        with pytest.raises(ArgumentError):
            rm.affine_map(3)
        with pytest.raises(ArgumentError):
            RecourseMap([RecourseScenario(np.zeros(2), np.ones((1, 1)), np.zeros((1, 1)), np.zeros(1))],
                        qp_scalar)
