"""
Convex expression trees: construction rules, exact evaluation, the file grammar.
"""
import numpy as np
import pytest

from dc_modules.convex_core import (
    Affine,
    AffinePrecompose,
    CvarEnvelope,
    Domain,
    MaxOf,
    NegOceEnvelope,
    NonnegScale,
    Norm2Affine,
    PolyhedralDistance,
    QuadForm,
    SquareOfNonneg,
    Sum,
    constant,
    evaluate,
    expr_from_dict,
    infimum_estimate,
)
from dc_modules.errors import (
    ArgumentError,
    CertificationError,
    DomainError,
    InputFormatError,
    UnboundedDomainError,
)
from dc_modules.polyhedral import Polyhedron
from dc_modules.verification import check_convexity


class TestDomain:
    def test_box_membership(self, line):
        assert line.contains([0.5])
        assert not line.contains([1.5])

    def test_infinite_bounds_round_trip(self):
        d = Domain.from_dict({"kind": "box", "lower": ["-inf", 0.0], "upper": ["inf", 1.0]})
        assert not d.is_bounded()
        assert d.to_dict()["lower"] == ["-inf", 0.0]
        lo, hi = d.sampling_box()
        assert lo[0] == -10.0 and hi[0] == 10.0

    def test_bad_box(self):
        with pytest.raises(ArgumentError):
            Domain.box([1.0], [0.0])
        with pytest.raises(InputFormatError):
            Domain.from_dict({"kind": "ball"})

    def test_polyhedron_sampling(self, rng):
        tri = Polyhedron.from_geq([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [0.0, 0.0, -1.0])
        d = Domain.from_polyhedron(tri)
        X = d.sample(rng, 100)
        assert X.shape == (100, 2)
        assert d.contains(X).all()
        assert d.is_bounded()


class TestNodes:
    def test_affine_and_constant(self):
        X = np.array([[1.0, 2.0], [0.0, -1.0]])
        assert np.allclose(Affine([1.0, 1.0], 0.5).eval_batch(X), [3.5, -0.5])
        assert np.allclose(constant(2, 3.0).eval_batch(X), [3.0, 3.0])

    def test_sum_scale_max(self):
        x = Affine([1.0])
        neg = Affine([-1.0])
        assert evaluate(MaxOf([x, neg]), [-2.0]) == 2.0
        assert evaluate(NonnegScale(3.0, Sum([x, constant(1, 1.0)])), [1.0]) == 6.0

    def test_negative_scale_rejected(self):
        with pytest.raises(ArgumentError):
            NonnegScale(-1.0, Affine([1.0]))

    def test_quad_requires_psd(self):
        with pytest.raises(CertificationError):
            QuadForm([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(ArgumentError):
            QuadForm([[1.0, 2.0], [0.0, 1.0]])
        q = QuadForm([[2.0]], [1.0], 1.0)
        assert evaluate(q, [1.0]) == pytest.approx(3.0)

    def test_square_needs_certified_bound(self):
        with pytest.raises(CertificationError):
            SquareOfNonneg(Affine([1.0]), -0.5)
        sq = SquareOfNonneg(Norm2Affine([[1.0, 0.0]]))
        assert evaluate(sq, [3.0, 5.0]) == pytest.approx(9.0)

    def test_norm2(self):
        n = Norm2Affine([[1.0, 0.0], [0.0, 1.0]], [0.0, 1.0])
        assert evaluate(n, [3.0, 3.0]) == pytest.approx(5.0)

    def test_mismatched_dims(self):
        with pytest.raises(ArgumentError):
            Sum([Affine([1.0]), Affine([1.0, 1.0])])

    def test_affine_precompose(self):
        child = QuadForm([[2.0]])
        e = AffinePrecompose(child, [[1.0, 1.0]], [1.0])
        assert evaluate(e, [1.0, 1.0]) == pytest.approx(9.0)

    def test_polyhedral_distance(self):
        d = PolyhedralDistance(Polyhedron([[1.0]], [0.0]))
        assert np.allclose(d.eval_batch(np.array([[2.0], [-1.0]])), [2.0, 0.0])

    def test_evaluate_outside_domain(self, line):
        with pytest.raises(DomainError):
            evaluate(Affine([1.0]), [2.0], line)
        with pytest.raises(DomainError):
            evaluate(Affine([1.0, 1.0]), [1.0, 2.0, 3.0])


class TestEnvelopes:
    def test_cvar_two_point(self):
        # Z in {0, 1} equally likely: CVaR at level 0.5 is 1
        env = CvarEnvelope(0.5, [0.5, 0.5], [constant(1, 0.0), constant(1, 1.0)], [constant(1), constant(1)])
        assert evaluate(env, [0.0]) == pytest.approx(1.0)

    def test_cvar_alpha_range(self):
        with pytest.raises(ArgumentError):
            CvarEnvelope(1.0, [1.0], [constant(1)], [constant(1)])

    def test_cvar_envelope_is_convex(self, rng, line):
        p = [QuadForm([[float(rng.uniform(0.5, 2.0))]], [float(rng.normal())]) for _ in range(3)]
        q = [Affine([float(rng.normal())]) for _ in range(3)]
        env = CvarEnvelope(0.7, [0.2, 0.3, 0.5], p, q)
        assert check_convexity(env, line, trials=300).passed

    def test_neg_oce_is_convex(self, rng, line):
        p = [QuadForm([[1.0]], [float(rng.normal())]) for _ in range(2)]
        q = [Affine([float(rng.normal())]) for _ in range(2)]
        env = NegOceEnvelope([2.0, 0.0], [0.0, 0.0], [0.5, 0.5], p, q)
        assert check_convexity(env, line, trials=300).passed

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ArgumentError):
            CvarEnvelope(0.5, [0.5, 0.6], [constant(1)] * 2, [constant(1)] * 2)


class TestFileGrammar:
    def test_round_trip(self, line):
        expr = Sum([
            QuadForm([[2.0]], [1.0], 0.5),
            NonnegScale(2.0, MaxOf([Affine([1.0]), Affine([-1.0], 0.25)])),
            Norm2Affine([[1.0]], [0.5]),
        ])
        back = expr_from_dict(expr.to_dict(), line)
        X = line.sample(np.random.default_rng(0), 20)
        assert np.allclose(back.eval_batch(X), expr.eval_batch(X))

    def test_square_nonneg_certified_against_domain(self):
        box = Domain.box([1.0], [2.0])
        e = expr_from_dict({"kind": "square_nonneg", "child": {"kind": "affine", "a": [1.0], "c": 0.0}}, box)
        assert e.certified_lower_bound == pytest.approx(1.0)
        with pytest.raises(CertificationError):
            expr_from_dict({"kind": "square_nonneg", "child": {"kind": "affine", "a": [1.0], "c": 0.0}},
                           Domain.box([-1.0], [1.0]))

    def test_unknown_kind(self):
        with pytest.raises(InputFormatError):
            expr_from_dict({"kind": "sin"})
        with pytest.raises(InputFormatError):
            expr_from_dict({"kind": "affine"})

    def test_envelopes_are_not_serialized(self):
        env = CvarEnvelope(0.5, [1.0], [constant(1)], [constant(1)])
        with pytest.raises(ArgumentError):
            env.to_dict()


class TestInfimumEstimate:
    def test_quadratic_minimum(self, line):
        q = QuadForm([[2.0]], [-0.5])
        assert infimum_estimate(q, line) == pytest.approx(-0.0625, abs=1e-8)

    def test_unbounded_domain(self):
        with pytest.raises(UnboundedDomainError):
            infimum_estimate(Affine([1.0]), Domain.box([-np.inf], [0.0]))
