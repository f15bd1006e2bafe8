"""
Dc calculus: linear combinations, squares, products, norms, extrema and compositions.
"""
import numpy as np
import pytest

from dc_modules.convex_core import Affine, Domain, MaxOf, QuadForm, constant
from dc_modules.dc_core import (
    DcFunction,
    combine_linear,
    compose_incr_convex,
    compose_neg_log,
    concave_function,
    constant_function,
    convex_function,
    exp_family_nll,
    norm2,
    pointwise_extremum,
    pos_part_abs,
    product,
    resolve_monotone_convex,
    square,
)
from dc_modules.errors import ArgumentError, CertificationError, DomainError, InputFormatError
from dc_modules.verification import check_convexity, check_dc_identity


def abs_minus_x(domain):
    """|x| - x written as max(x, -x) - x."""
    return DcFunction(MaxOf([Affine([1.0]), Affine([-1.0])]), Affine([1.0]), domain)


def components_convex(dc, trials=300):
    return all(check_convexity(part, dc.domain, trials=trials).passed for part in (dc.g, dc.h))


class TestLinearCombinations:
    def test_scaling_swaps_parts(self, line):
        f = DcFunction(QuadForm([[2.0]]), MaxOf([Affine([1.0]), Affine([-1.0])]), line)
        out = combine_linear([(2.0, f)])
        assert out.value([0.5]) == pytest.approx(2.0 * (0.25 - 0.5))
        neg = combine_linear([(-1.0, f)])
        assert neg.g is not None and neg.value([0.5]) == pytest.approx(0.25)

    def test_zero_coefficient_drops_term(self, line):
        f = convex_function(QuadForm([[2.0]]), line)
        out = combine_linear([(0.0, f), (1.0, constant_function(line, -3.0))])
        assert out.value([0.7]) == pytest.approx(-3.0)

    def test_domains_must_match(self, line):
        other = Domain.box([0.0], [1.0])
        with pytest.raises(DomainError):
            combine_linear([(1.0, convex_function(Affine([1.0]), line)),
                            (1.0, convex_function(Affine([1.0]), other))])

    def test_dimension_mismatch(self, line):
        with pytest.raises(DomainError):
            DcFunction(Affine([1.0, 1.0]), constant(1), line)

    def test_dict_round_trip(self, line):
        f = abs_minus_x(line)
        back = DcFunction.from_dict(f.to_dict())
        assert back.value([-0.5]) == pytest.approx(1.0)
        with pytest.raises(InputFormatError):
            DcFunction.from_dict({"g": f.g.to_dict()})


class TestSquareAndProduct:
    def test_square_of_abs_minus_x(self, line):
        f = abs_minus_x(line)
        sq = square(f)
        assert sq.value([-1.0]) == pytest.approx(4.0)
        assert sq.meta["shift"] > 0.0
        assert components_convex(sq)

    def test_square_identity(self, line):
        f = DcFunction(QuadForm([[2.0]], [0.5]), MaxOf([Affine([1.0], -0.2), Affine([-2.0])]), line)
        assert check_dc_identity(square(f), lambda x: f.value(x) ** 2, samples=200).passed

    def test_product_abs_times_x(self):
        domain = Domain.box([-2.0], [2.0])
        absx = convex_function(MaxOf([Affine([1.0]), Affine([-1.0])]), domain)
        x = convex_function(Affine([1.0]), domain)
        p = product(absx, x)
        assert p.value([-2.0]) == pytest.approx(-4.0)
        assert check_dc_identity(p, lambda z: abs(z[0]) * z[0], samples=200).passed


class TestNormAndExtrema:
    def test_norm2_single_component(self, line):
        f = convex_function(Affine([1.0]), line)
        n = norm2([f])
        assert n.value([-1.0]) == pytest.approx(1.0)
        assert components_convex(n)

    def test_norm2_two_components(self, line):
        f1 = DcFunction(QuadForm([[2.0]]), Affine([1.0]), line)
        f2 = concave_function(QuadForm([[1.0]]), line)
        ref = lambda x: np.hypot(x[0] ** 2 - x[0], -0.5 * x[0] ** 2)
        assert check_dc_identity(norm2([f1, f2]), ref, samples=200).passed

    def test_max_of_x_and_minus_x(self, line):
        m = pointwise_extremum("max", [convex_function(Affine([1.0]), line),
                                       convex_function(Affine([-1.0]), line)])
        assert check_dc_identity(m, lambda x: abs(x[0]), samples=200).passed

    def test_min_and_single(self, line):
        f = DcFunction(QuadForm([[2.0]]), constant(1), line)
        g = DcFunction(QuadForm([[2.0]], [-2.0], 1.0), constant(1), line)
        m = pointwise_extremum("min", [f, g])
        assert check_dc_identity(m, lambda x: min(x[0] ** 2, (x[0] - 1.0) ** 2), samples=200).passed
        assert pointwise_extremum("max", [f]) is f

    def test_bad_mode(self, line):
        with pytest.raises(ArgumentError):
            pointwise_extremum("median", [convex_function(Affine([1.0]), line)])
        with pytest.raises(ArgumentError):
            pointwise_extremum("max", [])

    def test_pos_and_abs(self, line):
        f = abs_minus_x(line)
        shifted = combine_linear([(1.0, f), (1.0, constant_function(line, -0.5))])
        assert pos_part_abs("pos", shifted).value([0.5]) == pytest.approx(0.0)
        assert pos_part_abs("abs", shifted).value([0.5]) == pytest.approx(0.5)
        assert pos_part_abs("pos", shifted).value([-1.0]) == pytest.approx(1.5)


class TestCompositions:
    def test_incr_convex_pos_part(self, line):
        out = compose_incr_convex("pos", QuadForm([[2.0]]), [([1.0], 0.0), ([-1.0], 0.0)], line)
        # m = x^2 - |x| at 0.5 is -0.25
        assert out.value([0.5]) == pytest.approx(0.0)
        assert out.value([1.0]) == pytest.approx(0.0)
        assert out.meta["b"] == "pos"

    def test_incr_convex_identity(self, line):
        out = compose_incr_convex("linear", QuadForm([[2.0]]), [([1.0], 0.0), ([-1.0], 0.0)], line)
        assert check_dc_identity(out, lambda x: x[0] ** 2 - abs(x[0]), samples=200).passed

    def test_rejects_non_monotone(self, line):
        with pytest.raises(CertificationError):
            compose_incr_convex(lambda t: t * t, QuadForm([[2.0]]), [([1.0], 0.0)], line)
        with pytest.raises(ArgumentError):
            resolve_monotone_convex("cosh")

    def test_neg_log(self, line):
        f = DcFunction(QuadForm([[2.0]], [0.0], 2.0), Affine([0.5]), line)
        out = compose_neg_log(f)
        assert out.meta["M"] > 0.0
        assert check_dc_identity(out, lambda x: -np.log(f.value(x)), samples=200).passed
        assert components_convex(out)

    def test_neg_log_needs_positive(self, line):
        with pytest.raises(DomainError):
            compose_neg_log(convex_function(Affine([1.0]), line))

    def test_exp_family_nll(self, line):
        obs = [(1.0, QuadForm([[1.0]]), [([0.5], 0.0)]), (0.0, Affine([1.0]), [([0.0], 1.0)])]
        out = exp_family_nll("softplus", obs, line)

        def ref(x):
            m1 = 0.5 * x[0] ** 2 - 0.5 * x[0]
            m2 = x[0] - 1.0
            return 0.5 * ((np.logaddexp(0.0, m1) - m1) + np.logaddexp(0.0, m2))

        assert check_dc_identity(out, ref, samples=200).passed
