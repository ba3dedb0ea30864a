import random
from fractions import Fraction

import pytest

from conemet import exact
from conemet.errors import (AngleOutOfRange, FlagContainedInLine,
                            FlagDegenerate, InconsistentDegree,
                            InvalidConfiguration, InvalidSubbundle,
                            ParityMismatch)
from conemet.exact import (Automorphism, BundleModel, ConeConfiguration,
                           FlagLine, LineSubbundle, canonical_flag,
                           check_angle_stability, check_gauss_bonnet,
                           classify_line_subbundle, line_parabolic_degree,
                           max_destabilizing_degree, normalize_flag,
                           parabolic_degree_total,
                           splitting_type_from_invariants, tangency_count,
                           weights_from_angles)
from conemet.gaussian import (QI, QI_ONE, QI_ZERO, lagrange_interpolate,
                              poly_eval, poly_mul, resultant_homogeneous)


def config(points, angles):
    return ConeConfiguration(tuple(QI(p) if not isinstance(p, QI) else p
                                   for p in points),
                             tuple(Fraction(a) for a in angles))


STD3 = config([0, 1, -1], [Fraction(1, 2)] * 3)


class TestGaussianRationals:
    def test_field_axioms_spot(self):
        a = QI(Fraction(1, 2), Fraction(-3, 4))
        b = QI(Fraction(2, 3), Fraction(5))
        assert (a + b) - b == a
        assert (a * b) / b == a
        assert a * a.conjugate() == QI(a.norm2())

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            QI(1) / QI(0)

    def test_interpolation_exact(self):
        rng = random.Random(11)
        xs = [QI(k) for k in range(5)]
        ys = [QI(Fraction(rng.randrange(-9, 9), rng.randrange(1, 7)),
                 Fraction(rng.randrange(-9, 9))) for _ in xs]
        p = lagrange_interpolate(xs, ys)
        for x, y in zip(xs, ys):
            assert poly_eval(p, x) == y

    def test_resultant_detects_common_root(self):
        # (x - 1)(x - 2) and (x - 2)(x + 5) share the root 2
        p = poly_mul([QI(-1), QI_ONE], [QI(-2), QI_ONE])
        q = poly_mul([QI(-2), QI_ONE], [QI(5), QI_ONE])
        assert resultant_homogeneous(p, 2, q, 2).is_zero()
        r = poly_mul([QI(-3), QI_ONE], [QI(5), QI_ONE])
        assert not resultant_homogeneous(p, 2, r, 2).is_zero()

    def test_resultant_root_at_infinity(self):
        # two affine constants homogenized to positive degree vanish at
        # infinity together
        assert resultant_homogeneous([QI_ONE], 1, [QI(3)], 1).is_zero()


class TestAdmissibility:
    def test_standard_example_admissible(self):
        assert check_gauss_bonnet(STD3)
        assert check_angle_stability(STD3)

    def test_gauss_bonnet_violated(self):
        cfg = config([0, 1, -1], [Fraction(1, 4)] * 3)
        assert not check_gauss_bonnet(cfg)
        assert check_angle_stability(cfg)

    def test_angle_stability_violated(self):
        cfg = config([0, 1, -1],
                     [Fraction(1, 10), Fraction(9, 10), Fraction(9, 10)])
        assert check_gauss_bonnet(cfg)
        assert not check_angle_stability(cfg)

    def test_gates(self):
        with pytest.raises(InvalidConfiguration):
            config([0, 0, 1], [Fraction(1, 2)] * 3)
        with pytest.raises(InvalidConfiguration):
            config([0, 1], [Fraction(1, 2)] * 2)
        with pytest.raises(AngleOutOfRange):
            config([0, 1, -1], [Fraction(3, 2)] * 3)

    def test_weights(self):
        w = weights_from_angles(STD3)
        assert w.pairs[0] == (Fraction(1, 4), Fraction(3, 4))
        for a1, a2 in w.pairs:
            assert a1 + a2 == 1

    def test_parabolic_degree_total_zero(self):
        assert parabolic_degree_total(BundleModel(3),
                                      weights_from_angles(STD3)) == 0


class TestFlags:
    def test_canonical_flag_shape(self):
        flag = canonical_flag(STD3)
        assert flag[0].v == (QI_ONE, QI_ZERO)
        assert flag[2].v == (QI_ONE, QI_ONE)

    def test_normalize_canonical_is_identityish(self):
        flag = canonical_flag(STD3)
        auto = normalize_flag(flag, STD3)
        assert auto.is_scalar()

    def test_worked_example(self):
        # lines (1, 1), (1, 2), (1, 1) at (0, 1, -1): the unipotent part
        # interpolates P(0) = -1, P(1) = -2, so P(t) = -1 - t
        flag = [FlagLine(0, (QI_ONE, QI_ONE)),
                FlagLine(1, (QI_ONE, QI(2))),
                FlagLine(2, (QI_ONE, QI_ONE))]
        auto = normalize_flag(flag, STD3)
        scale = QI_ONE / auto.lambda2
        assert [c * scale for c in auto.P] == [QI(-1), QI(-1)]
        for line, x in zip(flag, STD3.points):
            image = auto.apply_vector(x, line.v)
            assert FlagLine(line.index, image).v == \
                canonical_flag(STD3)[line.index].v

    def test_degenerate_flag_rejected(self):
        flag = canonical_flag(STD3)
        flag[1] = FlagLine(1, (QI_ZERO, QI_ONE))
        with pytest.raises(FlagDegenerate):
            normalize_flag(flag, STD3)

    def test_collinear_flag_rejected(self):
        # all three lines on the graph of P = 0, i.e. the O(1) summand
        flag = [FlagLine(i, (QI_ONE, QI_ZERO)) for i in range(3)]
        with pytest.raises(FlagContainedInLine):
            normalize_flag(flag, STD3)


class TestSubbundles:
    def test_second_summand(self):
        L = LineSubbundle(degree=2, p=(), q=(QI_ONE,), n=3)
        assert L.is_valid()
        assert classify_line_subbundle(L, BundleModel(3)).kind == \
            "IsSecondSummand"

    def test_image_of_o1(self):
        L = LineSubbundle(degree=1, p=(QI_ONE,), q=(QI(3), QI(-2)), n=4)
        cls = classify_line_subbundle(L, BundleModel(4))
        assert cls.kind == "ImageOfO1"
        assert cls.automorphism.image_of_o1().q == L.q

    def test_invalid_subbundle(self):
        # p and q share the root x = 1 after homogenization
        L = LineSubbundle(degree=0, p=(QI(-1), QI_ONE),
                          q=(QI(-1), QI_ONE, QI_ZERO), n=3)
        with pytest.raises(InvalidSubbundle):
            L.require_valid()

    def test_degree_gates(self):
        with pytest.raises(InconsistentDegree):
            LineSubbundle(degree=2, p=(QI_ONE,), q=(QI_ONE,), n=3)

    def test_max_destabilizing_standard(self):
        degree, witness = max_destabilizing_degree(
            canonical_flag(STD3), weights_from_angles(STD3), STD3)
        assert degree == Fraction(-1, 4)

    def test_max_destabilizing_unstable(self):
        cfg = config([0, 1, -1],
                     [Fraction(1, 10), Fraction(9, 10), Fraction(9, 10)])
        degree, witness = max_destabilizing_degree(
            canonical_flag(cfg), weights_from_angles(cfg), cfg)
        assert degree == Fraction(7, 20)
        assert witness is not None
        assert line_parabolic_degree(witness, canonical_flag(cfg),
                                     weights_from_angles(cfg), cfg) == degree


class TestIntersectionArithmetic:
    def test_tangency_vanishes_for_the_section(self):
        for n in range(3, 20):
            assert tangency_count(-(n - 2), 1, n) == 0

    def test_splitting_type(self):
        assert splitting_type_from_invariants(4, -2) == (1, 3)
        with pytest.raises(ParityMismatch):
            splitting_type_from_invariants(4, -1)

    def test_automorphism_composition(self):
        a = Automorphism(QI(2), QI(3), (QI_ONE, QI_ONE), 4)
        b = Automorphism(QI(5), QI(7), (QI(-1),), 4)
        x = QI(Fraction(2, 3))
        v = (QI_ONE, QI(4))
        lhs = a.apply_vector(x, b.apply_vector(x, v))
        rhs = a.compose(b).apply_vector(x, v)
        assert lhs == rhs
        inv = a.compose(a.inverse())
        assert inv.is_scalar() and inv.lambda1 == QI_ONE
