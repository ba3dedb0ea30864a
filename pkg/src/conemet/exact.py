"""Exact certification layer: bundles, flags, weights, degrees, stability.

Everything in this module works over the Gaussian rationals Q(i), so all
verdicts (admissibility, stability, flag normalization) are exact.  The
rank-2 bundle E = O(1) + O(n-1) over P^1 is handled in a fixed affine
trivialization: sections are polynomial pairs (f, g) with deg f <= 1 and
deg g <= n-1, and the fibre at a finite point x is C^2 via evaluation,
with span(1,0) the O(1) direction and span(0,1) the O(n-1) direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (AngleOutOfRange, FlagContainedInLine, FlagDegenerate,
                     InconsistentDegree, InvalidConfiguration,
                     InvalidSubbundle, ParityMismatch)
from .gaussian import (QI, QI_ONE, QI_ZERO, lagrange_interpolate, poly_add,
                       poly_deg, poly_eval, poly_scale, poly_trim,
                       resultant_homogeneous)

__all__ = [
    "ConeConfiguration", "ParabolicWeights", "BundleModel", "Automorphism",
    "FlagLine", "LineSubbundle", "Classification",
    "check_gauss_bonnet", "check_angle_stability", "weights_from_angles",
    "canonical_flag", "normalize_flag", "classify_line_subbundle",
    "parabolic_degree_total", "line_parabolic_degree",
    "max_destabilizing_degree", "is_parabolically_stable",
    "tangency_count", "splitting_type_from_invariants",
]


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeConfiguration:
    """n >= 3 distinct finite marked points with angle parameters in (0, 1)."""

    points: tuple[QI, ...]
    angles: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.points)
        if n < 3:
            raise InvalidConfiguration(f"need at least 3 marked points, got {n}")
        if n != len(self.angles):
            raise InvalidConfiguration("points and angles must have equal length")
        if len(set(self.points)) != n:
            raise InvalidConfiguration("marked points must be pairwise distinct")
        for a in self.angles:
            if not (0 < a < 1):
                raise AngleOutOfRange(f"angle parameter {a} outside (0, 1)")

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ParabolicWeights:
    """Per-point weight pairs (a1, a2) with a1 + a2 = 1 and a2 - a1 = angle."""

    pairs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        for a1, a2 in self.pairs:
            if a1 + a2 != 1 or not (0 < a1 < a2 < 1):
                raise InvalidConfiguration(
                    f"invalid weight pair ({a1}, {a2})")

    @property
    def n(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class BundleModel:
    """The rank-2 bundle O(1) + O(n-1) in its affine-chart trivialization."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise InvalidConfiguration("bundle model requires n >= 3")

    @property
    def degree(self) -> int:
        return self.n


@dataclass(frozen=True)
class Automorphism:
    """Bundle automorphism [[lambda1, 0], [P, lambda2]] with deg P <= n-2.

    Acts on a section (f, g) by (lambda1*f, P*f + lambda2*g), and on a
    fibre vector (v1, v2) at x by (lambda1*v1, P(x)*v1 + lambda2*v2).
    """

    lambda1: QI
    lambda2: QI
    P: tuple[QI, ...] = ()
    n: int = 3

    def __post_init__(self):
        if self.lambda1.is_zero() or self.lambda2.is_zero():
            raise InvalidConfiguration("automorphism scalars must be nonzero")
        if poly_deg(list(self.P)) > self.n - 2:
            raise InvalidConfiguration(
                f"off-diagonal entry has degree > n-2 = {self.n - 2}")

    def apply_vector(self, x: QI, v: tuple[QI, QI]) -> tuple[QI, QI]:
        v1, v2 = v
        return (self.lambda1 * v1,
                poly_eval(list(self.P), x) * v1 + self.lambda2 * v2)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other, as matrices self @ other."""
        P = poly_add(poly_scale(list(self.P), other.lambda1),
                     poly_scale(list(other.P), self.lambda2))
        return Automorphism(self.lambda1 * other.lambda1,
                            self.lambda2 * other.lambda2,
                            tuple(P), max(self.n, other.n))

    def inverse(self) -> "Automorphism":
        inv1 = QI_ONE / self.lambda1
        inv2 = QI_ONE / self.lambda2
        P = poly_scale(list(self.P), -inv1 * inv2)
        return Automorphism(inv1, inv2, tuple(P), self.n)

    def is_scalar(self) -> bool:
        return self.lambda1 == self.lambda2 and not poly_trim(list(self.P))

    def image_of_o1(self) -> "LineSubbundle":
        """The degree-1 subbundle that is the image of O(1) under self."""
        return LineSubbundle(degree=1, p=(self.lambda1,), q=tuple(self.P),
                             n=self.n)


def _normalize_direction(v: tuple[QI, QI]) -> tuple[QI, QI]:
    v1, v2 = v
    if not v1.is_zero():
        return (QI_ONE, v2 / v1)
    if not v2.is_zero():
        return (QI_ZERO, QI_ONE)
    raise InvalidConfiguration("flag direction vector must be nonzero")


@dataclass(frozen=True)
class FlagLine:
    """A line in the fibre over marked point ``index``, stored projectively.

    The direction is normalized so its first nonzero coordinate is 1,
    making equality of lines plain tuple equality.
    """

    index: int
    v: tuple[QI, QI]

    def __post_init__(self):
        object.__setattr__(self, "v", _normalize_direction(self.v))


@dataclass(frozen=True)
class LineSubbundle:
    """Line subbundle L -> O(1) + O(n-1) of degree d.

    The inclusion is the polynomial pair (p, q) in the affine chart, with
    homogenization degrees (1-d, n-1-d).  Validity means the two
    homogenized sections have no common root on P^1, checked through the
    resultant (this covers the point at infinity).
    """

    degree: int
    p: tuple[QI, ...]
    q: tuple[QI, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(poly_trim(list(self.p))))
        object.__setattr__(self, "q", tuple(poly_trim(list(self.q))))
        dp, dq = 1 - self.degree, self.n - 1 - self.degree
        if (dp < 0 and self.p) or (dq < 0 and self.q):
            raise InconsistentDegree(
                f"degree-{self.degree} subbundle carries a section of "
                "impossible degree")
        if poly_deg(list(self.p)) > max(dp, -1) or poly_deg(list(self.q)) > max(dq, -1):
            raise InconsistentDegree(
                "section degrees exceed their homogenization degrees")

    def is_valid(self) -> bool:
        """True iff the homogenized sections share no projective root."""
        p, q = list(self.p), list(self.q)
        dp, dq = 1 - self.degree, self.n - 1 - self.degree
        if not p and not q:
            return False
        if not p:
            # p vanishes identically, so q may not vanish anywhere on P^1
            return dq == 0 and bool(q)
        if not q:
            return dp == 0 and bool(p)
        if dp == 0 or dq == 0:
            # a nonzero constant homogenizes to a nowhere-zero section
            return True
        return not resultant_homogeneous(p, dp, q, dq).is_zero()

    def require_valid(self):
        if not self.is_valid():
            raise InvalidSubbundle(
                "defining sections share a common root on P^1")

    def fibre_direction(self, x: QI) -> tuple[QI, QI]:
        return (poly_eval(list(self.p), x), poly_eval(list(self.q), x))

    def contains(self, line: FlagLine, x: QI) -> bool:
        w1, w2 = self.fibre_direction(x)
        v1, v2 = line.v
        return (v1 * w2 - v2 * w1).is_zero()


@dataclass(frozen=True)
class Classification:
    """Outcome of classifying a positive-degree line subbundle."""

    kind: str  # "IsSecondSummand" | "ImageOfO1" | "LowDegree"
    automorphism: Automorphism | None = None


# ---------------------------------------------------------------------------
# numerical admissibility (exact comparisons)
# ---------------------------------------------------------------------------

def check_gauss_bonnet(config: ConeConfiguration) -> bool:
    """sum(1 - angle_i) < 2, exactly."""
    return sum(1 - a for a in config.angles) < 2


def check_angle_stability(config: ConeConfiguration) -> bool:
    """For every j: 1 - angle_j < sum over i != j of (1 - angle_i), exactly."""
    total = sum(1 - a for a in config.angles)
    return all(1 - a < total - (1 - a) for a in config.angles)


def weights_from_angles(config: ConeConfiguration) -> ParabolicWeights:
    pairs = []
    for a in config.angles:
        if not (0 < a < 1):
            raise AngleOutOfRange(f"angle parameter {a} outside (0, 1)")
        pairs.append((Fraction(1 - a, 2), Fraction(1 + a, 2)))
    return ParabolicWeights(tuple(pairs))


# ---------------------------------------------------------------------------
# flags
# ---------------------------------------------------------------------------

def canonical_flag(config: ConeConfiguration) -> list[FlagLine]:
    """The distinguished flag: O(1) fibres at the first n-1 points, and the
    line through (1, 1) at the last one (in neither summand)."""
    n = config.n
    flag = [FlagLine(i, (QI_ONE, QI_ZERO)) for i in range(n - 1)]
    flag.append(FlagLine(n - 1, (QI_ONE, QI_ONE)))
    return flag


def normalize_flag(flag: list[FlagLine], config: ConeConfiguration) -> Automorphism:
    """The automorphism carrying ``flag`` to the canonical flag.

    The unipotent part interpolates P(x_i) = -v_i2 / v_i1 through the first
    n-1 points; the diagonal part then scales the image of the last line
    onto span(1, 1).  The result is unique up to a global scalar.
    """
    n = config.n
    if len(flag) != n:
        raise InvalidConfiguration("flag must have one line per marked point")
    for line in flag:
        if line.v[0].is_zero():
            raise FlagDegenerate(line.index)
    xs = list(config.points[: n - 1])
    ys = [-(line.v[1] / line.v[0]) for line in flag[: n - 1]]
    P = lagrange_interpolate(xs, ys)

    # image of the last line under the unipotent map
    vn1, vn2 = flag[n - 1].v
    c1 = vn1
    c2 = poly_eval(P, config.points[n - 1]) * vn1 + vn2
    if c2.is_zero():
        raise FlagContainedInLine(
            "all flag lines lie on a single degree-1 subbundle")
    lambda1 = QI_ONE / c1
    lambda2 = QI_ONE / c2
    # total map diag(lambda1, lambda2) @ [[1,0],[P,1]]
    return Automorphism(lambda1, lambda2, tuple(poly_scale(P, lambda2)), n)


# ---------------------------------------------------------------------------
# subbundles and parabolic degrees
# ---------------------------------------------------------------------------

def classify_line_subbundle(L: LineSubbundle, model: BundleModel) -> Classification:
    """Classify a line subbundle of positive degree.

    Degree > 1 forces the O(n-1) summand; degree 1 is an automorphism
    image of O(1); degree <= 0 subbundles are only reported as such.
    """
    L.require_valid()
    d = L.degree
    if d > 1:
        if L.p:
            raise InconsistentDegree(
                "a subbundle of degree > 1 must project to zero on O(1)")
        if d != model.n - 1:
            raise InconsistentDegree(
                f"degree-{d} subbundle with zero O(1) projection must have "
                f"degree n-1 = {model.n - 1}")
        return Classification("IsSecondSummand")
    if d == 1:
        if poly_deg(list(L.p)) != 0:
            raise InconsistentDegree(
                "a degree-1 subbundle must project isomorphically to O(1)")
        p0 = L.p[0]
        P = poly_scale(list(L.q), QI_ONE / p0)
        return Classification(
            "ImageOfO1",
            Automorphism(QI_ONE, QI_ONE, tuple(P), model.n))
    return Classification("LowDegree")


def parabolic_degree_total(model: BundleModel, weights: ParabolicWeights) -> Fraction:
    """deg E minus the sum of all weights; identically zero here."""
    return Fraction(model.degree) - sum(a1 + a2 for a1, a2 in weights.pairs)


def line_parabolic_degree(L: LineSubbundle, flag: list[FlagLine],
                          weights: ParabolicWeights,
                          config: ConeConfiguration) -> Fraction:
    """deg L - sum of a1 over contained flag lines - sum of a2 over the rest."""
    L.require_valid()
    total = Fraction(L.degree)
    for line, (a1, a2) in zip(flag, weights.pairs):
        x = config.points[line.index]
        total -= a1 if L.contains(line, x) else a2
    return total


def _o_n_minus_1(n: int) -> LineSubbundle:
    return LineSubbundle(degree=n - 1, p=(), q=(QI_ONE,), n=n)


def max_destabilizing_degree(flag: list[FlagLine], weights: ParabolicWeights,
                             config: ConeConfiguration
                             ) -> tuple[Fraction, LineSubbundle | None]:
    """Supremum of the parabolic degree over all line subbundles.

    Degree <= 0 subbundles are bounded by -sum(a1) analytically (witness
    None).  Degree n-1 is the O(n-1) summand.  Degree 1 subbundles are
    graphs of polynomials of degree <= n-2; it suffices to scan the
    interpolants through each subset omitting one marked point, since the
    full set is realizable only when one of those interpolants already
    passes through the omitted point.
    """
    n = config.n
    for line in flag:
        if line.v[0].is_zero():
            raise FlagDegenerate(line.index)

    best: Fraction = -sum(a1 for a1, _ in weights.pairs)
    witness: LineSubbundle | None = None  # None marks the analytic bound

    cand = _o_n_minus_1(n)
    val = line_parabolic_degree(cand, flag, weights, config)
    if val > best:
        best, witness = val, cand

    xs = list(config.points)
    ys = [line.v[1] / line.v[0] for line in flag]
    a1s = [a1 for a1, _ in weights.pairs]
    a2s = [a2 for _, a2 in weights.pairs]
    degree_if_all = Fraction(1) - sum(a1s)
    for j in range(n):
        nodes = [(xs[i], ys[i]) for i in range(n) if i != j]
        P = lagrange_interpolate([x for x, _ in nodes], [y for _, y in nodes])
        L = LineSubbundle(degree=1, p=(QI_ONE,), q=tuple(P), n=n)
        # the interpolant passes through every flag line except possibly
        # the omitted one, so a single evaluation settles the degree
        through_j = poly_eval(list(L.q), xs[j]) == ys[j]
        val = degree_if_all + (0 if through_j else a1s[j] - a2s[j])
        if val > best:
            best, witness = val, L
    return best, witness


def is_parabolically_stable(flag: list[FlagLine], weights: ParabolicWeights,
                            config: ConeConfiguration) -> bool:
    """True iff every line subbundle has negative parabolic degree."""
    best, _ = max_destabilizing_degree(flag, weights, config)
    return best < 0


# ---------------------------------------------------------------------------
# intersection arithmetic on the ruled surface
# ---------------------------------------------------------------------------

def tangency_count(c_self_intersection: int, fiber_intersections: int,
                   n: int) -> int:
    """Number of tangencies of a curve with the horizontal foliation,
    computed from its self-intersection and fibre degree."""
    return c_self_intersection + (n - 2) * fiber_intersections


def splitting_type_from_invariants(degree: int,
                                   min_section_square: int) -> tuple[int, int]:
    """Recover the splitting O(a) + O(b) from degree and the negative
    section's self-intersection."""
    gap = abs(min_section_square)
    if (degree - gap) % 2 != 0:
        raise ParityMismatch(
            f"degree {degree} and section square {min_section_square} "
            "have incompatible parity")
    a = (degree - gap) // 2
    return (a, a + gap)
