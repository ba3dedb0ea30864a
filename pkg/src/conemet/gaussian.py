"""Exact arithmetic over the Gaussian rationals Q(i) and dense polynomials.

Scalars are pairs of ``fractions.Fraction``; polynomials are coefficient
lists in increasing degree with exact QI entries.  Everything here is pure
and immutable, so values can be shared freely between threads.
"""

from __future__ import annotations

from fractions import Fraction


class QI:
    """A Gaussian rational re + im*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if isinstance(re, Fraction) else Fraction(re))
        object.__setattr__(self, "im", im if isinstance(im, Fraction) else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    # -- arithmetic --

    def __add__(self, other):
        other = _coerce(other)
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return QI(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        n2 = other.norm2()
        if n2 == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return QI((self.re * other.re + self.im * other.im) / n2,
                  (self.im * other.re - self.re * other.im) / n2)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __neg__(self):
        return QI(-self.re, -self.im)

    def conjugate(self):
        return QI(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # -- predicates / conversions --

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (QI, int, Fraction)):
            other = _coerce(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"QI({self.re})"
        return f"QI({self.re}, {self.im})"


QI_ZERO = QI(0)
QI_ONE = QI(1)


def _coerce(x) -> QI:
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into Q(i)")


# ---------------------------------------------------------------------------
# dense polynomials over Q(i): list of QI, index = degree
# ---------------------------------------------------------------------------

def poly_trim(p: list[QI]) -> list[QI]:
    """Drop trailing zero coefficients; the zero polynomial is []."""
    n = len(p)
    while n and p[n - 1].is_zero():
        n -= 1
    return p[:n]


def poly_deg(p: list[QI]) -> int:
    """Degree of p; -1 for the zero polynomial."""
    return len(poly_trim(p)) - 1


def poly_add(p: list[QI], q: list[QI]) -> list[QI]:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return poly_trim(out)


def poly_neg(p: list[QI]) -> list[QI]:
    return [-c for c in p]

def poly_sub(p: list[QI], q: list[QI]) -> list[QI]:
    return poly_add(p, poly_neg(q))


def poly_scale(p: list[QI], c: QI) -> list[QI]:
    return poly_trim([c * a for a in p])


def poly_mul(p: list[QI], q: list[QI]) -> list[QI]:
    p, q = poly_trim(p), poly_trim(q)
    if not p or not q:
        return []
    out = [QI_ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a.is_zero():
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_eval(p: list[QI], x: QI) -> QI:
    acc = QI_ZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_divmod(p: list[QI], q: list[QI]) -> tuple[list[QI], list[QI]]:
    """Exact euclidean division p = s*q + r with deg r < deg q."""
    q = poly_trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(poly_trim(p))
    s = [QI_ZERO] * max(len(r) - len(q) + 1, 0)
    lead = q[-1]
    while len(r) >= len(q):
        c = r[-1] / lead
        k = len(r) - len(q)
        s[k] = c
        for i, b in enumerate(q):
            r[k + i] = r[k + i] - c * b
        r = poly_trim(r)
        if not r:
            break
    return poly_trim(s), r


def poly_gcd(p: list[QI], q: list[QI]) -> list[QI]:
    """Monic gcd via the euclidean algorithm."""
    a, b = poly_trim(p), poly_trim(q)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if a:
        a = poly_scale(a, QI_ONE / a[-1])
    return a


def lagrange_interpolate(xs: list[QI], ys: list[QI]) -> list[QI]:
    """Unique polynomial of degree < len(xs) through the given points.

    Nodes must be pairwise distinct; the result is exact.  The master
    polynomial prod (x - x_j) is built once and each Lagrange basis is
    recovered by synthetic division, so the cost is quadratic in the
    number of nodes.
    """
    master = [QI_ONE]
    for xj in xs:
        master = poly_mul(master, [-xj, QI_ONE])
    result: list[QI] = []
    for xi, yi in zip(xs, ys):
        if yi.is_zero():
            continue
        # divide master by (x - xi): exact since xi is a root
        basis = [QI_ZERO] * (len(master) - 1)
        acc = QI_ZERO
        for k in range(len(master) - 1, 0, -1):
            acc = master[k] + xi * acc
            basis[k - 1] = acc
        denom = poly_eval(basis, xi)
        result = poly_add(result, poly_scale(basis, yi / denom))
    return result


def resultant_homogeneous(p: list[QI], dp: int, q: list[QI], dq: int) -> QI:
    """Resultant of the degree-(dp, dq) homogenizations of p and q.

    The coefficient lists are padded up to the declared homogenization
    degrees, so the result vanishes exactly when the two forms share a
    projective root, including the point at infinity.
    """
    a = list(p) + [QI_ZERO] * (dp + 1 - len(p))
    b = list(q) + [QI_ZERO] * (dq + 1 - len(q))
    if dp < 0 or dq < 0:
        raise ValueError("homogenization degrees must be nonnegative")
    if dp == 0 and dq == 0:
        # two constants: coprime iff not both zero; mimic res = 1
        return QI_ONE if (a[0] or b[0]) else QI_ZERO
    m = dp + dq
    rows: list[list[QI]] = []
    for k in range(dq):
        rows.append([QI_ZERO] * k + list(reversed(a)) + [QI_ZERO] * (dq - 1 - k))
    for k in range(dp):
        rows.append([QI_ZERO] * k + list(reversed(b)) + [QI_ZERO] * (dp - 1 - k))
    assert all(len(r) == m for r in rows)
    return _det(rows)


def _det(rows: list[list[QI]]) -> QI:
    """Exact determinant by gaussian elimination with pivoting."""
    n = len(rows)
    a = [list(r) for r in rows]
    det = QI_ONE
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            return QI_ZERO
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        inv = QI_ONE / a[col][col]
        for r in range(col + 1, n):
            if a[r][col].is_zero():
                continue
            factor = a[r][col] * inv
            for c in range(col, n):
                a[r][c] = a[r][c] - factor * a[col][c]
    return det
