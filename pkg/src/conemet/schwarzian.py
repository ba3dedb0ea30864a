"""Second-order Fuchsian systems in the plane: coefficient, transport, monodromy.

The projectivized flat connection is realized by the scalar equation

    y'' + (Q(z)/2) y = 0,
    Q(z) = sum_i [ (1 - a_i^2) / (2 (z - x_i)^2) + b_i / (z - x_i) ]

with double poles at the marked points x_i and accessory parameters b_i
subject to three linear moment constraints, which make Q = O(z^-4) at
infinity so the equation has singularities only at the x_i.  Transport of
the companion first-order system along paths is done with an embedded
Dormand-Prince 5(4) integrator; the system is trace free, so transfer
matrices lie in SL(2, C) up to integration error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (EvaluationAtPole, InvalidConfiguration, PathTooClose,
                     SingularConstraintSystem, ToleranceNotMet)

__all__ = [
    "SchwarzianData", "LocalModel", "TransportPath", "MonodromyRep",
    "solve_accessory_constraints", "q_coefficient", "transport",
    "transport_cumulative", "build_path", "loop_path",
    "monodromy_generators", "residue_degree_check",
    "default_basepoint", "default_r_min",
]

EPS_LIN = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_EPS_MON = 1e-9


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchwarzianData:
    """Poles, angle parameters and accessory parameters of the coefficient Q."""

    poles: tuple[complex, ...]
    angles: tuple[float, ...]
    accessory: tuple[complex, ...]

    def __post_init__(self):
        n = len(self.poles)
        if not (n == len(self.angles) == len(self.accessory)):
            raise InvalidConfiguration("poles/angles/accessory length mismatch")
        if n < 3:
            raise InvalidConfiguration("need at least 3 poles")
        for i in range(n):
            for j in range(i + 1, n):
                if self.poles[i] == self.poles[j]:
                    raise InvalidConfiguration("poles must be pairwise distinct")
        for a in self.angles:
            if not (0 < a < 1):
                raise InvalidConfiguration(f"angle parameter {a} outside (0, 1)")
        res = constraint_residuals(self.poles, self.angles, self.accessory)
        scale = max(1.0, max(abs(b) for b in self.accessory))
        if max(res) > 1e-9 * scale:
            raise InvalidConfiguration(
                f"accessory parameters violate the moment constraints: {res}")

    @property
    def n(self) -> int:
        return len(self.poles)


@dataclass(frozen=True)
class LocalModel:
    """Local exponents and eigendirections of the system at one pole.

    The flag direction at pole i is the eigenline of the smaller residue
    exponent rho_minus; leaves of the induced foliation near it are graphs
    y = c * t**alpha with alpha = rho_plus - rho_minus.
    """

    index: int
    rho_minus: float
    rho_plus: float

    def __post_init__(self):
        alpha = self.rho_plus - self.rho_minus
        if abs(alpha - round(alpha)) < 1e-15:
            raise InvalidConfiguration("resonant exponents at a pole")

    @property
    def alpha(self) -> float:
        return self.rho_plus - self.rho_minus


def local_model(data: SchwarzianData, i: int) -> LocalModel:
    a = data.angles[i]
    return LocalModel(i, (1 - a) / 2, (1 + a) / 2)


@dataclass(frozen=True)
class TransportPath:
    """Piecewise path of straight segments and circular arcs.

    Elements are ("line", za, zb) or ("arc", center, radius, th0, th1);
    arcs run from angle th0 to th1 (signed, so th1 < th0 is clockwise).
    """

    elements: tuple[tuple, ...]

    @staticmethod
    def from_points(points) -> "TransportPath":
        elems = []
        for a, b in zip(points, points[1:]):
            if a != b:
                elems.append(("line", complex(a), complex(b)))
        return TransportPath(tuple(elems))

    @property
    def start(self) -> complex:
        return _element_endpoints(self.elements[0])[0]

    @property
    def end(self) -> complex:
        return _element_endpoints(self.elements[-1])[1]

    def length(self) -> float:
        return sum(_element_length(e) for e in self.elements)

    def reversed(self) -> "TransportPath":
        out = []
        for e in reversed(self.elements):
            if e[0] == "line":
                out.append(("line", e[2], e[1]))
            else:
                out.append(("arc", e[1], e[2], e[4], e[3]))
        return TransportPath(tuple(out))

    def concat(self, other: "TransportPath") -> "TransportPath":
        return TransportPath(self.elements + other.elements)

    def clearance(self, poles) -> float:
        return min(_element_pole_distance(e, p)
                   for e in self.elements for p in poles)


def _element_endpoints(e):
    if e[0] == "line":
        return e[1], e[2]
    _, c, r, th0, th1 = e
    return (c + r * cmath.exp(1j * th0), c + r * cmath.exp(1j * th1))


def _element_length(e):
    if e[0] == "line":
        return abs(e[2] - e[1])
    return abs(e[4] - e[3]) * e[2]


def _element_pole_distance(e, p: complex) -> float:
    if e[0] == "line":
        _, a, b = e
        d = b - a
        L2 = abs(d) ** 2
        if L2 == 0:
            return abs(p - a)
        t = max(0.0, min(1.0, ((p - a) * d.conjugate()).real / L2))
        return abs(p - (a + t * d))
    _, c, r, th0, th1 = e
    rho = abs(p - c)
    phi = cmath.phase(p - c) if rho > 0 else 0.0
    lo, hi = min(th0, th1), max(th0, th1)
    # closest angle on the arc to phi, mod 2*pi
    best = None
    for k in range(int(math.floor((lo - phi) / (2 * math.pi))) - 1,
                   int(math.ceil((hi - phi) / (2 * math.pi))) + 2):
        th = phi + 2 * math.pi * k
        th = max(lo, min(hi, th))
        z = c + r * cmath.exp(1j * th)
        d = abs(p - z)
        if best is None or d < best:
            best = d
    return best


@dataclass(frozen=True)
class MonodromyRep:
    """SL(2, C) monodromy generators at a common basepoint.

    ``ordering`` records the loop order in which the product relation
    (product approx. identity, canonical lift sign +) holds.
    """

    basepoint: complex
    ordering: tuple[int, ...]
    loops: tuple[TransportPath, ...]
    matrices: tuple[np.ndarray, ...]
    angles: tuple[float, ...]

    def det_residuals(self):
        return [abs(np.linalg.det(m) - 1) for m in self.matrices]

    def trace_residuals(self):
        return [abs(np.trace(m) - (-2 * math.cos(math.pi * a)))
                for m, a in zip(self.matrices, self.angles)]

    def product_residual(self) -> float:
        prod = np.eye(2, dtype=complex)
        for i in self.ordering:
            prod = prod @ self.matrices[i]
        return float(np.max(np.abs(prod - np.eye(2))))

    def validate(self, eps_mon: float = DEFAULT_EPS_MON,
                 trace_tol: float | None = None) -> bool:
        tt = eps_mon if trace_tol is None else trace_tol
        return (max(self.det_residuals()) < eps_mon
                and max(self.trace_residuals()) < tt
                and self.product_residual() < eps_mon)


# ---------------------------------------------------------------------------
# accessory parameters
# ---------------------------------------------------------------------------

def _constraint_system(poles, angles):
    n = len(poles)
    x = np.asarray([complex(p) for p in poles])
    w = np.asarray([(1 - float(a) ** 2) for a in angles])
    A = np.vstack([np.ones(n, dtype=complex), x, x ** 2])
    rhs = np.array([0.0,
                    -np.sum(w) / 2,
                    -np.sum(w * x)], dtype=complex)
    return A, rhs


def constraint_residuals(poles, angles, accessory):
    A, rhs = _constraint_system(poles, angles)
    b = np.asarray([complex(v) for v in accessory])
    return list(np.abs(A @ b - rhs))


def solve_accessory_constraints(poles, angles, free=()) -> SchwarzianData:
    """Accessory parameters satisfying the three moment constraints.

    For n poles the solution set is an affine space of complex dimension
    n - 3; ``free`` supplies coordinates along a deterministic orthonormal
    null-space basis.  For n = 3 the solution is unique and ``free`` must
    be empty.
    """
    n = len(poles)
    free = tuple(complex(c) for c in free)
    if len(free) != n - 3:
        raise InvalidConfiguration(
            f"expected {n - 3} free parameters, got {len(free)}")
    A, rhs = _constraint_system(poles, angles)
    if n == 3:
        try:
            beta = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularConstraintSystem(str(exc)) from exc
    else:
        # particular solution plus null-space offsets
        sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
        if rank < 3:
            raise SingularConstraintSystem("constraint matrix is rank deficient")
        beta = sol
        null = _nullspace_basis(A)
        for c, v in zip(free, null.T):
            beta = beta + c * v
    return SchwarzianData(tuple(complex(p) for p in poles),
                          tuple(float(a) for a in angles),
                          tuple(beta))


def _nullspace_basis(A) -> np.ndarray:
    """Orthonormal null-space basis with a fixed sign convention."""
    _, s, vh = np.linalg.svd(A)
    null = vh[3:].conj().T
    # make the largest-magnitude entry of each column real positive
    for k in range(null.shape[1]):
        col = null[:, k]
        j = int(np.argmax(np.abs(col)))
        phase = col[j] / abs(col[j])
        null[:, k] = col / phase
    return null


def q_coefficient(data: SchwarzianData, z: complex) -> complex:
    """Value of Q at a non-pole point."""
    z = complex(z)
    for p in data.poles:
        if z == p:
            raise EvaluationAtPole(f"Q evaluated at pole {p}")
    return _q(data.poles, data.angles, data.accessory, z)


def _q(poles, angles, accessory, z):
    total = 0j
    for p, a, b in zip(poles, angles, accessory):
        d = z - p
        total += (1 - a * a) / (2 * d * d) + b / d
    return total


# ---------------------------------------------------------------------------
# Dormand-Prince transport of the companion 2x2 system
# ---------------------------------------------------------------------------

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525,
         -1 / 40)


def _rhs(poles, angles, accessory, z, dz, U):
    """dU/ds for U' = dz * [[0, 1], [-Q/2, 0]] @ U, U given row-major."""
    u11, u12, u21, u22 = U
    c = -0.5 * dz * _q(poles, angles, accessory, z)
    return (dz * u21, dz * u22, c * u11, c * u12)


def _integrate_element(data, element, U, tol, h_floor):
    """Advance the transfer matrix across one path element."""
    poles, angles, acc = data.poles, data.angles, data.accessory
    if element[0] == "line":
        _, za, zb = element
        L = abs(zb - za)
        if L == 0:
            return U
        direction = (zb - za) / L

        def zmap(s):
            return za + s * direction, direction
    else:
        _, cen, rad, th0, th1 = element
        L = abs(th1 - th0) * rad
        if L == 0:
            return U
        sgn = 1.0 if th1 >= th0 else -1.0

        def zmap(s):
            th = th0 + sgn * s / rad
            e = cmath.exp(1j * th)
            return cen + rad * e, 1j * sgn * e

    s = 0.0
    h = min(L, 0.1)
    k = [None] * 7
    z, dz = zmap(0.0)
    k[0] = _rhs(poles, angles, acc, z, dz, U)
    while s < L:
        h = min(h, L - s)
        for stage in range(1, 7):
            a = _DP_A[stage]
            y = tuple(U[j] + h * sum(a[m] * k[m][j] for m in range(stage))
                      for j in range(4))
            z, dz = zmap(s + h * _DP_C[stage])
            k[stage] = _rhs(poles, angles, acc, z, dz, y)
        U5 = tuple(U[j] + h * sum(_DP_A[6][m] * k[m][j] for m in range(6))
                   for j in range(4))
        err = h * max(abs(sum(_DP_E[m] * k[m][j] for m in range(7)))
                      for j in range(4))
        scale = max(1.0, max(abs(u) for u in U5))
        target = tol * h * scale  # local error per unit length <= tol
        if err <= target or h <= h_floor:
            if err > target and h <= h_floor:
                raise ToleranceNotMet(
                    f"step size underflow at s={s:.3g} on element {element[0]}")
            s += h
            U = U5
            k[0] = k[6]  # FSAL
            if err > 0:
                h *= min(5.0, max(0.2, 0.9 * (target / err) ** 0.2))
            else:
                h *= 5.0
        else:
            h *= max(0.1, 0.9 * (target / err) ** 0.2)
            if h < h_floor:
                h = h_floor
    return U


_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)


def transport(data: SchwarzianData, path: TransportPath,
              tol: float = DEFAULT_TOL, r_min: float | None = None,
              h_floor: float | None = None) -> np.ndarray:
    """Transfer matrix of (y, y') along ``path``; lies in SL(2, C) to tol."""
    if r_min is None:
        r_min = default_r_min(data.poles)
    if path.elements and path.clearance(data.poles) < r_min:
        raise PathTooClose(
            f"path clearance {path.clearance(data.poles):.3g} below {r_min:.3g}")
    if h_floor is None:
        h_floor = r_min / 100.0
    U = (1 + 0j, 0j, 0j, 1 + 0j)
    for element in path.elements:
        U = _integrate_element(data, element, U, tol, h_floor)
    return np.array([[U[0], U[1]], [U[2], U[3]]])


def transport_cumulative(data: SchwarzianData, path: TransportPath,
                         tol: float = DEFAULT_TOL,
                         r_min: float | None = None,
                         h_floor: float | None = None) -> list[np.ndarray]:
    """Cumulative transfer matrices at the end of every path element."""
    if r_min is None:
        r_min = default_r_min(data.poles)
    if path.elements and path.clearance(data.poles) < r_min:
        raise PathTooClose("path clearance below minimum")
    if h_floor is None:
        h_floor = r_min / 100.0
    U = (1 + 0j, 0j, 0j, 1 + 0j)
    out = []
    for element in path.elements:
        U = _integrate_element(data, element, U, tol, h_floor)
        out.append(np.array([[U[0], U[1]], [U[2], U[3]]]))
    return out


def sl2_inverse(M: np.ndarray) -> np.ndarray:
    """Exact adjugate inverse of a (numerically) unimodular 2x2 matrix."""
    d = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / d


# ---------------------------------------------------------------------------
# deterministic path construction
# ---------------------------------------------------------------------------

def default_r_min(poles) -> float:
    gaps = [abs(p - q) for i, p in enumerate(poles)
            for q in list(poles)[i + 1:]]
    return min(gaps) / 20.0


def default_basepoint(poles, r_min: float | None = None) -> complex:
    if r_min is None:
        r_min = default_r_min(poles)
    z0 = max(abs(p) for p in poles) + 1.0
    while min(abs(z0 - p) for p in poles) < r_min:
        z0 += 2 * r_min
    return complex(z0)


def _detour_radius(poles, i: int) -> float:
    p = poles[i]
    return 0.35 * min(abs(p - q) for j, q in enumerate(poles) if j != i)


def build_path(z_from: complex, z_to: complex, poles,
               skip=(), detour_radii=None) -> TransportPath:
    """Straight path with deterministic arc detours around nearby poles.

    Whenever the segment comes within a pole's detour radius the path
    follows the circle of that radius, passing on the left of the travel
    direction.  Poles listed in ``skip`` are not detoured; they must be
    handled by the caller.  When an endpoint lies inside a detour disc
    the radius shrinks below the endpoint distance, so the path never
    crosses a pole as long as neither endpoint sits on one.
    """
    z_from, z_to = complex(z_from), complex(z_to)
    if z_from == z_to:
        return TransportPath(())
    d = z_to - z_from
    L = abs(d)
    u = d / L
    crossings = []
    for i, p in enumerate(poles):
        if i in skip:
            continue
        rho = (detour_radii[i] if detour_radii is not None
               else _detour_radius(poles, i))
        rho = min(rho, 0.9 * abs(p - z_from), 0.9 * abs(p - z_to))
        if rho <= 0:
            continue
        t = ((p - z_from) * u.conjugate()).real
        if t <= 0 or t >= L:
            continue
        dist = abs(p - (z_from + t * u))
        if dist >= rho:
            continue
        crossings.append((t, i, rho, dist))
    crossings.sort()

    elems: list[tuple] = []
    cursor = z_from
    for t, i, rho, dist in crossings:
        p = poles[i]
        half = math.sqrt(rho * rho - dist * dist)
        z_in = z_from + (t - half) * u
        z_out = z_from + (t + half) * u
        if abs(z_in - cursor) > 0:
            elems.append(("line", cursor, z_in))
        th_in = cmath.phase(z_in - p)
        th_out = cmath.phase(z_out - p)
        # short arc first, flipped if its midpoint is right of the travel
        # direction: detours always pass on the left
        delta = (th_out - th_in) % (2 * math.pi)
        if delta > math.pi:
            delta -= 2 * math.pi
        mid = p + rho * cmath.exp(1j * (th_in + delta / 2))
        if ((mid - p) / u).imag < 0:
            delta = delta - 2 * math.pi if delta > 0 else delta + 2 * math.pi
        elems.append(("arc", p, rho, th_in, th_in + delta))
        cursor = z_out
    if abs(z_to - cursor) > 0:
        elems.append(("line", cursor, z_to))
    return TransportPath(tuple(elems))


def loop_path(data_poles, i: int, basepoint: complex,
              radius: float | None = None) -> TransportPath:
    """Stem + counterclockwise circle + reverse stem around pole i."""
    poles = list(data_poles)
    p = poles[i]
    if radius is None:
        radius = _detour_radius(poles, i)
    direction = (basepoint - p) / abs(basepoint - p)
    entry = p + radius * direction
    stem = build_path(basepoint, entry, poles, skip=(i,))
    th0 = cmath.phase(direction)
    circle = TransportPath((("arc", p, radius, th0, th0 + 2 * math.pi),))
    return stem.concat(circle).concat(stem.reversed())


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def _heuristic_ordering(poles, basepoint: complex) -> tuple[int, ...]:
    """Increasing argument of x_i - basepoint, nearest first on ties."""
    def key(i):
        w = poles[i] - basepoint
        return (cmath.phase(w) % (2 * math.pi), abs(w))
    return tuple(sorted(range(len(poles)), key=key))


def loop_ordering(matrices, poles, basepoint: complex,
                  eps: float = 1e-7) -> tuple[int, ...]:
    """Deterministic loop order whose generator product is the identity.

    Stems that detour around intervening poles shuffle the naive angular
    order, so the angular sort only seeds a lexicographic search over
    permutations.  Any cyclic rotation of a valid order is valid, hence
    the first loop is pinned to the angular sort's first element.
    """
    import itertools

    n = len(matrices)
    seed = _heuristic_ordering(poles, basepoint)

    def residual(perm):
        prod = np.eye(2, dtype=complex)
        for i in perm:
            prod = prod @ matrices[i]
        return float(np.max(np.abs(prod - np.eye(2))))

    if residual(seed) < eps:
        return seed
    first, rest = seed[0], seed[1:]
    for tail in itertools.permutations(rest):
        perm = (first,) + tail
        if residual(perm) < eps:
            return perm
    raise InvalidConfiguration(
        "no loop ordering satisfies the product relation; "
        "monodromy transport is inconsistent")


def monodromy_generators(data: SchwarzianData, basepoint: complex | None = None,
                         ordering: tuple[int, ...] | None = None,
                         tol: float = DEFAULT_TOL,
                         r_min: float | None = None) -> MonodromyRep:
    """Transport around deterministic stem-circle-stem loops at every pole."""
    if r_min is None:
        r_min = default_r_min(data.poles)
    if basepoint is None:
        basepoint = default_basepoint(data.poles, r_min)
    elif min(abs(basepoint - p) for p in data.poles) < r_min:
        raise PathTooClose("basepoint too close to a pole")
    loops = []
    mats = []
    for i in range(data.n):
        path = loop_path(data.poles, i, basepoint)
        stem_len = (len(path.elements) - 1) // 2
        stem = TransportPath(path.elements[:stem_len])
        circle = TransportPath(path.elements[stem_len:stem_len + 1])
        if stem.elements:
            S = transport(data, stem, tol, r_min)
        else:
            S = np.eye(2, dtype=complex)
        C = transport(data, circle, tol, r_min)
        M = sl2_inverse(S) @ C @ S
        loops.append(path)
        mats.append(M)
    if ordering is None:
        ordering = loop_ordering(mats, data.poles, basepoint)
    return MonodromyRep(complex(basepoint), tuple(ordering), tuple(loops),
                        tuple(mats), data.angles)


def residue_degree_check(weights) -> Fraction:
    """Sum of all weights; equals n by the weight normalization."""
    total = sum(a1 + a2 for a1, a2 in weights.pairs)
    assert total == weights.n, "weight pairs must sum to one each"
    return total
