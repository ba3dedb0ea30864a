"""Spherical metric from the developing section, and its verification.

Frames of the system are transported from the basepoint; seeding the
frame with H^(-1/2) turns the monodromy into a right unitary action on
the solution pair (y1, y2), so the conformal factor

    lambda = 2 |f'| / (1 + |f|^2),   f = y1 / y2

of the pulled-back round fibre metric is single-valued on the punctured
sphere.  The Wronskian y1*y2' - y1'*y2 is constant (trace-free system)
and the derivative f' is computed from it, so lambda never vanishes:
this is the numerical shadow of the zero tangency count between the
section and the foliation.

Verification recomputes the defining properties numerically: Gaussian
curvature 1 on grids, cone angles from circumference/radius ratios, the
total area against its angle-sum value, and path independence.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfiguration, PathTooClose, StencilTooCloseToPole
from .schwarzian import (DEFAULT_TOL, SchwarzianData, TransportPath,
                         build_path, default_basepoint, default_r_min,
                         loop_path, transport)
from .unitarize import UnitarityCertificate

__all__ = [
    "DevelopedFrame", "MetricSample", "VerificationReport", "Developer",
    "develop", "conformal_factor", "curvature_check", "cone_angle_estimate",
    "area_estimate", "transversality_check", "path_independence_residual",
    "gauss_bonnet_area", "verify_metric", "metric_grid", "config_hash",
]

FRAME_TOL = 1e-11


@dataclass(frozen=True)
class DevelopedFrame:
    """Transported solution pair at a point, in the unitary gauge.

    ``f`` is the developing value y1/y2 and ``fprime`` its derivative,
    recovered from the constant Wronskian instead of finite differences.
    The chart tag records whether f or 1/f is the numerically safe
    coordinate at this point.
    """

    z: complex
    y: tuple[complex, complex]
    dy: tuple[complex, complex]
    chart: str  # "f" | "1/f"
    wronskian: complex

    @property
    def f(self) -> complex:
        return self.y[0] / self.y[1]

    @property
    def fprime(self) -> complex:
        return -self.wronskian / self.y[1] ** 2

    @property
    def f_inv(self) -> complex:
        return self.y[1] / self.y[0]

    @property
    def f_inv_prime(self) -> complex:
        return self.wronskian / self.y[0] ** 2


@dataclass(frozen=True)
class MetricSample:
    z: complex
    lam: float
    chart: str
    path_id: str = "default"

    def __post_init__(self):
        if not (self.lam > 0):
            raise InvalidConfiguration("conformal factor must be positive")


@dataclass(frozen=True)
class VerificationReport:
    curvature_max_deviation: float
    cone_angle_estimates: tuple[float, ...]
    cone_angle_targets: tuple[float, ...]
    area: float
    area_target: float
    path_independence_residual: float
    min_lambda: float
    monodromy_angle_consistency: float
    tolerances: dict = field(default_factory=dict)

    @property
    def cone_angle_rel_errors(self) -> tuple[float, ...]:
        return tuple(abs(e - t) / t for e, t in
                     zip(self.cone_angle_estimates, self.cone_angle_targets))

    def passed(self, curvature_tol=1e-4, angle_rel_tol=1e-3, area_tol=1e-2,
               path_tol=1e-8, lambda_floor=1e-6) -> bool:
        return (self.curvature_max_deviation < curvature_tol
                and max(self.cone_angle_rel_errors) < angle_rel_tol
                and abs(self.area - self.area_target) < area_tol
                and self.path_independence_residual < path_tol
                and self.min_lambda > lambda_floor)


def gauss_bonnet_area(angles) -> float:
    """Total area forced by the angle sum: 2*pi*(2 - sum(1 - alpha))."""
    return 2 * math.pi * (2 - sum(1 - float(a) for a in angles))


def config_hash(data: SchwarzianData) -> int:
    """Deterministic seed derived from the configuration."""
    key = repr((tuple(data.poles), tuple(data.angles),
                tuple(data.accessory))).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


# ---------------------------------------------------------------------------
# frame transport
# ---------------------------------------------------------------------------

def _initial_frame(Gi: np.ndarray) -> np.ndarray:
    """Basepoint frame H^(-1/2) V with V unitary chosen so f(z0) = 0 and
    f'(z0) > 0 (equal to 1 when H is the identity).

    Seeding with H^(-1/2) turns the monodromy into a right unitary
    action, which makes lambda single-valued.  The gauge must multiply
    on the right of the transfer matrix: a left factor would mix the
    value row with the derivative row and f' would stop being the
    derivative of f.
    """
    g00, g01 = Gi[0, 0], Gi[0, 1]
    norm = math.hypot(abs(g00), abs(g01))
    v1 = np.array([-g01.conjugate(), g00.conjugate()]) / norm
    v2 = np.array([g00.conjugate(), g01.conjugate()]) / norm
    V = np.column_stack([v1, v2])
    # rotate the first column so the Wronskian makes f'(z0) positive
    detV = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    V[:, 0] *= -detV.conjugate() / abs(detV)
    return Gi @ V


class Developer:
    """Caches gauge data and basepoint for repeated frame transport."""

    def __init__(self, data: SchwarzianData, cert: UnitarityCertificate,
                 tol: float = FRAME_TOL):
        self.data = data
        self.cert = cert
        self.tol = tol
        self.Gi = cert.form.inv_sqrt()
        self.r_min = default_r_min(data.poles)
        self.z0 = default_basepoint(data.poles, self.r_min)
        self.frame0 = _initial_frame(self.Gi)

    def raw_transfer(self, path: TransportPath,
                     r_min: float | None = None) -> np.ndarray:
        rm = self.r_min if r_min is None else r_min
        return transport(self.data, path, self.tol, rm,
                         h_floor=rm * 1e-4)

    def frame_from_transfer(self, z: complex, T: np.ndarray) -> DevelopedFrame:
        U = T @ self.frame0
        y1, y2 = U[0, 0], U[0, 1]
        dy1, dy2 = U[1, 0], U[1, 1]
        w = y1 * dy2 - dy1 * y2
        chart = "f" if abs(y1) <= abs(y2) else "1/f"
        return DevelopedFrame(complex(z), (y1, y2), (dy1, dy2), chart, w)

    def frame_at(self, z: complex, path: TransportPath | None = None,
                 r_min: float | None = None) -> DevelopedFrame:
        if path is None:
            path = build_path(self.z0, z, self.data.poles)
        T = self.raw_transfer(path, r_min)
        return self.frame_from_transfer(z, T)

    def frames_chain(self, waypoints, T_start: np.ndarray,
                     start: complex, r_min: float | None = None,
                     detour_radii=None, skip=()) -> list[DevelopedFrame]:
        """Frames at consecutive waypoints, reusing the running transfer."""
        T = T_start
        cursor = complex(start)
        out = []
        for z in waypoints:
            leg = build_path(cursor, z, self.data.poles, skip=skip,
                             detour_radii=detour_radii)
            if leg.elements:
                T = self.raw_transfer(leg, r_min) @ T
            out.append(self.frame_from_transfer(z, T))
            cursor = complex(z)
        return out


def develop(data: SchwarzianData, cert: UnitarityCertificate, z: complex,
            path: TransportPath | None = None,
            tol: float = FRAME_TOL) -> DevelopedFrame:
    """Developed frame at z, transported along ``path`` (default: the
    deterministic detoured segment from the basepoint)."""
    return Developer(data, cert, tol).frame_at(z, path)


def conformal_factor(frame: DevelopedFrame) -> float:
    """Length density of the pulled-back round metric at the frame point."""
    # mirror charts agree: 2|f'|/(1+|f|^2) is invariant under f -> 1/f
    if frame.chart == "f":
        f, fp = frame.f, frame.fprime
    else:
        f, fp = frame.f_inv, frame.f_inv_prime
    return 2.0 * abs(fp) / (1.0 + abs(f) ** 2)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def default_probe_centers(data: SchwarzianData, clearance: float,
                          limit: int = 24) -> list[complex]:
    """Deterministic lattice of probe centers with the given pole clearance."""
    xs = [p.real for p in data.poles]
    ys = [p.imag for p in data.poles]
    lo_x, hi_x = min(xs) - 0.6, max(xs) + 0.6
    lo_y, hi_y = min(ys) - 0.6, max(ys) + 0.6
    out = []
    steps = 9
    for i in range(steps):
        for j in range(steps):
            z = complex(lo_x + (hi_x - lo_x) * i / (steps - 1),
                        lo_y + (hi_y - lo_y) * j / (steps - 1))
            if min(abs(z - p) for p in data.poles) >= clearance:
                out.append(z)
    if len(out) > limit:
        stride = len(out) / limit
        out = [out[int(k * stride)] for k in range(limit)]
    return out


def curvature_check(data: SchwarzianData, cert: UnitarityCertificate,
                    centers=None, h: float = 1e-3,
                    clearance: float = 0.1,
                    tol: float = FRAME_TOL) -> float:
    """max |K - 1| over the grid, K from five-point stencils on log lambda.

    Stencils at spacings h and 2h share the transported center frame;
    one Richardson step removes the O(h^2) truncation term, which would
    otherwise dominate near the cone points.
    """
    dev = Developer(data, cert, tol)
    if centers is None:
        centers = default_probe_centers(data, clearance)
    r_curv = 10 * h
    worst = 0.0
    for c in centers:
        if min(abs(c - p) for p in data.poles) < max(clearance, r_curv):
            raise StencilTooCloseToPole(
                f"stencil center {c} within clearance of a cone point")
        Tc = dev.raw_transfer(build_path(dev.z0, c, data.poles))
        lam_c = conformal_factor(dev.frame_from_transfer(c, Tc))
        K = {}
        for step in (h, 2 * h):
            acc = 0.0
            for delta in (step, -step, 1j * step, -1j * step):
                leg = TransportPath((
                    ("line", complex(c), complex(c + delta)),))
                T = transport(data, leg, tol * 1e-1, r_min=r_curv / 20) @ Tc
                acc += math.log(conformal_factor(
                    dev.frame_from_transfer(c + delta, T)))
            laplace = (acc - 4.0 * math.log(lam_c)) / (step * step)
            K[step] = -laplace / (lam_c * lam_c)
        worst = max(worst, abs((4 * K[h] - K[2 * h]) / 3 - 1.0))
    return worst


# ---------------------------------------------------------------------------
# cone angles
# ---------------------------------------------------------------------------

_GL8 = np.polynomial.legendre.leggauss(8)


def _clearance(poles, i: int) -> float:
    p = poles[i]
    return min(abs(p - q) for j, q in enumerate(poles) if j != i)


def cone_angle_estimate(data: SchwarzianData, cert: UnitarityCertificate,
                        i: int, radii=None, n_theta: int = 64,
                        tol: float = FRAME_TOL) -> float:
    """Angle parameter at pole i from circumference / radius ratios.

    For each radius r the circumference L(r) is a trapezoid sum of lambda
    around the circle, and the radius proxy s(r) integrates lambda along
    a fixed ray into the cone point (dyadic panels with Gauss-Legendre
    nodes, plus the analytic tail of the local model).  The ratio
    L / (2*pi*s) tends to alpha_i with corrections in powers of
    r^(2 alpha); two Richardson levels with the measured local exponent
    remove the first two.
    """
    dev = Developer(data, cert, tol)
    poles = data.poles
    x = poles[i]
    clear = _clearance(poles, i)
    if radii is None:
        radii = [clear / 4, clear / 8, clear / 16]
    if max(radii) >= clear / 2:
        raise InvalidConfiguration(
            f"radii must stay below half the clearance {clear / 2:.3g}")
    alpha = data.angles[i]
    e_hat = (dev.z0 - x) / abs(dev.z0 - x)

    estimates = []
    exponents = []
    for r in radii:
        entry = x + r * e_hat
        stem = build_path(dev.z0, entry, poles, skip=(i,))
        T_entry = dev.raw_transfer(stem, r_min=r / 2)

        # circumference: trapezoid over the full circle
        th0 = cmath.phase(e_hat)
        lam_sum = 0.0
        T = T_entry
        for k in range(n_theta):
            lam_sum += conformal_factor(dev.frame_from_transfer(
                x + r * cmath.exp(1j * (th0 + 2 * math.pi * k / n_theta)), T))
            arc = TransportPath((
                ("arc", x, r, th0 + 2 * math.pi * k / n_theta,
                 th0 + 2 * math.pi * (k + 1) / n_theta),))
            T = transport(data, arc, tol, r_min=r / 2) @ T
        L = lam_sum * (2 * math.pi * r / n_theta)

        # radius proxy: dyadic panels down the ray plus the model tail
        s_val = 0.0
        T = T_entry
        cursor = entry
        levels = 15
        trace = []
        for j in range(levels):
            hi, lo = r * 0.5 ** j, r * 0.5 ** (j + 1)
            nodes = [(lo + hi) / 2 + (hi - lo) / 2 * u for u in _GL8[0]]
            nodes = sorted(nodes, reverse=True)
            weights = [(hi - lo) / 2 * w for w in _GL8[1]]
            weights.reverse()
            for t, w in zip(nodes, weights):
                zt = x + t * e_hat
                leg = TransportPath((("line", complex(cursor), complex(zt)),))
                # roundoff in the stepper scales like eps/t^2, so the
                # requested tolerance must back off on deep panels
                leg_tol = max(tol, 1e-13 / (t * t))
                T = transport(data, leg, leg_tol, r_min=t / 4,
                              h_floor=t * 1e-6) @ T
                lam = conformal_factor(dev.frame_from_transfer(zt, T))
                s_val += lam * w
                cursor = zt
                trace.append((t, lam))
        # tail below the last node from the measured local exponent
        (t1, lam1), (t2, lam2) = trace[-9], trace[-1]
        a_loc = 1.0 + math.log(lam2 / lam1) / math.log(t2 / t1)
        s_val += lam2 * t2 / a_loc
        estimates.append(L / (2 * math.pi * s_val))
        exponents.append(a_loc)

    if len(estimates) < 3:
        return estimates[-1]
    # ratio between consecutive radii, assumed constant
    q = radii[-2] / radii[-1]
    p1 = 2.0 * exponents[-1]
    level1 = [(estimates[k + 1] * q ** p1 - estimates[k]) / (q ** p1 - 1)
              for k in range(len(estimates) - 1)]
    p2 = min(2.0 * p1, 2.0)
    if abs(p2 - p1) < 1e-12:
        return level1[-1]
    return (level1[-1] * q ** p2 - level1[-2]) / (q ** p2 - 1)


# ---------------------------------------------------------------------------
# area
# ---------------------------------------------------------------------------

def _smoothstep(s: float) -> float:
    """Smooth 0 -> 1 transition; infinitely flat at both ends, so the
    partition of unity never limits the quadrature order."""
    if s <= 0:
        return 0.0
    if s >= 1:
        return 1.0
    a = math.exp(-1.0 / s)
    b = math.exp(-1.0 / (1.0 - s))
    return a / (a + b)


def _bump_weight(z: complex, poles, discs) -> float:
    """1 - sum of cone-point cutoffs; exactly 0 inside the plateaus."""
    w = 1.0
    for p, d in zip(poles, discs):
        r = abs(z - p)
        if r >= d:
            continue
        w -= 1.0 - _smoothstep((r - 0.5 * d) / (0.5 * d))
    return max(w, 0.0)


def area_estimate(data: SchwarzianData, cert: UnitarityCertificate,
                  n_radial: int = 48, n_angular: int = 48,
                  tol: float = FRAME_TOL) -> float:
    """Total area of the metric by two-chart quadrature.

    The plane chart covers |z| <= R with a smooth partition of unity that
    vanishes near the cone points; each cone point carries its own polar
    quadrature with a radial substitution t = d * u^(1/(2 alpha)) that
    absorbs the r^(2 alpha - 2) density; the complement |z| > R is
    integrated in the w = 1/z chart (no singular points there).
    """
    dev = Developer(data, cert, tol)
    poles = data.poles
    gaps = [_clearance(poles, i) for i in range(len(poles))]
    discs = [0.45 * g for g in gaps]
    detours = [0.2 * g for g in gaps]
    R = max(abs(p) for p in poles) + 2.0

    gl_r, gl_w = np.polynomial.legendre.leggauss(n_radial)
    dtheta = 2 * math.pi / n_angular
    total = 0.0

    # plane chart |z| <= R
    for j in range(n_angular):
        th = dtheta * j
        start = R * cmath.exp(1j * th)
        T = dev.raw_transfer(build_path(dev.z0, start, poles))
        radii = sorted(((R / 2) * (1 + u) for u in gl_r), reverse=True)
        weights = [(R / 2) * w for w in gl_w]
        weights.reverse()
        cursor = start
        for r, w in zip(radii, weights):
            z = r * cmath.exp(1j * th)
            inside = [k for k, p in enumerate(poles)
                      if abs(z - p) < detours[k]]
            if inside:
                continue  # integrand is zero on the plateau there
            leg = build_path(cursor, z, poles, detour_radii=detours)
            if leg.elements:
                T = transport(data, leg, tol, r_min=min(detours) / 2,
                              h_floor=1e-9) @ T
            cursor = z
            bump = _bump_weight(z, poles, discs)
            if bump > 0.0:
                lam = conformal_factor(dev.frame_from_transfer(z, T))
                total += lam * lam * bump * r * w * dtheta

    # complement chart w = 1/z over |w| < 1/R
    for j in range(n_angular):
        phi = dtheta * j
        start = R * cmath.exp(-1j * phi)
        T = dev.raw_transfer(build_path(dev.z0, start, poles))
        rhos = sorted(((0.5 / R) * (1 + u) for u in gl_r), reverse=True)
        weights = [(0.5 / R) * w for w in gl_w]
        weights.reverse()
        cursor = start
        for rho, w in zip(rhos, weights):
            z = (1.0 / rho) * cmath.exp(-1j * phi)
            leg = TransportPath((("line", complex(cursor), complex(z)),))
            T = transport(data, leg, tol, r_min=1.0) @ T
            cursor = z
            lam = conformal_factor(dev.frame_from_transfer(z, T))
            total += lam * lam * rho ** -3 * w * dtheta

    # cone-point discs: reach the bounding circle once, then walk around
    # it so the rays never have to cross the excluded pole
    us = sorted((0.5 * (1 + u) for u in gl_r), reverse=True)
    ws = [0.5 * w for w in gl_w]
    ws.reverse()
    for i, (p, d) in enumerate(zip(poles, discs)):
        alpha = data.angles[i]
        q = 1.0 / (2 * alpha)
        e_hat = (dev.z0 - p) / abs(dev.z0 - p)
        th_base = cmath.phase(e_hat)
        T_circ = dev.raw_transfer(
            build_path(dev.z0, p + d * e_hat, poles, skip=(i,)),
            r_min=d / 2)
        for j in range(n_angular):
            th = th_base + dtheta * j
            entry = p + d * cmath.exp(1j * th)
            T = T_circ
            cursor = entry
            for u, w in zip(us, ws):
                t = d * u ** q
                z = p + t * cmath.exp(1j * th)
                leg = TransportPath((("line", complex(cursor), complex(z)),))
                T = transport(data, leg, max(tol, 1e-13 / (t * t)),
                              r_min=t / 4, h_floor=t * 1e-6) @ T
                cursor = z
                chi = 1.0 - _smoothstep((t - 0.5 * d) / (0.5 * d))
                if chi <= 0.0:
                    continue
                lam = conformal_factor(dev.frame_from_transfer(z, T))
                # jacobian of t = d * u^q: t * dt/du = d^2 q u^(2q - 1)
                total += lam * lam * chi * d * d * q * u ** (2 * q - 1) \
                    * w * dtheta
            arc = TransportPath((("arc", p, d, th, th + dtheta),))
            T_circ = transport(data, arc, tol, r_min=d / 2) @ T_circ
    return total


# ---------------------------------------------------------------------------
# transversality / path independence
# ---------------------------------------------------------------------------

def probe_points(data: SchwarzianData, clearance: float,
                 count: int = 40) -> list[complex]:
    """Seeded random probes with pole clearance, reproducible per config."""
    rng = np.random.default_rng(config_hash(data))
    xs = [p.real for p in data.poles]
    ys = [p.imag for p in data.poles]
    lo_x, hi_x = min(xs) - 1.0, max(xs) + 1.0
    lo_y, hi_y = min(ys) - 1.0, max(ys) + 1.0
    out = []
    while len(out) < count:
        z = complex(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
        if min(abs(z - p) for p in data.poles) >= clearance:
            out.append(z)
    return out


def transversality_check(data: SchwarzianData, cert: UnitarityCertificate,
                         clearance: float | None = None, count: int = 40,
                         tol: float = FRAME_TOL) -> float:
    """Minimum of lambda over the probe set (positivity = transversality)."""
    if clearance is None:
        clearance = max(0.1, default_r_min(data.poles))
    dev = Developer(data, cert, tol)
    return min(conformal_factor(dev.frame_at(z))
               for z in probe_points(data, clearance, count))


def path_independence_residual(data: SchwarzianData,
                               cert: UnitarityCertificate,
                               count: int = 3,
                               tol: float = FRAME_TOL) -> float:
    """Max |lambda difference| between non-homotopic paths to a point."""
    dev = Developer(data, cert, tol)
    points = probe_points(data, 0.25 * min(_clearance(data.poles, i)
                                           for i in range(data.n)),
                          count)
    worst = 0.0
    for z in points:
        direct = build_path(dev.z0, z, data.poles)
        lam_a = conformal_factor(dev.frame_at(z, direct))
        detoured = loop_path(data.poles, 0, dev.z0).concat(direct)
        lam_b = conformal_factor(dev.frame_at(z, detoured))
        worst = max(worst, abs(lam_a - lam_b))
    return worst


def monodromy_angle_consistency(data: SchwarzianData,
                                cert: UnitarityCertificate) -> float:
    """Max deviation between angle parameters and the eigenvalue arguments
    of the gauged monodromy generators."""
    worst = 0.0
    for alpha, M in zip(data.angles, cert.gauged):
        ev = np.linalg.eigvals(M)
        args = sorted(np.angle(ev) % (2 * math.pi))
        # eigenvalues exp(i pi (1 -/+ alpha))
        est = abs(args[1] - args[0]) / (2 * math.pi)
        worst = max(worst, abs(min(est, 1 - est) - min(alpha, 1 - alpha)))
    return worst


# ---------------------------------------------------------------------------
# full verification and grid export
# ---------------------------------------------------------------------------

def verify_metric(data: SchwarzianData, cert: UnitarityCertificate,
                  h: float = 1e-3, clearance: float = 0.1,
                  n_radial: int = 48, n_angular: int = 48,
                  tol: float = FRAME_TOL) -> VerificationReport:
    curvature = curvature_check(data, cert, h=h, clearance=clearance, tol=tol)
    angles = tuple(cone_angle_estimate(data, cert, i, tol=tol)
                   for i in range(data.n))
    area = area_estimate(data, cert, n_radial, n_angular, tol=tol)
    return VerificationReport(
        curvature_max_deviation=curvature,
        cone_angle_estimates=angles,
        cone_angle_targets=tuple(data.angles),
        area=area,
        area_target=gauss_bonnet_area(data.angles),
        path_independence_residual=path_independence_residual(data, cert,
                                                              tol=tol),
        min_lambda=transversality_check(data, cert, clearance=clearance,
                                        tol=tol),
        monodromy_angle_consistency=monodromy_angle_consistency(data, cert),
        tolerances={"curvature": 1e-4, "cone_angle_rel": 1e-3,
                    "area": 1e-2, "path_independence": 1e-8,
                    "lambda_floor": 1e-6, "stencil_h": h,
                    "clearance": clearance},
    )


def metric_grid(data: SchwarzianData, cert: UnitarityCertificate,
                width: int, height: int, domain=None,
                tol: float = FRAME_TOL):
    """Lattice of metric samples; returns (samples, skipped points).

    Samples are produced column by column, chaining transports down each
    column; lattice points that hit a cone point are skipped.
    """
    dev = Developer(data, cert, tol)
    if domain is None:
        xs = [p.real for p in data.poles]
        ys = [p.imag for p in data.poles]
        domain = (min(xs) - 1.0, max(xs) + 1.0, min(ys) - 1.0, max(ys) + 1.0)
    lo_x, hi_x, lo_y, hi_y = domain
    eps = min(_clearance(data.poles, k) for k in range(data.n)) / 100
    samples: list[MetricSample] = []
    skipped: list[complex] = []
    for i in range(width):
        x = lo_x + (hi_x - lo_x) * (i / (width - 1) if width > 1 else 0.5)
        column = [complex(x, lo_y + (hi_y - lo_y) *
                          (j / (height - 1) if height > 1 else 0.5))
                  for j in range(height)]
        T = dev.raw_transfer(build_path(dev.z0, column[0], data.poles))
        cursor = column[0]
        for z in column:
            if min(abs(z - p) for p in data.poles) < eps:
                skipped.append(z)
                continue
            leg = build_path(cursor, z, data.poles)
            try:
                if leg.elements:
                    T = transport(data, leg, tol, r_min=0.9 * eps) @ T
            except PathTooClose:
                # the straight chain leg grazed a pole; restart from the
                # basepoint, whose path only approaches z radially
                leg = build_path(dev.z0, z, data.poles)
                T = transport(data, leg, tol, r_min=0.9 * eps)
            cursor = z
            frame = dev.frame_from_transfer(z, T)
            samples.append(MetricSample(z, conformal_factor(frame),
                                        frame.chart))
    return samples, skipped
