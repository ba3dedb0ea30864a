"""Unitarization of an SL(2, C) monodromy representation.

A representation is unitarizable iff it preserves some positive-definite
Hermitian form H with det H = 1; such forms are the points of hyperbolic
3-space in its SL(2, C)/SU(2) model.  The defect

    delta(H) = sum_i || M_i^* H M_i - H ||_F^2

vanishes exactly on the preserved forms, so minimizing it over H both
certifies unitarizability and produces the gauge H^(1/2) that conjugates
the generators into SU(2).  Accessory parameters are then tuned (for
n > 3) until the minimized defect drops below the acceptance threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm, expm_frechet
from scipy.optimize import minimize

from . import exact
from .errors import InvalidConfiguration, NoConvergence, NotUnitarizable
from .gaussian import QI
from .schwarzian import (DEFAULT_TOL, MonodromyRep, SchwarzianData,
                         monodromy_generators, solve_accessory_constraints)

__all__ = [
    "HermitianForm", "UnitarityCertificate", "defect_at", "minimize_over_h",
    "unitarity_defect", "solve_unitarizing_parameters", "gauge_to_unitary",
    "certificate_from_form",
]

DELTA_ACCEPT = 1e-8
GRAD_TOL = 1e-12
ITER_CAP = 10_000


# ---------------------------------------------------------------------------
# Hermitian forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianForm:
    """Positive-definite 2x2 Hermitian matrix with unit determinant."""

    matrix: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", H)
        if np.max(np.abs(H - H.conj().T)) > 1e-10:
            raise InvalidConfiguration("form is not Hermitian")
        w = np.linalg.eigvalsh(H)
        if w[0] <= 0:
            raise InvalidConfiguration("form is not positive definite")
        if abs(np.linalg.det(H) - 1) > 1e-10:
            raise InvalidConfiguration("form must have determinant 1")

    @staticmethod
    def identity() -> "HermitianForm":
        return HermitianForm(np.eye(2, dtype=complex))

    @staticmethod
    def from_parameters(p) -> "HermitianForm":
        """exp of the traceless Hermitian matrix with coordinates p in R^3;
        positivity and det = 1 hold by construction."""
        return HermitianForm(expm(_traceless(p)))

    def sqrt(self) -> np.ndarray:
        w, V = np.linalg.eigh(self.matrix)
        return (V * np.sqrt(w)) @ V.conj().T

    def inv_sqrt(self) -> np.ndarray:
        w, V = np.linalg.eigh(self.matrix)
        return (V / np.sqrt(w)) @ V.conj().T


def _traceless(p) -> np.ndarray:
    a, b, c = float(p[0]), float(p[1]), float(p[2])
    return np.array([[a, b - 1j * c], [b + 1j * c, -a]], dtype=complex)


_BASIS = [_traceless([1, 0, 0]), _traceless([0, 1, 0]), _traceless([0, 0, 1])]


@dataclass(frozen=True)
class UnitarityCertificate:
    """Minimized defect with the certifying form and unitary gauge."""

    delta: float
    form: HermitianForm
    residuals: tuple[float, ...]
    gauge: np.ndarray
    gauged: tuple[np.ndarray, ...]
    commutator_norm: float
    seed_results: tuple = ()

    def accepted(self, delta_accept: float = DELTA_ACCEPT) -> bool:
        return self.delta < delta_accept


# ---------------------------------------------------------------------------
# defect and its minimization
# ---------------------------------------------------------------------------

def _normalized_generators(rep: MonodromyRep) -> list[np.ndarray]:
    out = []
    for M in rep.matrices:
        d = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        out.append(np.asarray(M, dtype=complex) / np.sqrt(d))
    return out


def defect_at(rep: MonodromyRep, H: HermitianForm) -> float:
    """Sum of squared Frobenius norms of M_i^* H M_i - H."""
    Hm = H.matrix
    total = 0.0
    for M in _normalized_generators(rep):
        E = M.conj().T @ Hm @ M - Hm
        total += float(np.sum(np.abs(E) ** 2))
    return total


def _defect_and_grad(mats, p):
    S = _traceless(p)
    H = expm(S)
    W = np.zeros((2, 2), dtype=complex)
    delta = 0.0
    for M in mats:
        E = M.conj().T @ H @ M - H
        delta += float(np.sum(np.abs(E) ** 2))
        W += M @ E.conj().T @ M.conj().T - E.conj().T
    grad = np.empty(3)
    for k, B in enumerate(_BASIS):
        dH = expm_frechet(S, B, compute_expm=False)
        grad[k] = 2.0 * np.real(np.trace(W @ dH))
    return delta, grad


def minimize_over_h(rep: MonodromyRep,
                    start: np.ndarray | None = None
                    ) -> tuple[HermitianForm, float]:
    """Descend the defect over det-1 positive Hermitian forms.

    The form is parameterized as exp of a traceless Hermitian matrix, so
    the search space is R^3 and the constraints hold exactly.  BFGS with
    the analytic gradient reaches the floor of double precision on
    unitarizable input.
    """
    mats = _normalized_generators(rep)
    p0 = np.zeros(3) if start is None else np.asarray(start, dtype=float)
    res = minimize(lambda p: _defect_and_grad(mats, p), p0, jac=True,
                   method="BFGS",
                   options={"gtol": GRAD_TOL, "maxiter": ITER_CAP})
    gnorm = float(np.max(np.abs(res.jac)))
    if res.nit >= ITER_CAP and gnorm > 1e-6:
        raise NoConvergence(
            f"defect descent hit the iteration cap with gradient {gnorm:.2e}")
    form = HermitianForm.from_parameters(res.x)
    return form, float(res.fun)


def gauge_to_unitary(rep: MonodromyRep, H: HermitianForm) -> list[np.ndarray]:
    """Conjugate every generator by H^(1/2); results are unitary up to
    a multiple of sqrt(defect)."""
    G = H.sqrt()
    Gi = H.inv_sqrt()
    return [G @ M @ Gi for M in rep.matrices]


def _certificate(rep: MonodromyRep, form: HermitianForm,
                 delta: float, seed_results=()) -> UnitarityCertificate:
    Hm = form.matrix
    residuals = tuple(
        float(np.linalg.norm(M.conj().T @ Hm @ M - Hm))
        for M in _normalized_generators(rep))
    gauged = tuple(gauge_to_unitary(rep, form))
    comm = 0.0
    for i in range(len(gauged)):
        for j in range(i + 1, len(gauged)):
            C = gauged[i] @ gauged[j] - gauged[j] @ gauged[i]
            comm = max(comm, float(np.linalg.norm(C)))
    return UnitarityCertificate(delta, form, residuals, form.sqrt(), gauged,
                                comm, tuple(seed_results))


def certificate_from_form(rep: MonodromyRep,
                          form: HermitianForm) -> UnitarityCertificate:
    """Certificate for a known form, without re-minimizing; used when a
    solved artifact is reloaded."""
    return _certificate(rep, form, defect_at(rep, form))


def unitarity_defect(data: SchwarzianData,
                     tol: float = DEFAULT_TOL,
                     rep: MonodromyRep | None = None) -> UnitarityCertificate:
    """Monodromy transport followed by defect minimization."""
    if rep is None:
        rep = monodromy_generators(data, tol=tol)
    form, delta = minimize_over_h(rep)
    return _certificate(rep, form, delta)


# ---------------------------------------------------------------------------
# outer search over accessory parameters
# ---------------------------------------------------------------------------

def _rationalize(a) -> Fraction:
    if isinstance(a, Fraction):
        return a
    return Fraction(float(a)).limit_denominator(10 ** 6)


def _check_admissible(poles, angles):
    pts = tuple(QI(Fraction(i), Fraction(0)) for i in range(len(poles)))
    cfg = exact.ConeConfiguration(pts, tuple(_rationalize(a) for a in angles))
    if not exact.check_gauss_bonnet(cfg):
        raise InvalidConfiguration("angle sum violates the area condition")
    if not exact.check_angle_stability(cfg):
        raise InvalidConfiguration("angles violate the stability inequalities")


def _seed_points(dim: int, n_random: int, rng_seed: int) -> list[np.ndarray]:
    seeds = [np.zeros(2 * dim)]
    for k in range(dim):
        for v in (0.75, -0.75):
            s = np.zeros(2 * dim)
            s[2 * k] = v
            seeds.append(s)
        s = np.zeros(2 * dim)
        s[2 * k + 1] = 0.75
        seeds.append(s)
    rng = np.random.default_rng(rng_seed)
    for _ in range(n_random):
        seeds.append(rng.normal(scale=0.8, size=2 * dim))
    return seeds


def solve_unitarizing_parameters(poles, angles, seeds: int = 3,
                                 delta_accept: float = DELTA_ACCEPT,
                                 tol: float = DEFAULT_TOL,
                                 rng_seed: int = 0,
                                 maxiter: int = 200
                                 ) -> tuple[SchwarzianData, UnitarityCertificate]:
    """Find accessory parameters whose monodromy is unitarizable.

    The defect minimized over Hermitian forms is driven below
    ``delta_accept`` by a derivative-free simplex search over the n - 3
    free complex parameters, restarted from a deterministic grid plus
    seeded random draws.  For n = 3 there is nothing to search.
    """
    _check_admissible(poles, angles)
    n = len(poles)
    angles_f = tuple(float(a) for a in angles)
    dim = n - 3

    if dim == 0:
        data = solve_accessory_constraints(poles, angles_f)
        cert = unitarity_defect(data, tol=tol)
        if not cert.accepted(delta_accept):
            raise NotUnitarizable(
                f"defect {cert.delta:.3e} above acceptance {delta_accept:.1e}")
        return data, cert

    def objective(v: np.ndarray) -> float:
        free = [complex(v[2 * k], v[2 * k + 1]) for k in range(dim)]
        data = solve_accessory_constraints(poles, angles_f, free)
        form, delta = minimize_over_h(monodromy_generators(data, tol=tol))
        return delta

    results = []  # (delta, seed index, free vector)
    for idx, s0 in enumerate(_seed_points(dim, n_random=max(0, seeds - 1),
                                          rng_seed=rng_seed)[:max(seeds, 3)]):
        res = minimize(objective, s0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-16,
                                "maxiter": maxiter * 2 * dim,
                                "maxfev": maxiter * 2 * dim})
        results.append((float(res.fun), idx, np.asarray(res.x)))
    results.sort(key=lambda t: (t[0], t[1]))

    best_delta, best_idx, best_v = results[0]
    if best_delta >= delta_accept:
        raise NotUnitarizable(
            f"best defect {best_delta:.3e} over {len(results)} seeds "
            f"above acceptance {delta_accept:.1e}")
    free = [complex(best_v[2 * k], best_v[2 * k + 1]) for k in range(dim)]
    data = solve_accessory_constraints(poles, angles_f, free)
    rep = monodromy_generators(data, tol=tol)
    form, delta = minimize_over_h(rep)
    seed_results = tuple(
        (idx, d, tuple(complex(v[2 * k], v[2 * k + 1]) for k in range(dim)))
        for d, idx, v in results)
    cert = _certificate(rep, form, delta, seed_results)
    if not cert.accepted(delta_accept):
        raise NotUnitarizable(
            f"re-evaluated defect {cert.delta:.3e} above acceptance")
    return data, cert
