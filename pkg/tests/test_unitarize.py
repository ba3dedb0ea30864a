import math

import numpy as np
import pytest

from conemet.errors import InvalidConfiguration, NotUnitarizable
from conemet.schwarzian import MonodromyRep, monodromy_generators
from conemet.unitarize import (HermitianForm, certificate_from_form,
                               defect_at, gauge_to_unitary, minimize_over_h,
                               solve_unitarizing_parameters, unitarity_defect)


def random_su2(rng):
    # Haar-ish draw: normalize a random quaternion
    a, b, c, d = rng.normal(size=4)
    s = math.sqrt(a * a + b * b + c * c + d * d)
    a, b, c, d = a / s, b / s, c / s, d / s
    return np.array([[a + 1j * b, c + 1j * d],
                     [-c + 1j * d, a - 1j * b]])


def fake_rep(matrices, angles=None):
    mats = tuple(np.asarray(M, dtype=complex) for M in matrices)
    if angles is None:
        angles = tuple(0.5 for _ in mats)
    return MonodromyRep(basepoint=2.0, ordering=tuple(range(len(mats))),
                        loops=(), matrices=mats, angles=angles)


def conjugated_su2_rep(rng):
    U1, U2 = random_su2(rng), random_su2(rng)
    U3 = np.linalg.inv(U1 @ U2)
    G = np.array([[1.2, 0.3 + 0.4j], [0.1 - 0.2j, 0.9]])
    G /= np.sqrt(np.linalg.det(G))
    mats = [G @ U @ np.linalg.inv(G) for U in (U1, U2, U3)]
    H_true = np.linalg.inv(G @ G.conj().T)
    H_true /= np.sqrt(np.linalg.det(H_true).real)
    return fake_rep(mats), H_true


class TestHermitianForm:
    def test_gates(self):
        with pytest.raises(InvalidConfiguration):
            HermitianForm(np.array([[1.0, 1.0j], [1.0j, 1.0]]))
        with pytest.raises(InvalidConfiguration):
            HermitianForm(np.array([[-1.0, 0], [0, -1.0]]))
        with pytest.raises(InvalidConfiguration):
            HermitianForm(np.diag([2.0, 2.0]))

    def test_from_parameters_wellformed(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            H = HermitianForm.from_parameters(rng.normal(size=3))
            assert abs(np.linalg.det(H.matrix) - 1) < 1e-10
            S = H.sqrt()
            assert np.max(np.abs(S @ S - H.matrix)) < 1e-12
            assert np.max(np.abs(H.inv_sqrt() @ S - np.eye(2))) < 1e-12


class TestDefect:
    def test_identity_rep_zero_defect(self):
        rep = fake_rep([np.eye(2)] * 3)
        assert defect_at(rep, HermitianForm.identity()) == 0.0

    def test_nonnegative_and_symmetric(self):
        rng = np.random.default_rng(7)
        rep, _ = conjugated_su2_rep(rng)
        H = HermitianForm.from_parameters(rng.normal(size=3))
        d = defect_at(rep, H)
        assert d >= 0
        flipped = fake_rep(rep.matrices[::-1])
        assert abs(defect_at(flipped, H) - d) < 1e-12

    def test_conjugation_covariance(self):
        # the Frobenius defect transforms by congruence with G^-1, so it
        # is preserved exactly when the conjugator is unitary; a general
        # conjugator only preserves the zero set
        rng = np.random.default_rng(19)
        rep, _ = conjugated_su2_rep(rng)
        H = HermitianForm.from_parameters(rng.normal(size=3))
        G = random_su2(rng)
        conj = fake_rep([G @ M @ G.conj().T for M in rep.matrices])
        Ht = G @ H.matrix @ G.conj().T
        assert abs(defect_at(conj, HermitianForm(Ht)) -
                   defect_at(rep, H)) < 1e-10

    def test_general_conjugation_preserves_zero_set(self):
        rng = np.random.default_rng(20)
        rep, H_true = conjugated_su2_rep(rng)
        G = np.array([[1.1, 0.2j], [0.3, 0.8 + 0.1j]])
        G /= np.sqrt(np.linalg.det(G))
        conj = fake_rep([G @ M @ np.linalg.inv(G) for M in rep.matrices])
        Gi = np.linalg.inv(G)
        Ht = Gi.conj().T @ H_true @ Gi
        Ht /= np.sqrt(np.linalg.det(Ht).real)
        assert defect_at(conj, HermitianForm(Ht)) < 1e-20

    def test_su2_oracle_recovery(self):
        rng = np.random.default_rng(23)
        rep, H_true = conjugated_su2_rep(rng)
        form, delta = minimize_over_h(rep)
        assert delta < 1e-16
        assert np.max(np.abs(form.matrix - H_true)) < 1e-7

    def test_gauged_generators_unitary(self):
        rng = np.random.default_rng(29)
        rep, _ = conjugated_su2_rep(rng)
        form, delta = minimize_over_h(rep)
        for U in gauge_to_unitary(rep, form):
            assert np.max(np.abs(U.conj().T @ U - np.eye(2))) < 1e-7

    def test_identity_form_keeps_unitary_rep(self):
        rng = np.random.default_rng(31)
        mats = [random_su2(rng) for _ in range(2)]
        mats.append(np.linalg.inv(mats[0] @ mats[1]))
        rep = fake_rep(mats)
        for U, M in zip(gauge_to_unitary(rep, HermitianForm.identity()),
                        rep.matrices):
            assert np.array_equal(U, M)


class TestSolver:
    def test_n3_certificate(self, solved_n3):
        data, cert = solved_n3
        assert cert.delta < 1e-8
        assert cert.accepted()
        assert max(cert.residuals) < 1e-4

    def test_certificate_from_form_round_trip(self, solved_n3):
        data, cert = solved_n3
        rep = monodromy_generators(data)
        rebuilt = certificate_from_form(rep, cert.form)
        assert abs(rebuilt.delta - cert.delta) < 1e-10
        assert np.max(np.abs(rebuilt.form.matrix - cert.form.matrix)) == 0

    def test_unitarity_defect_direct(self, solved_n3):
        data, _ = solved_n3
        cert = unitarity_defect(data)
        assert cert.delta < 1e-8

    def test_inadmissible_refused(self):
        with pytest.raises(InvalidConfiguration):
            solve_unitarizing_parameters([0.0, 1.0, -1.0],
                                         [0.25, 0.25, 0.25])

    def test_non_unitarizable_rep_bounded_below(self):
        # hyperbolic generators in SL(2, R) preserve no definite form
        A = np.array([[2.0, 0.0], [0.0, 0.5]])
        B = np.array([[1.0, 1.0], [1.0, 2.0]])
        rep = fake_rep([A, B, np.linalg.inv(A @ B)])
        rng = np.random.default_rng(41)
        best = math.inf
        for _ in range(10):
            _, delta = minimize_over_h(rep, start=rng.normal(size=3))
            best = min(best, delta)
        assert best >= 1e-3
