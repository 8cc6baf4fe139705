import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from conftest import random_stable
from trajcert.errors import NotStable, SingularLyapunovOperator, TailNotConverged
from trajcert.oracles import (
    PEAK_SDP_REFERENCE_BOUND,
    OracleReport,
    ellipsoid_invariance_check,
    hinf_norm,
    is_hurwitz,
    lyap_solve_model,
    max_output_energy_sim,
    observability_gramian,
)
from trajcert.trajectory import LtiModel


def test_lyap_reference_solution(lyap_system):
    P = lyap_solve_model(lyap_system.A, np.eye(2))
    assert np.allclose(P, [[11 / 6, 0.5], [0.5, 1 / 3]], atol=1e-12)
    assert np.allclose(lyap_solve_model(-np.eye(3), np.eye(3)), np.eye(3) / 2)


def test_lyap_random_residual_and_pd():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        A = random_stable(rng, n)
        P = lyap_solve_model(A, np.eye(n))
        assert np.array_equal(P, P.T)
        assert np.linalg.norm(P @ A + A.T @ P + np.eye(n)) <= 1e-8 * math.sqrt(n)
        assert np.all(np.linalg.eigvalsh(P) > 0)
        assert is_hurwitz(A)


def test_lyap_singular_operator():
    with pytest.raises(SingularLyapunovOperator):
        lyap_solve_model([[0.0, 1.0], [-1.0, 0.0]], np.eye(2))
    assert not is_hurwitz([[0.0, 1.0], [-1.0, 0.0]])
    assert not is_hurwitz([[1.0, 0.0], [0.0, -1.0]])


def test_gramian_examples():
    A = [[0.0, 1.0], [-4.0, -2.0]]
    assert np.allclose(observability_gramian(A, [[1.0, 0.0]]), [[0.5, 0.125], [0.125, 0.0625]])
    assert np.allclose(observability_gramian(A, [[0.0, 1.0]]), [[1.0, 0.0], [0.0, 0.25]])
    assert not observability_gramian(A, [[0.0, 0.0]]).any()
    with pytest.raises(NotStable):
        observability_gramian([[1.0]], [[1.0]])


def test_gramian_matches_quadrature():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        A = random_stable(rng, n, margin=0.3)
        C = rng.standard_normal((1, n))

        def integrand(t):
            E = scipy.linalg.expm(A * t)
            return E.T @ C.T @ C @ E

        ref, _ = scipy.integrate.quad_vec(integrand, 0, np.inf, epsrel=1e-10)
        W = observability_gramian(A, C)
        assert np.max(np.abs(W - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_hinf_examples(gain_system):
    assert hinf_norm(gain_system) == pytest.approx(15.0, abs=1e-3)
    assert hinf_norm(LtiModel([[-1.0]], [[0.0]], [[0.0]], [[-2.5]])) == pytest.approx(2.5)
    assert hinf_norm(LtiModel([[-1.0]], [[1.0]], [[1.0]])) == pytest.approx(1.0)
    with pytest.raises(NotStable):
        hinf_norm(LtiModel([[0.5]], [[1.0]], [[1.0]]))


def test_hinf_resonant_peak():
    # lightly damped oscillator peaks near w = 1 with |G| = 1 / (2 zeta sqrt(1 - zeta^2))
    z = 0.05
    m = LtiModel([[0.0, 1.0], [-1.0, -2 * z]], [[0.0], [1.0]], [[1.0, 0.0]])
    assert hinf_norm(m) == pytest.approx(1 / (2 * z * math.sqrt(1 - z * z)), rel=1e-6)


def test_hinf_mimo_matches_svd():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n = 3
        m = LtiModel(random_stable(rng, n), rng.standard_normal((n, 2)), rng.standard_normal((2, n)))
        ws = np.logspace(-3, 3, 4000)
        ref = max(
            np.linalg.svd(m.C @ np.linalg.solve(1j * w * np.eye(n) - m.A, m.B), compute_uv=False)[0]
            for w in np.append(ws, 0.0)
        )
        assert hinf_norm(m) >= ref * (1 - 1e-6)
        assert hinf_norm(m) <= ref * (1 + 1e-3)


def test_hinf_at_least_dc_gain():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        m = LtiModel(random_stable(rng, n), rng.standard_normal((n, 1)), rng.standard_normal((1, n)), [[rng.normal()]])
        dc = abs((m.D - m.C @ np.linalg.solve(m.A, m.B)).item())
        assert hinf_norm(m) >= dc * (1 - 1e-12)


def test_energy_simulation(energy_system):
    assert max_output_energy_sim(energy_system, [2.0, 2.0], T=30.0, dt=1e-3) == pytest.approx(3.25, abs=1e-3)
    assert max_output_energy_sim(energy_system, [0.0, 0.0], T=1.0, dt=0.1) == 0.0
    scalar = LtiModel([[-1.0]], C=[[1.0]])
    assert max_output_energy_sim(scalar, [1.0], T=20.0, dt=1e-3) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(TailNotConverged):
        max_output_energy_sim(energy_system, [2.0, 2.0], T=2.0, dt=1e-2)


def test_ellipsoid_identity_for_pure_decay():
    rep = ellipsoid_invariance_check(LtiModel(-np.eye(2), C=np.eye(2)), np.eye(2), samples=20, T=2.0, dt=0.01)
    assert rep.invariant
    assert rep.max_level == pytest.approx(1.0)
    assert np.all(np.diff(rep.levels, axis=1) < 0)
    assert rep.max_output_norm == pytest.approx(1.0)


def test_ellipsoid_wrong_p_reports_violations():
    m = LtiModel([[-1.0, 10.0], [0.0, -1.0]])
    rep = ellipsoid_invariance_check(m, np.eye(2), samples=50, T=2.0, dt=0.01)
    assert rep.violations > 0 and rep.max_level > 1.0


def test_ellipsoid_is_seeded():
    m = LtiModel([[-1.0, 10.0], [0.0, -1.0]])
    a = ellipsoid_invariance_check(m, np.eye(2), samples=5, T=1.0, seed=3)
    b = ellipsoid_invariance_check(m, np.eye(2), samples=5, T=1.0, seed=3)
    assert np.array_equal(a.levels, b.levels)


def test_oracle_report():
    r = OracleReport("gamma", 15.0, 14.85)
    assert r.abs_deviation == pytest.approx(0.15, abs=1e-12)
    assert r.rel_deviation == pytest.approx(0.01, abs=1e-12)
    assert OracleReport("x", 0.0, 0.0).rel_deviation == 0.0
    assert OracleReport("x", 0.0, 1.0).to_dict()["rel_deviation"] is None
    assert PEAK_SDP_REFERENCE_BOUND == 3.2915
