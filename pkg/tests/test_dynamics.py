import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncspin.dynamics import (HamiltonianSpec, eom_rhs, eval_hamiltonian, exact_torus_solution,
                             integrate, validate_initial_point)
from ncspin.errors import DomainExit, DomainViolation, StepFailure
from ncspin.liealg import ETA
from ncspin.orbit import OrbitPoint
from ncspin.spin import poisson_bracket, random_cp11_point

import oracles

P0 = OrbitPoint.cp11(0.3 + 0.1j, -0.2 + 0.4j)


def bounded_generic_spec(J=1.0, seed=11):
    """Random quadratic Hamiltonian dominated by (Q^8)^2, so energy surfaces are compact."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(8, 8)) * 0.005
    A = A + A.T
    A[7, 7] += 1.0
    return HamiltonianSpec(A, rng.normal(size=8) * 0.3, J)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            HamiltonianSpec(np.triu(np.ones((8, 8))), np.zeros(8), 1.0)
        with pytest.raises(ValueError):
            HamiltonianSpec(np.zeros((8, 8)), np.full(8, np.nan), 1.0)
        with pytest.raises(ValueError):
            HamiltonianSpec(np.zeros((8, 8)), np.zeros(8), 0.0)
        with pytest.raises(ValueError):
            HamiltonianSpec(np.zeros((8, 8)), np.zeros(7), 1.0)

    def test_upper_triangle(self):
        up = np.arange(36, dtype=float)
        spec = HamiltonianSpec.from_upper_triangle(up, np.zeros(8), 1.0)
        np.testing.assert_array_equal(spec.c2, spec.c2.T)
        assert spec.c2[0, 7] == 7 and spec.c2[7, 7] == 35

    def test_torus_frequencies_roundtrip(self):
        assert HamiltonianSpec.torus(1.3, -0.4, 1.0).torus_frequencies() == pytest.approx((1.3, -0.4))
        assert bounded_generic_spec().torus_frequencies() is None


class TestHamiltonian:
    def test_linear_q8_at_origin(self):
        c1 = np.zeros(8)
        c1[7] = 0.7
        spec = HamiltonianSpec(np.zeros((8, 8)), c1, 1.5)
        assert eval_hamiltonian(spec, OrbitPoint.cp11(0, 0)) == pytest.approx(0.7 * 2 * 1.5 / np.sqrt(3))

    def test_torus_form_up_to_constant(self):
        J, w1, w2 = 1.25, 0.8, -0.3
        spec = HamiltonianSpec.torus(w1, w2, J)
        h0 = eval_hamiltonian(spec, OrbitPoint.cp11(0, 0))
        for p in [random_cp11_point(np.random.default_rng(s)) for s in range(10)]:
            a1, a2 = np.abs(p.coords) ** 2
            expected = 2 * J * (w1 * a1 + w2 * a2) / p.s
            assert eval_hamiltonian(spec, p) - h0 == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_casimir_hamiltonian(self):
        spec = HamiltonianSpec(np.diag(ETA), np.zeros(8), 0.9)
        for s in range(5):
            p = random_cp11_point(np.random.default_rng(s))
            assert eval_hamiltonian(spec, p) == pytest.approx(4 * 0.9**2 / 3)


class TestEquationsOfMotion:
    def test_torus_oscillators(self):
        J, w1, w2 = 0.75, 1.1, 0.4
        spec = HamiltonianSpec.torus(w1, w2, J)
        for s in range(5):
            p = random_cp11_point(np.random.default_rng(s))
            np.testing.assert_allclose(eom_rhs(spec, p), -1j * np.array([w1, w2]) * p.coords, atol=1e-12)

    def test_constant_hamiltonian(self):
        spec = HamiltonianSpec(np.diag(ETA), np.zeros(8), 1.0)
        np.testing.assert_allclose(eom_rhs(spec, P0), 0, atol=1e-12)
        spec = HamiltonianSpec(np.zeros((8, 8)), np.zeros(8), 1.0)
        np.testing.assert_array_equal(eom_rhs(spec, P0), 0)

    def test_matches_finite_difference_bracket(self):
        spec = bounded_generic_spec(J=1.3)
        for s in range(5):
            p = random_cp11_point(np.random.default_rng(s), 0.8)
            dz, dzb = oracles.wirtinger_grad(lambda z: eval_hamiltonian(spec, OrbitPoint.cp11(*z)), p.coords)
            flow = [poisson_bracket((np.zeros(2), np.eye(2)[k]), (dzb, dz), p, spec.J) for k in range(2)]
            np.testing.assert_allclose(eom_rhs(spec, p), flow, atol=1e-7)


class TestExactSolution:
    def test_t_zero(self):
        np.testing.assert_array_equal(exact_torus_solution(P0, 1.0, 2.0, 0.0).coords, P0.coords)

    @settings(max_examples=30, deadline=None)
    @given(w1=st.floats(-5, 5), w2=st.floats(-5, 5), t=st.floats(-50, 50))
    def test_moduli_preserved(self, w1, w2, t):
        q = exact_torus_solution(P0, w1, w2, t)
        np.testing.assert_allclose(np.abs(q.coords), np.abs(P0.coords), rtol=1e-12)

    def test_periodicity(self):
        w = 1.7
        q = exact_torus_solution(P0, w, w, 2 * np.pi / w)
        np.testing.assert_allclose(q.coords, P0.coords, atol=1e-12)


class TestIntegrate:
    @pytest.mark.parametrize("J", [0.5, 1.5])
    def test_torus_against_exact(self, J):
        w1, w2 = 1.3, -0.7
        tr = integrate(P0, HamiltonianSpec.torus(w1, w2, J), 10.0, 1e-10)
        exact = np.array([exact_torus_solution(P0, w1, w2, t).coords for t in tr.times])
        assert np.abs(tr.coords - exact).max() < 1e-8
        assert tr.times[-1] == 10.0
        assert np.all(np.diff(tr.times) > 0)

    def test_generic_conservation(self):
        spec = bounded_generic_spec()
        tr = integrate(P0, spec, 10.0, 1e-10)
        assert np.abs(tr.energy - tr.energy[0]).max() < 1e-8 * (1 + abs(tr.energy[0]))
        assert np.abs(tr.casimir - tr.casimir[0]).max() < 1e-8
        assert all(p.s > 0 for p in tr.points)

    def test_time_reversal(self):
        spec = bounded_generic_spec(J=0.8, seed=3)
        fwd = integrate(P0, spec, 3.0, 1e-10)
        back = integrate(fwd.points[-1], spec.negated(), 3.0, 1e-10)
        np.testing.assert_allclose(back.points[-1].coords, P0.coords, atol=1e-7)

    def test_escape_raises_domain_exit(self):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(8, 8)) * 0.1
        spec = HamiltonianSpec(A + A.T, rng.normal(size=8), 1.0)
        with pytest.raises(DomainExit):
            integrate(P0, spec, 10.0, 1e-10)

    def test_step_budget(self):
        with pytest.raises(StepFailure):
            integrate(P0, bounded_generic_spec(), 10.0, 1e-10, max_steps=5)

    def test_argument_validation(self):
        spec = HamiltonianSpec.torus(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            integrate(P0, spec, 1.0, tol=1e-3)
        with pytest.raises(ValueError):
            integrate(P0, spec, -1.0)
        with pytest.raises(DomainViolation):
            validate_initial_point([0.8, 0.6])

    def test_csv_output(self):
        tr = integrate(P0, HamiltonianSpec.torus(1.0, 0.5, 1.0), 0.5, 1e-8)
        rows = list(csv.reader(io.StringIO(tr.to_csv())))
        assert rows[0] == ["t", "re_xi1", "im_xi1", "re_xi2", "im_xi2", "energy", "casimir"]
        assert len(rows) == len(tr.times) + 1
        assert float(rows[1][1]) == P0.coords[0].real
        # 17 significant digits survive a float roundtrip exactly
        assert [float(v) for v in rows[-1][1:5]] == list(
            np.ravel([[z.real, z.imag] for z in tr.points[-1].coords]))
