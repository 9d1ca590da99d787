import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncspin.errors import ClosureFailure, NonTraceless
from ncspin.liealg import (ETA, METRIC, ReferenceElement, antisymmetry_residual, basis_residuals,
                           candidate_basis, casimirs, gell_mann, jacobi_residual,
                           random_pseudo_unitary, select_t7_sign, structure_constants,
                           verification_report)

import oracles


def test_trace_normalization(basis):
    T = basis.generators
    gram = np.einsum("aij,bji->ab", T, T)
    np.testing.assert_allclose(gram, np.diag(ETA) / 2, atol=1e-14)
    assert gram[2, 2].real == pytest.approx(0.5)
    assert gram[3, 3].real == pytest.approx(-0.5)


def test_hermiticity_pattern(basis):
    for a, t in enumerate(basis.generators):
        if a in (0, 1, 2, 7):
            np.testing.assert_allclose(t, t.conj().T, atol=0)
        else:
            np.testing.assert_allclose(t, -t.conj().T, atol=0)


def test_generators_preserve_metric(basis):
    for t in basis.generators:
        X = 1j * t
        np.testing.assert_allclose(X.conj().T @ METRIC + METRIC @ X, 0, atol=1e-15)


def test_pauli_block(basis):
    T = basis.generators
    np.testing.assert_allclose(T[0] @ T[1] - T[1] @ T[0], 1j * T[2], atol=1e-15)


def test_exactly_one_t7_sign_passes():
    sign, report = select_t7_sign()
    assert sign == -1
    assert max(report[-1].values()) < 1e-12
    # the rejected sign fails only the shifting-operator check
    rejected = report[1]
    assert rejected["shifting"] > 0.1
    assert max(v for k, v in rejected.items() if k != "shifting") < 1e-12


def test_coset_rearrangement(basis):
    lam = gell_mann()
    T = basis.generators
    np.testing.assert_allclose(T[3], 1j * lam[4] / 2)
    np.testing.assert_allclose(T[4], -1j * lam[3] / 2)
    np.testing.assert_allclose(T[5], 1j * lam[6] / 2)
    np.testing.assert_allclose(T[6], -1j * lam[5] / 2)


def test_structure_constants_identities(basis, sc):
    assert sc.f[0, 1, 2] == pytest.approx(1.0)
    assert jacobi_residual(sc) < 1e-12
    assert antisymmetry_residual(sc) < 1e-12
    T = basis.generators
    comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
    np.testing.assert_allclose(comm, 1j * np.einsum("abc,cij->abij", sc.f, T), atol=1e-12)


def test_lowered_f_antisymmetric_brute_force(sc):
    fl = sc.lowered
    worst = 0.0
    for a in range(8):
        for b in range(8):
            for c in range(8):
                worst = max(worst, abs(fl[a, b, c] + fl[b, a, c]), abs(fl[a, b, c] + fl[a, c, b]))
    assert worst < 1e-12


def test_d_is_symmetric_and_reproduces_anticommutator(basis, sc):
    np.testing.assert_allclose(sc.d, sc.d.transpose(1, 0, 2), atol=1e-14)
    T = basis.generators
    anti = np.einsum("aij,bjk->abik", T, T) + np.einsum("bij,ajk->abik", T, T)
    ident = np.einsum("ab,ij->abij", np.diag(ETA), np.eye(3)) / 3
    np.testing.assert_allclose(anti, ident + np.einsum("abc,cij->abij", sc.d, T), atol=1e-12)


def test_wrong_convention_raises():
    bad = candidate_basis(1)
    T = bad.generators.copy()
    T[6] = T[6] * 2  # breaks normalization and closure
    from ncspin.liealg import GeneratorBasis
    with pytest.raises(ClosureFailure):
        structure_constants(GeneratorBasis(generators=T))


def test_candidate_sign_validation():
    with pytest.raises(ValueError):
        candidate_basis(0)


def test_casimirs_zero_and_nontraceless():
    assert casimirs(np.zeros((3, 3))) == (0.0, 0.0)
    with pytest.raises(NonTraceless):
        casimirs(np.eye(3))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), x=st.floats(0.1, 3.0))
def test_casimir_traces_on_degenerate_orbit(seed, x):
    rng = np.random.default_rng(seed)
    g = oracles.pseudo_unitary(rng)
    ref = ReferenceElement(x, x)
    Q = 1j * g @ ref.matrix @ np.linalg.inv(g)
    tr2, tr3 = casimirs(Q)
    xs = ref.xs
    assert tr2 == pytest.approx(np.sum(xs**2), rel=1e-9)
    assert tr3 == pytest.approx(6 * x**3, rel=1e-9)
    assert tr3 == pytest.approx(-3 * np.prod(xs), rel=1e-9)


def test_casimirs_invariant_under_group(rng):
    ref = ReferenceElement(0.7, -0.2)
    Q0 = 1j * ref.matrix
    c0 = casimirs(Q0)
    for _ in range(100):
        h = random_pseudo_unitary(rng)
        np.testing.assert_allclose(casimirs(h @ Q0 @ np.linalg.inv(h)), c0, atol=1e-10)


def test_random_pseudo_unitary_is_in_group(rng):
    for _ in range(20):
        h = random_pseudo_unitary(rng)
        np.testing.assert_allclose(h.conj().T @ METRIC @ h, METRIC, atol=1e-12)
        assert abs(np.linalg.det(h) - 1) < 1e-12


def test_reference_element_traceless():
    ref = ReferenceElement(1.25, -0.5)
    assert ref.xs.sum() == 0.0
    np.testing.assert_allclose(ref.matrix, 1j * np.diag([1.25, -0.5, -0.75]))


def test_verification_report_serializable():
    rep = verification_report()
    text = json.dumps(rep)
    assert "t7_convention" in json.loads(text)
    assert max(rep["residuals"].values()) < 1e-12


def test_basis_residual_keys(basis):
    assert set(basis_residuals(basis)) == {"trace", "hermiticity", "algebra", "closure", "shifting"}
