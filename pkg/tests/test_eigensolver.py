from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from hypothesis import given, strategies as st

from compactqed.basis import CouplingParams, GroupParams
from compactqed.eigensolver import (
    ConvergenceError, dense_lowest, ground_state, lowest_k, subspace_overlap,
)
from compactqed.exceptions import DomainError
from compactqed.hamiltonian import build_pure_gauge_electric, build_pure_gauge_magnetic


def _random_hermitian(n, seed, complex_=True, density=0.05):
    rng = np.random.default_rng(seed)
    A = sp.random(n, n, density=density, random_state=rng, format="csr")
    if complex_:
        A = A + 1j * sp.random(n, n, density=density, random_state=rng, format="csr")
    return sp.csr_matrix(A + A.conj().T)


@given(st.integers(20, 300), st.integers(0, 10_000), st.booleans(), st.integers(1, 4))
def test_krylov_matches_dense_oracle(n, seed, complex_, k):
    H = _random_hermitian(n, seed, complex_)
    ref = np.linalg.eigvalsh(H.toarray())[:k]
    res = lowest_k(H, k=k, tol=1e-12, dense_below=0)
    scale = max(1.0, np.abs(ref).max())
    assert np.max(np.abs(res.eigenvalues - ref)) <= 1e-10 * scale


@pytest.mark.parametrize("l", [1, 2, 3])
@pytest.mark.parametrize("rep", ["electric", "magnetic"])
@pytest.mark.parametrize("g2", [0.1, 1.0, 10.0])
def test_physics_builds_match_dense_below_500(l, rep, g2):
    group = GroupParams(l, l + 2)
    c = CouplingParams(g2)
    ham = build_pure_gauge_electric(group, c) if rep == "electric" \
        else build_pure_gauge_magnetic(group, c)
    H = ham.total
    ref = dense_lowest(H, 3)
    res = lowest_k(H, k=3, tol=1e-12, dense_below=0)
    np.testing.assert_allclose(res.eigenvalues, ref.eigenvalues, atol=1e-10)
    assert subspace_overlap(res.eigenvectors[:, :1], ref.eigenvectors[:, :1]) > 1 - 1e-10


def test_against_arpack_on_large_operator():
    ham = build_pure_gauge_magnetic(GroupParams(6, 8), CouplingParams(0.5))
    res = ground_state(ham.total, tol=1e-11)
    w = sla.eigsh(ham.total, k=1, which="SA", tol=1e-12)[0]
    assert res.ground_energy == pytest.approx(w[0], abs=1e-9)
    r = np.linalg.norm(ham.total @ res.ground_vector - res.ground_energy * res.ground_vector)
    assert r <= 1e-9 * max(1.0, abs(res.ground_energy)) * 10
    assert np.linalg.norm(res.ground_vector) == pytest.approx(1.0, abs=1e-12)


def test_degenerate_cluster_is_detected():
    d = np.concatenate([[-2.0, -2.0, -2.0], np.linspace(0.0, 5.0, 497)])
    Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((500, 500)))
    H = (Q * d) @ Q.T
    res = ground_state(H, tol=1e-11, dense_below=0)
    assert res.degeneracy == 3
    assert res.ground_space.shape[1] == 3
    P = Q[:, :3]
    np.testing.assert_allclose(np.linalg.svd(P.T @ res.ground_space, compute_uv=False), 1.0,
                               atol=1e-8)


def test_deterministic_for_fixed_seed():
    H = _random_hermitian(600, 5)
    a = lowest_k(H, k=2, seed=7)
    b = lowest_k(H, k=2, seed=7)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_convergence_error_carries_best_residual():
    H = _random_hermitian(800, 11, density=0.02)
    with pytest.raises(ConvergenceError) as info:
        lowest_k(H, k=1, tol=1e-15, max_restarts=1, max_basis=8)
    assert info.value.best_residual > 0
    assert info.value.result is not None


def test_input_validation():
    with pytest.raises(DomainError):
        lowest_k(np.zeros((3, 4)))
    with pytest.raises(DomainError):
        lowest_k(np.eye(3), k=4)
    with pytest.raises(DomainError):
        lowest_k(np.eye(3), tol=0.0)


def test_linear_operator_input():
    H = _random_hermitian(500, 2, complex_=False)
    op = sla.aslinearoperator(H)
    res = lowest_k(op, k=1, tol=1e-11)
    assert res.ground_energy == pytest.approx(np.linalg.eigvalsh(H.toarray())[0], abs=1e-9)
