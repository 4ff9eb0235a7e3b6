"""Lowest eigenpairs of sparse Hermitian operators.

The iterative solver is a block Lanczos method with full
reorthogonalization and thick restart: after each cycle the basis is
compressed to the lowest Ritz vectors and re-expanded from their residual
block. For a single vector this spans exactly the Krylov space of the
classical thick-restart Lanczos recurrence.

Convergence is declared when every requested pair satisfies
``||H v - lambda v|| <= tol * ||H||``, where ``||H||`` is bounded from below
by the largest Ritz value magnitude seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from compactqed.exceptions import DomainError


class ConvergenceError(RuntimeError):
    """Raised when the iterative solver exhausts its restart budget."""

    def __init__(self, message: str, best_residual: float, result: "EigenResult | None" = None):
        super().__init__(message)
        self.best_residual = best_residual
        self.result = result


@dataclass(frozen=True)
class EigenResult:
    """Lowest eigenvalues (ascending) with eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    matvecs: int = 0
    restarts: int = 0
    degeneracy: int = 1
    method: str = "lanczos"

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def ground_space(self) -> np.ndarray:
        """Columns spanning the (possibly degenerate) lowest cluster."""
        return self.eigenvectors[:, : self.degeneracy]


def _fix_phase(X: np.ndarray) -> np.ndarray:
    # largest component real and positive, so runs are reproducible
    X = X.copy()
    for j in range(X.shape[1]):
        k = int(np.argmax(np.abs(X[:, j])))
        ph = X[k, j] / abs(X[k, j])
        X[:, j] *= np.conj(ph)
    if np.iscomplexobj(X) and not np.any(X.imag):
        X = X.real
    return X


def _check_square(H) -> int:
    if len(H.shape) != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"operator must be square, got shape {H.shape}")
    return H.shape[0]


def dense_lowest(H, k: int = 1) -> EigenResult:
    """Reference solver: full diagonalization with ``numpy.linalg.eigh``."""
    n = _check_square(H)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}]")
    A = H.toarray() if sp.issparse(H) else np.asarray(H)
    w, V = np.linalg.eigh(A)
    V = _fix_phase(V[:, :k])
    res = np.linalg.norm(A @ V - V * w[:k], axis=0)
    return EigenResult(w[:k].copy(), V, res, matvecs=0, method="dense")


class _Basis:
    """Orthonormal basis ``V`` together with ``H V``."""

    def __init__(self, H, n: int, size: int, dtype, rng: np.random.Generator):
        self.H = H
        self.V = np.empty((n, size), dtype=dtype)
        self.AV = np.empty((n, size), dtype=dtype)
        self.m = 0
        self.rng = rng
        self.matvecs = 0

    def _random(self, n: int, b: int) -> np.ndarray:
        X = self.rng.standard_normal((n, b))
        if np.iscomplexobj(self.V):
            X = X + 1j * self.rng.standard_normal((n, b))
        return X

    def append(self, block: np.ndarray) -> int:
        """Orthogonalize ``block`` against the basis and add it. Returns columns added."""
        n, cap = self.V.shape
        b = min(block.shape[1], cap - self.m, n - self.m)
        if b <= 0:
            return 0
        block = np.array(block[:, :b], dtype=self.V.dtype)
        norms0 = np.maximum(np.linalg.norm(block, axis=0), np.finfo(float).tiny)
        Vm = self.V[:, : self.m]
        for _ in range(2):
            block -= Vm @ (Vm.conj().T @ block)
        # columns that collapsed carry no new direction; refill them randomly
        dead = np.linalg.norm(block, axis=0) < 1e-10 * norms0
        if np.any(dead):
            fresh = self._random(n, int(dead.sum()))
            for _ in range(2):
                fresh -= Vm @ (Vm.conj().T @ fresh)
            block[:, dead] = fresh
        Q, R = np.linalg.qr(block)
        # a second pass guards against loss of orthogonality inside the block
        Q -= Vm @ (Vm.conj().T @ Q)
        Q, _ = np.linalg.qr(Q)
        s = slice(self.m, self.m + b)
        self.V[:, s] = Q
        self.AV[:, s] = self.H @ Q
        self.matvecs += b
        self.m += b
        return b


def lowest_k(
    H,
    k: int = 1,
    tol: float = 1e-10,
    block_size: int | None = None,
    max_basis: int | None = None,
    max_restarts: int = 500,
    seed: int = 1234,
    v0: np.ndarray | None = None,
    dense_below: int = 400,
) -> EigenResult:
    """Lowest ``k`` eigenpairs of a Hermitian operator.

    Parameters
    ----------
    H
        Sparse matrix, dense array or anything supporting ``H @ X`` for a
        block ``X`` (shape ``(n, b)``).
    k
        Number of eigenpairs.
    tol
        Relative residual tolerance.
    block_size
        Lanczos block width; defaults to ``k`` so degenerate clusters up to
        size ``k`` are resolved.
    max_basis
        Basis size at which a restart is triggered.
    seed
        Seed of the random start block; results are deterministic.
    dense_below
        Operators at most this large are diagonalized densely.
    """
    n = _check_square(H)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}]")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if n <= dense_below and (sp.issparse(H) or isinstance(H, np.ndarray)):
        return dense_lowest(H, k)

    b = max(1, block_size or k)
    cap = max_basis or max(40, 4 * (k + b), 8 * b)
    cap = min(cap, n)
    dtype = complex if _is_complex(H) else float
    rng = np.random.default_rng(seed)
    basis = _Basis(H, n, cap, dtype, rng)

    start = basis._random(n, b)
    if v0 is not None:
        start[:, 0] = np.asarray(v0).reshape(-1)
    basis.append(start)
    last = slice(0, basis.m)

    scale = np.finfo(float).tiny
    best = np.inf
    restarts = 0
    while True:
        while basis.m < cap:
            added = basis.append(basis.AV[:, last].copy())
            if added == 0:
                break
            last = slice(basis.m - added, basis.m)
        m = basis.m
        V, AV = basis.V[:, :m], basis.AV[:, :m]
        T = V.conj().T @ AV
        T = 0.5 * (T + T.conj().T)
        theta, Y = np.linalg.eigh(T)
        scale = max(scale, float(np.abs(theta).max()))
        X = V @ Y[:, :k]
        R = AV @ Y[:, :k] - X * theta[:k]
        res = np.linalg.norm(R, axis=0)
        worst = float(res.max()) / scale
        best = min(best, worst)
        if worst <= tol or m >= n:
            X = _fix_phase(X)
            return EigenResult(
                theta[:k].copy(), X, res, matvecs=basis.matvecs, restarts=restarts
            )
        if restarts >= max_restarts:
            partial = EigenResult(theta[:k].copy(), _fix_phase(X), res, basis.matvecs, restarts)
            raise ConvergenceError(
                f"no convergence after {restarts} restarts; relative residual {worst:.3e}",
                best_residual=best,
                result=partial,
            )
        restarts += 1
        keep = min(m - b, max(k + b, cap // 3))
        basis.V[:, :keep] = V @ Y[:, :keep]
        basis.AV[:, :keep] = AV @ Y[:, :keep]
        basis.m = keep
        Rb = basis.AV[:, :b] - basis.V[:, :b] * theta[:b]
        added = basis.append(Rb)
        last = slice(basis.m - added, basis.m)


def _is_complex(H) -> bool:
    dt = getattr(H, "dtype", None)
    return dt is not None and np.issubdtype(dt, np.complexfloating)


def ground_state(
    H,
    tol: float = 1e-10,
    degeneracy_tol: float = 1e-8,
    max_cluster: int = 8,
    **kwargs,
) -> EigenResult:
    """Lowest eigenpair with detection of a degenerate ground cluster.

    The solver is run for ``k = 2`` (block width 2) and widened while the
    highest computed level still lies within ``degeneracy_tol * ||H||`` of
    the ground energy. ``degeneracy`` in the result is the cluster size and
    ``ground_space`` its basis.
    """
    n = _check_square(H)
    k = min(2, n)
    while True:
        res = lowest_k(H, k=k, tol=tol, **kwargs)
        w = res.eigenvalues
        scale = max(float(np.abs(w).max()), 1.0)
        cluster = int(np.sum(w - w[0] <= degeneracy_tol * scale))
        if cluster < k or k >= min(n, max_cluster):
            return EigenResult(
                w, res.eigenvectors, res.residuals, res.matvecs, res.restarts,
                degeneracy=cluster, method=res.method,
            )
        k = min(k + 2, n, max_cluster)


def subspace_overlap(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal cosine between the column spans of ``A`` and ``B``."""
    A = np.atleast_2d(A.T).T if A.ndim == 1 else A
    B = np.atleast_2d(B.T).T if B.ndim == 1 else B
    Qa, _ = np.linalg.qr(A)
    Qb, _ = np.linalg.qr(B)
    return float(np.linalg.svd(Qa.conj().T @ Qb, compute_uv=False)[0])
