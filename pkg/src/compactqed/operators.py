"""Single-register matrices and their embedding into product spaces.

A register holding flux values ``r = -l..l`` is stored with index ``r + l``.
The lowering operator maps ``|r> -> |r-1>``; in the cyclic (untruncated
Z_{2L+1}) case ``|-L> -> |L>`` as well.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp

from compactqed.exceptions import DomainError
from compactqed.fourier import replacement_coefficients

MAGNETIC_SCHEMES = ("projected", "band")


def flux_matrix(l: int) -> sp.csr_matrix:
    """Diagonal flux operator R on ``[-l, l]``."""
    return sp.diags(np.arange(-l, l + 1, dtype=float), format="csr")


def lowering_matrix(l: int, cyclic: bool = False) -> sp.csr_matrix:
    d = 2 * l + 1
    rows = list(range(d - 1))
    cols = list(range(1, d))
    if cyclic and d > 1:
        rows.append(d - 1)
        cols.append(0)
    elif cyclic:
        # Z_1: the single state is mapped onto itself
        rows.append(0)
        cols.append(0)
    data = np.ones(len(rows))
    return sp.csr_matrix((data, (rows, cols)), shape=(d, d))


def phase_matrix(l: int, L: int, power: int = 1) -> sp.csr_matrix:
    """``diag(exp(-2 pi i power r / (2L+1)))``: the lowering operator in the dual basis."""
    r = np.arange(-l, l + 1)
    return sp.diags(np.exp(-2j * np.pi * power * r / (2 * L + 1)), format="csr")


def fourier_blocks(l: int, L: int, scheme: str = "projected") -> tuple[np.ndarray, np.ndarray]:
    """Register blocks ``C = sum f^c_nu (P^nu + P^-nu)`` and ``S = sum f^s_nu (P^nu - P^-nu)``.

    ``scheme="projected"`` restricts the cyclic Z_{2L+1} powers to the
    window ``[-l, l]`` (wrap-around entries that land back inside the window
    are kept). ``scheme="band"`` takes powers of the truncated lowering
    operator, so every power above ``2l`` vanishes.
    """
    if scheme not in MAGNETIC_SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; expected one of {MAGNETIC_SCHEMES}")
    if l > L:
        raise DomainError(f"truncation l={l} exceeds resolution L={L}")
    coeffs = replacement_coefficients(L)
    n = 2 * L + 1
    fs = np.concatenate([[0.0], coeffs.sine_coeffs])
    fc = np.concatenate([[0.0], coeffs.cosine_coeffs])
    r = np.arange(-l, l + 1)
    # P^nu has entries <r - nu|...|r>, so row a, column b is hit when b - a = nu.
    shift = r[None, :] - r[:, None]
    if scheme == "projected":
        up = np.mod(shift, n)
        down = np.mod(-shift, n)
        C = fc[up] + fc[down]
        S = fs[up] - fs[down]
    else:
        k = np.abs(shift)
        C = np.where(shift != 0, fc[k], 0.0)
        S = np.sign(shift) * fs[k]
    return C, S


def identity(d: int) -> sp.csr_matrix:
    return sp.identity(d, format="csr")


def embed(factors: dict[int, sp.spmatrix], dims: list[int]) -> sp.csr_matrix:
    """Kronecker product placing ``factors[k]`` on slot ``k`` and identities elsewhere."""
    mats = []
    run = 1
    for k, d in enumerate(dims):
        if k in factors:
            if run > 1:
                mats.append(identity(run))
                run = 1
            mats.append(sp.csr_matrix(factors[k]))
        else:
            run *= d
    if run > 1:
        mats.append(identity(run))
    if not mats:
        return identity(1)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def diagonal_from_grid(values: np.ndarray) -> sp.csr_matrix:
    return sp.diags(np.ravel(values), format="csr")


def hermitian_error(H: sp.spmatrix) -> float:
    """Largest entry of ``|H - H^dagger|``."""
    diff = (H - H.conj().T).tocoo()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def is_real(H: sp.spmatrix) -> bool:
    return not np.iscomplexobj(H.data) or not np.any(H.data.imag)


def maybe_real(H: sp.spmatrix) -> sp.csr_matrix:
    """Drop an identically zero imaginary part."""
    H = sp.csr_matrix(H)
    if np.iscomplexobj(H.data) and not np.any(H.data.imag):
        H = sp.csr_matrix(H.real)
    H.eliminate_zeros()
    return H
