"""Pure-gauge Hamiltonians of the periodic 2x2 plaquette.

With both strings in their vacuum the physical Hilbert space is spanned by
three rotators ``R1, R2, R3``. In the electric representation

    H_E = 2 g^2 [R1^2 + R2^2 + R3^2 - R2 (R1 + R3)]
    H_B = -1/(2 g^2 a^2) [P1 + P2 + P3 + P1 P2 P3 + h.c.]

and in the magnetic (Fourier dual, Z_{2L+1}) representation ``H_B`` is
diagonal while ``H_E`` is assembled from the replacement coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from compactqed.basis import CouplingParams, GroupParams, RotatorBasis
from compactqed.exceptions import DomainError
from compactqed.operators import (
    MAGNETIC_SCHEMES,
    embed,
    flux_matrix,
    fourier_blocks,
    lowering_matrix,
    maybe_real,
)

REPRESENTATIONS = ("electric", "magnetic", "link")


@dataclass(frozen=True)
class LoweringOperator:
    l: int
    cyclic: bool
    matrix: sp.csr_matrix = field(repr=False)


@dataclass(frozen=True)
class GaugeHamiltonian:
    """Electric and magnetic parts of a gauge Hamiltonian on a fixed basis.

    ``constant_shift`` is the energy dropped when the Fourier replacement of
    ``R^2`` discards its ``L(L+1)/3`` offset: the spectrum of the original
    operator is ``spectrum(total) + constant_shift``.
    """

    representation: str
    group: GroupParams
    coupling: CouplingParams
    H_E: sp.csr_matrix = field(repr=False)
    H_B: sp.csr_matrix = field(repr=False)
    n_registers: int = 3
    constant_shift: float = 0.0
    scheme: str | None = None
    cyclic: bool = False

    @property
    def total(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.H_E + self.H_B)

    @property
    def dim(self) -> int:
        return self.H_E.shape[0]

    @property
    def basis(self) -> RotatorBasis:
        return RotatorBasis(self.n_registers, self.group.l)


def lowering_operator(l: int, cyclic: bool = False) -> LoweringOperator:
    """Truncated (or, with ``cyclic=True``, full Z_{2l+1}) lowering operator."""
    if int(l) != l or l < 0:
        raise DomainError(f"l must be a nonnegative integer, got {l}")
    return LoweringOperator(int(l), bool(cyclic), lowering_matrix(int(l), cyclic))


def _rotator_grid(l: int, n: int = 3) -> list[np.ndarray]:
    r = np.arange(-l, l + 1)
    return [a.ravel() for a in np.meshgrid(*([r] * n), indexing="ij")]


def plaquette_sum(P: sp.spmatrix, n_registers: int = 3) -> sp.csr_matrix:
    """``P1 + P2 + P3 + P1 P2 P3`` for a register lowering operator ``P``."""
    d = P.shape[0]
    dims = [d] * n_registers
    singles = [embed({k: P}, dims) for k in range(n_registers)]
    fourth = embed({k: P for k in range(n_registers)}, dims)
    return sp.csr_matrix(sum(singles) + fourth)


def build_pure_gauge_electric(
    group: GroupParams, coupling: CouplingParams, cyclic: bool = False
) -> GaugeHamiltonian:
    """Electric-representation Hamiltonian in the zero-string sector.

    ``cyclic=True`` uses the untruncated Z_{2L+1} lowering operators and
    therefore requires ``l == L``. Without it the result does not depend
    on ``L`` at all.
    """
    l = group.l
    if cyclic and l != group.L:
        raise DomainError("cyclic lowering operators need the full group, l == L")
    g2 = coupling.g2
    r1, r2, r3 = _rotator_grid(l)
    H_E = sp.diags(2 * g2 * (r1**2 + r2**2 + r3**2 - r2 * (r1 + r3)).astype(float), format="csr")
    X = plaquette_sum(lowering_matrix(l, cyclic))
    H_B = -(X + X.T) / (2 * g2 * coupling.a**2)
    return GaugeHamiltonian("electric", group, coupling, H_E, sp.csr_matrix(H_B), cyclic=cyclic)


def magnetic_field_diagonal(l: int, L: int, n_registers: int = 3) -> np.ndarray:
    """``-[sum_j cos(theta r_j) + cos(theta sum_j r_j)]`` on the truncated grid."""
    theta = 2 * np.pi / (2 * L + 1)
    grid = _rotator_grid(l, n_registers)
    out = -np.cos(theta * sum(grid))
    for r in grid:
        out -= np.cos(theta * r)
    return out


def build_pure_gauge_magnetic(
    group: GroupParams, coupling: CouplingParams, scheme: str = "projected"
) -> GaugeHamiltonian:
    """Magnetic-representation Hamiltonian in the zero-string sector.

    ``H_B`` is diagonal; ``H_E = g^2 [C1 + C2 + C3 + S2 (S1 + S3) / 2]`` with
    the register blocks of :func:`compactqed.operators.fourier_blocks`.
    At ``l == L`` both schemes except ``"band"`` reproduce the untruncated
    Z_{2L+1} theory exactly.
    """
    if scheme not in MAGNETIC_SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    l, L = group.l, group.L
    g2 = coupling.g2
    C, S = fourier_blocks(l, L, scheme)
    C = sp.csr_matrix(C)
    S = sp.csr_matrix(S)
    d = 2 * l + 1
    dims = [d, d, d]
    H_E = (
        embed({0: C}, dims)
        + embed({1: C}, dims)
        + embed({2: C}, dims)
        + 0.5 * (embed({0: S, 1: S}, dims) + embed({1: S, 2: S}, dims))
    )
    H_E = maybe_real(g2 * H_E)
    H_B = sp.diags(magnetic_field_diagonal(l, L) / (g2 * coupling.a**2), format="csr")
    shift = 2 * g2 * L * (L + 1)
    return GaugeHamiltonian(
        "magnetic", group, coupling, H_E, H_B, constant_shift=shift, scheme=scheme, cyclic=l == L
    )


# Retained links of the link formulation, in basis order.
LINK_NAMES = ("E00x", "E00y", "E01x", "E10y", "E11x")


def build_link_formulation(group: GroupParams, coupling: CouplingParams) -> GaugeHamiltonian:
    """Five-link Hamiltonian after eliminating E10x, E01y and E11y (no charges).

    The eliminated fields are ``E01y = E00y - E01x + E11x``,
    ``E11y = E01x - E11x + E10y`` and ``E10x = E00x + E01x - E11x``.
    Each retained link is truncated to ``[-l, l]``; the two strings are
    ``Rx = E00x + E01x`` and ``Ry = E00y + E10y``.
    """
    l = group.l
    g2 = coupling.g2
    d = 2 * l + 1
    dims = [d] * 5
    e = dict(zip(LINK_NAMES, _rotator_grid(l, 5)))
    diag = (
        e["E00x"] ** 2
        + e["E00y"] ** 2
        + e["E01x"] ** 2
        + e["E10y"] ** 2
        + e["E11x"] ** 2
        + (e["E00y"] - e["E01x"] + e["E11x"]) ** 2
        + (e["E01x"] - e["E11x"] + e["E10y"]) ** 2
        + (e["E00x"] + e["E01x"] - e["E11x"]) ** 2
    )
    H_E = sp.diags(0.5 * g2 * diag.astype(float), format="csr")

    U = lowering_matrix(l)
    Ud = sp.csr_matrix(U.T)
    slot = {name: k for k, name in enumerate(LINK_NAMES)}
    terms = [
        {slot["E00x"]: U, slot["E10y"]: U, slot["E01x"]: Ud, slot["E00y"]: Ud},
        {slot["E00y"]: U, slot["E11x"]: Ud, slot["E10y"]: Ud},
        {slot["E11x"]: U},
        {slot["E01x"]: U, slot["E00x"]: Ud},
    ]
    X = sum(embed(t, dims) for t in terms)
    H_B = (X + X.T) / (2 * g2 * coupling.a**2)
    return GaugeHamiltonian("link", group, coupling, H_E, sp.csr_matrix(H_B), n_registers=5)


def link_string_sector(l: int, rx: int = 0, ry: int = 0) -> np.ndarray:
    """Indices of link-basis states carrying string fluxes ``(rx, ry)``."""
    e = dict(zip(LINK_NAMES, _rotator_grid(l, 5)))
    mask = (e["E00x"] + e["E01x"] == rx) & (e["E00y"] + e["E10y"] == ry)
    return np.flatnonzero(mask)
