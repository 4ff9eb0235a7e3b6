"""Periodic plaquette with staggered fermions.

Basis: four fermion occupation bits in Jordan-Wigner order
(0,0), (0,1), (1,1), (1,0), followed by the registers R1, R2, R3, Rx, Ry
(dimension ``2^4 (2l+1)^5``). Rotators are R1 = R_(0,0), R2 = R_(1,0),
R3 = R_(1,1). Charge strings run from the origin first along x, then along y.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
import scipy.sparse as sp

from compactqed.basis import CouplingParams, GroupParams
from compactqed.exceptions import DomainError
from compactqed.model import (
    GaugeModel,
    Hop,
    LinearForm,
    MatterLayout,
    ModelHamiltonian,
    Site,
    electric_term,
    fermion_annihilators,
    kinetic_term,
    mass_term,
    realize,
    total_charge_operator,
)

SITES: tuple[Site, ...] = ((0, 0), (0, 1), (1, 1), (1, 0))
REGISTERS = ("R1", "R2", "R3", "Rx", "Ry")

MatterHamiltonian = ModelHamiltonian


def _R(name: str, c: int = 1) -> LinearForm:
    return LinearForm.register(name, c)


def _q(site: Site, c: int = 1) -> LinearForm:
    return LinearForm.charge(site, c)


def plaquette_fields() -> dict[str, LinearForm]:
    """The eight link fields in terms of rotators, strings and charges."""
    return {
        "E00x": _R("R1") + _R("Rx") - _q((1, 0)) - _q((1, 1)),
        "E10x": _R("R2") - _R("R3") + _R("Rx"),
        "E01x": _R("R1", -1),
        "E11x": _R("R3") - _R("R2"),
        "E00y": _R("R2") - _R("R1") + _R("Ry") - _q((0, 1)),
        "E10y": _R("R1") - _R("R2") - _q((1, 1)),
        "E01y": _R("R3") + _R("Ry"),
        "E11y": _R("R3", -1),
    }


def plaquette_hops() -> tuple[Hop, ...]:
    """The eight hopping terms ``psi_a^dagger G psi_b`` (Hermitian partners added later)."""
    return (
        Hop((0, 0), (1, 0), {}, "00->10 x"),
        Hop((0, 0), (1, 0), {"Rx": 1}, "10->00 x (conj)"),
        Hop((0, 1), (1, 1), {"R1": 1}, "01->11 x"),
        Hop((0, 1), (1, 1), {"R2": -1, "Rx": 1}, "11->01 x (conj)"),
        Hop((0, 0), (0, 1), {}, "00->01 y"),
        Hop((0, 0), (0, 1), {"Ry": 1}, "01->00 y (conj)"),
        Hop((1, 0), (1, 1), {}, "10->11 y"),
        Hop((1, 0), (1, 1), {"R2": -1, "R3": -1, "Ry": 1}, "11->10 y (conj)"),
    )


PLAQUETTE_TERMS = ({"R1": 1}, {"R2": 1}, {"R3": 1}, {"R1": 1, "R2": 1, "R3": 1})


def plaquette_model(l: int, static_charges: Mapping[Site, int] | None = None) -> GaugeModel:
    layout = MatterLayout(SITES, REGISTERS, l, static_charges=dict(static_charges or {}))
    return GaugeModel(
        layout=layout,
        fields=plaquette_fields(),
        plaquettes=PLAQUETTE_TERMS,
        hops=plaquette_hops(),
        mass_weights={s: (-1) ** (s[0] + s[1]) for s in SITES},
    )


def _single_site(op: np.ndarray, k: int, n: int = 4) -> sp.csr_matrix:
    mats = [sp.identity(2, format="csr")] * n
    mats[k] = sp.csr_matrix(op)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def jordan_wigner() -> list[sp.csr_matrix]:
    """Annihilators of the four sites (16x16), in :data:`SITES` order."""
    return fermion_annihilators(len(SITES))


def charge_operator(site: Site, l: int | None = None, static: int = 0) -> sp.csr_matrix:
    """``q_n = n_n - (1 - (-1)^(n_x+n_y))/2`` (+ static charge).

    Acts on the 16-dimensional fermion factor; with ``l`` given it is
    extended by the identity over the five gauge registers.
    """
    site = tuple(site)
    if site not in SITES:
        raise DomainError(f"site {site} is not on the plaquette")
    k = SITES.index(site)
    stag = (-1) ** (site[0] + site[1])
    n = _single_site(np.diag([0.0, 1.0]), k)
    q = n - (0.5 * (1 - stag) - static) * sp.identity(16, format="csr")
    if l is None:
        return sp.csr_matrix(q)
    return sp.kron(q, sp.identity((2 * l + 1) ** 5), format="csr")


def mass_hamiltonian(m: float, form: str = "number") -> sp.csr_matrix:
    """Staggered mass term on the fermion factor.

    ``form="number"``: ``m sum (-1)^(n_x+n_y) n_n``.
    ``form="pauli"``: ``m/2 (z1 - z2 + z3 - z4)`` with ``z = 2n - 1``; on four
    sites with alternating signs the two forms coincide (the constant
    ``m/2 sum (-1)^(n_x+n_y)`` vanishes).
    """
    if form == "number":
        ops = [_single_site(np.diag([0.0, 1.0]), k) for k in range(4)]
    elif form == "pauli":
        ops = [_single_site(np.diag([-0.5, 0.5]), k) for k in range(4)]
    else:
        raise DomainError(f"unknown mass form {form!r}")
    return sp.csr_matrix(m * sum((-1) ** (s[0] + s[1]) * op for s, op in zip(SITES, ops)))


def kinetic_hamiltonian(
    rep: str, group: GroupParams, coupling: CouplingParams, cyclic: bool = False
) -> sp.csr_matrix:
    model = plaquette_model(group.l)
    return kinetic_term(model, coupling, rep, group.L, cyclic)


def electric_hamiltonian_with_charges(
    rep: str,
    group: GroupParams,
    coupling: CouplingParams,
    scheme: str = "projected",
    static_charges: Mapping[Site, int] | None = None,
) -> sp.csr_matrix:
    model = plaquette_model(group.l, static_charges)
    H, _ = electric_term(model, coupling, rep, group.L, scheme)
    return H


def build_matter_system(
    rep: str,
    group: GroupParams,
    coupling: CouplingParams,
    scheme: str = "projected",
    cyclic: bool = False,
    static_charges: Mapping[Site, int] | None = None,
    max_dim: int | None = None,
) -> MatterHamiltonian:
    """``H_E + H_B + H_K + H_M`` on the ``2^4 (2l+1)^5`` basis."""
    model = plaquette_model(group.l, static_charges)
    return realize(model, group, coupling, rep, scheme=scheme, cyclic=cyclic, max_dim=max_dim)


def dirac_vacuum_index() -> int:
    """Fermion-factor index of the state with only the odd sites occupied."""
    bits = [0 if (s[0] + s[1]) % 2 == 0 else 1 for s in SITES]
    return int("".join(map(str, bits)), 2)


def total_charge(l: int, static_charges: Mapping[Site, int] | None = None) -> sp.csr_matrix:
    return total_charge_operator(plaquette_model(l, static_charges).layout)
