"""Gauge-fixed lattice models with matter and their matrix realization.

A model is described symbolically:

* every link field is a :class:`LinearForm` in rotator/string registers and
  site charges (the Gauss-law solution),
* plaquette terms are products of register lowering operators,
* hops ``psi_a^dagger G psi_b`` carry a product ``G`` of register powers,
* the mass term is a per-site weight on the occupation number.

:func:`realize` turns such a description into sparse matrices in the
electric (flux-diagonal) or magnetic (plaquette-diagonal) representation.
The product basis orders all matter sites first, then the gauge registers,
each slot in mixed-radix order with the first slot most significant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from compactqed.basis import CouplingParams, GroupParams
from compactqed.exceptions import DomainError, ResourceError
from compactqed.operators import embed, fourier_blocks, lowering_matrix, maybe_real

Site = tuple[int, int]
STATISTICS = ("fermionic", "bosonic")
DEFAULT_MAX_DIM = 200_000


def _clean(d: Mapping) -> dict:
    return {k: v for k, v in d.items() if v != 0}


@dataclass(frozen=True)
class LinearForm:
    """Integer linear combination ``sum a_k R_k + sum b_s q_s + c``."""

    registers: Mapping[str, int] = field(default_factory=dict)
    charges: Mapping[Site, int] = field(default_factory=dict)
    const: int = 0

    def __post_init__(self):
        object.__setattr__(self, "registers", _clean(dict(self.registers)))
        object.__setattr__(self, "charges", _clean(dict(self.charges)))

    @classmethod
    def register(cls, name: str, coeff: int = 1) -> "LinearForm":
        return cls({name: coeff})

    @classmethod
    def charge(cls, site: Site, coeff: int = 1) -> "LinearForm":
        return cls({}, {tuple(site): coeff})

    def __add__(self, other: "LinearForm") -> "LinearForm":
        regs = dict(self.registers)
        for k, v in other.registers.items():
            regs[k] = regs.get(k, 0) + v
        chs = dict(self.charges)
        for k, v in other.charges.items():
            chs[k] = chs.get(k, 0) + v
        return LinearForm(regs, chs, self.const + other.const)

    def __neg__(self) -> "LinearForm":
        return self * -1

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def __mul__(self, c: int) -> "LinearForm":
        return LinearForm(
            {k: c * v for k, v in self.registers.items()},
            {k: c * v for k, v in self.charges.items()},
            c * self.const,
        )

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.registers and not self.charges and self.const == 0

    def drop_register(self, name: str) -> "LinearForm":
        regs = dict(self.registers)
        regs.pop(name, None)
        return LinearForm(regs, self.charges, self.const)

    def substitute_charge(self, site: Site, form: "LinearForm") -> "LinearForm":
        c = self.charges.get(site, 0)
        if c == 0:
            return self
        chs = dict(self.charges)
        del chs[site]
        return LinearForm(self.registers, chs, self.const) + form * c

    def __str__(self) -> str:
        parts = [f"{v:+d}*{k}" for k, v in sorted(self.registers.items())]
        parts += [f"{v:+d}*q{k}" for k, v in sorted(self.charges.items())]
        if self.const:
            parts.append(f"{self.const:+d}")
        return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class Hop:
    """``psi_source^dagger G psi_target`` with ``G = prod_k P_k^{power_k}``."""

    source: Site
    target: Site
    gauge: Mapping[str, int] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gauge", _clean(dict(self.gauge)))


@dataclass(frozen=True)
class MatterLayout:
    """Ordering and local dimensions of the product basis.

    ``sites`` lists matter sites in Jordan-Wigner order; ``registers`` the
    gauge registers. Staggering uses ``(-1)^(n_x + n_y)``.
    """

    sites: tuple[Site, ...]
    registers: tuple[str, ...]
    l: int
    statistics: str = "fermionic"
    max_occupation: int = 1
    static_charges: Mapping[Site, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.statistics not in STATISTICS:
            raise DomainError(f"statistics must be one of {STATISTICS}")
        if self.statistics == "fermionic" and self.max_occupation != 1:
            raise DomainError("fermionic sites hold at most one particle")
        if self.max_occupation < 1:
            raise DomainError("max_occupation must be at least 1")
        unknown = set(self.static_charges) - set(self.sites)
        if unknown:
            raise DomainError(f"static charges on unknown sites {sorted(unknown)}")

    @property
    def site_dim(self) -> int:
        return self.max_occupation + 1

    @property
    def matter_dim(self) -> int:
        return self.site_dim ** len(self.sites)

    @property
    def gauge_dim(self) -> int:
        return (2 * self.l + 1) ** len(self.registers)

    @property
    def dim(self) -> int:
        return self.matter_dim * self.gauge_dim

    @property
    def dims(self) -> list[int]:
        return [self.site_dim] * len(self.sites) + [2 * self.l + 1] * len(self.registers)

    def site_index(self, site: Site) -> int:
        return self.sites.index(tuple(site))

    def register_index(self, name: str) -> int:
        return self.registers.index(name)

    def stagger(self, site: Site) -> int:
        return (-1) ** (site[0] + site[1])

    # --- matter-factor diagonals -------------------------------------------
    def occupations(self) -> np.ndarray:
        """Array ``(n_sites, matter_dim)`` of site occupation numbers."""
        grids = np.meshgrid(*([np.arange(self.site_dim)] * len(self.sites)), indexing="ij")
        return np.array([g.ravel() for g in grids]).reshape(len(self.sites), self.matter_dim)

    def charges(self) -> dict[Site, np.ndarray]:
        """Dynamical plus static charge of each site on the matter factor."""
        occ = self.occupations()
        out = {}
        for k, s in enumerate(self.sites):
            q = occ[k].astype(float)
            if self.statistics == "fermionic":
                q = q - 0.5 * (1 - self.stagger(s))
            out[s] = q + self.static_charges.get(s, 0)
        return out

    def register_values(self) -> dict[str, np.ndarray]:
        r = np.arange(-self.l, self.l + 1)
        grids = np.meshgrid(*([r] * len(self.registers)), indexing="ij")
        return {name: g.ravel() for name, g in zip(self.registers, grids)}


@dataclass(frozen=True)
class GaugeModel:
    """Symbolic gauge-fixed Hamiltonian on a :class:`MatterLayout`."""

    layout: MatterLayout
    fields: Mapping[str, LinearForm]
    plaquettes: tuple[Mapping[str, int], ...]
    hops: tuple[Hop, ...]
    mass_weights: Mapping[Site, int]


@dataclass(frozen=True)
class ModelHamiltonian:
    """Matrices of every term of a realized :class:`GaugeModel`."""

    representation: str
    group: GroupParams
    coupling: CouplingParams
    layout: MatterLayout
    H_E: sp.csr_matrix = field(repr=False)
    H_B: sp.csr_matrix = field(repr=False)
    H_K: sp.csr_matrix = field(repr=False)
    H_M: sp.csr_matrix = field(repr=False)
    constant_shift: float = 0.0

    @property
    def total(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.H_E + self.H_B + self.H_K + self.H_M)

    @property
    def dim(self) -> int:
        return self.H_E.shape[0]

    @property
    def basis(self) -> MatterLayout:
        return self.layout


# --- matter operators ------------------------------------------------------

def fermion_annihilators(n_sites: int) -> list[sp.csr_matrix]:
    """Jordan-Wigner annihilators ``a_k = Z_0 ... Z_{k-1} s_k`` with ``s = |0><1|``."""
    Z = sp.diags([1.0, -1.0], format="csr")
    s = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    dims = [2] * n_sites
    return [embed({**{j: Z for j in range(k)}, k: s}, dims) for k in range(n_sites)]


def boson_annihilators(n_sites: int, max_occupation: int) -> list[sp.csr_matrix]:
    d = max_occupation + 1
    b = sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, format="csr")
    return [embed({k: b}, [d] * n_sites) for k in range(n_sites)]


def matter_annihilators(layout: MatterLayout) -> list[sp.csr_matrix]:
    if layout.statistics == "fermionic":
        return fermion_annihilators(len(layout.sites))
    return boson_annihilators(len(layout.sites), layout.max_occupation)


# --- gauge register operators ----------------------------------------------

def _register_power(l: int, power: int, cyclic: bool) -> sp.csr_matrix:
    P = lowering_matrix(l, cyclic)
    M = P if power > 0 else sp.csr_matrix(P.T)
    out = sp.identity(2 * l + 1, format="csr")
    for _ in range(abs(power)):
        out = out @ M
    return sp.csr_matrix(out)


def _gauge_product(layout: MatterLayout, powers: Mapping[str, int], representation: str,
                   L: int, cyclic: bool) -> sp.csr_matrix:
    """Gauge factor ``prod_k P_k^{p_k}`` on the gauge factor of the basis."""
    dims = [2 * layout.l + 1] * len(layout.registers)
    if representation == "electric":
        factors = {layout.register_index(k): _register_power(layout.l, p, cyclic)
                   for k, p in powers.items()}
        return embed(factors, dims)
    theta = 2 * np.pi / (2 * L + 1)
    vals = layout.register_values()
    phase = np.zeros(layout.gauge_dim)
    for k, p in powers.items():
        phase += p * vals[k]
    return sp.diags(np.exp(-1j * theta * phase), format="csr")


def _check_dim(layout: MatterLayout, max_dim: int | None) -> None:
    cap = DEFAULT_MAX_DIM if max_dim is None else max_dim
    if layout.dim > cap:
        raise ResourceError(f"Hilbert-space dimension {layout.dim} exceeds cap {cap}")


def electric_term(model: GaugeModel, coupling: CouplingParams, representation: str,
                  L: int, scheme: str = "projected") -> tuple[sp.csr_matrix, float]:
    """``g^2/2 sum E^2`` and the constant dropped by the Fourier replacement."""
    lay = model.layout
    g2 = coupling.g2
    charges = lay.charges()
    mdim, gdim = lay.matter_dim, lay.gauge_dim
    # charge part of each field: a matter-diagonal array
    qpart = {}
    for name, form in model.fields.items():
        qv = np.full(mdim, float(form.const))
        for s, c in form.charges.items():
            qv += c * charges[s]
        qpart[name] = qv
    if representation == "electric":
        vals = lay.register_values()
        diag = np.zeros((mdim, gdim))
        for name, form in model.fields.items():
            rv = np.zeros(gdim)
            for k, a in form.registers.items():
                rv += a * vals[k]
            diag += (qpart[name][:, None] + rv[None, :]) ** 2
        return sp.diags(0.5 * g2 * diag.ravel(), format="csr"), 0.0

    regs = lay.registers
    idx = {k: i for i, k in enumerate(regs)}
    n = len(regs)
    A = np.zeros((n, n))
    B = [np.zeros(mdim) for _ in range(n)]
    const = np.zeros(mdim)
    for name, form in model.fields.items():
        a = np.zeros(n)
        for k, c in form.registers.items():
            a[idx[k]] = c
        A += np.outer(a, a)
        for j in range(n):
            if a[j]:
                B[j] += a[j] * qpart[name]
        const += qpart[name] ** 2
    C, S = fourier_blocks(lay.l, L, scheme)
    C, S = sp.csr_matrix(C), sp.csr_matrix(S)
    dims = [2 * lay.l + 1] * n
    gauge = sp.csr_matrix((gdim, gdim))
    for j in range(n):
        if A[j, j]:
            gauge = gauge + (A[j, j] / 2) * embed({j: C}, dims)
        for k in range(j + 1, n):
            if A[j, k]:
                # R_j R_k + R_k R_j -> -S_j S_k / 2
                gauge = gauge - (A[j, k] / 2) * embed({j: S, k: S}, dims)
    H = sp.kron(sp.identity(mdim), gauge, format="csr")
    for j in range(n):
        if np.any(B[j]):
            # 2 R_j B_j with R_j -> S_j / (2i)
            H = H + sp.kron(sp.diags(B[j]), (-1j) * embed({j: S}, dims), format="csr")
    H = H + sp.kron(sp.diags(const), sp.identity(gdim), format="csr")
    shift = 0.5 * g2 * float(np.trace(A)) * L * (L + 1) / 3
    return maybe_real(0.5 * g2 * H), shift


def magnetic_term(model: GaugeModel, coupling: CouplingParams, representation: str,
                  L: int, cyclic: bool = False) -> sp.csr_matrix:
    lay = model.layout
    pref = -1.0 / (2 * coupling.g2 * coupling.a**2)
    X = sp.csr_matrix((lay.gauge_dim, lay.gauge_dim))
    for term in model.plaquettes:
        X = X + _gauge_product(lay, term, representation, L, cyclic)
    G = maybe_real(pref * (X + X.conj().T))
    return sp.kron(sp.identity(lay.matter_dim), G, format="csr")


def kinetic_term(model: GaugeModel, coupling: CouplingParams, representation: str,
                 L: int, cyclic: bool = False) -> sp.csr_matrix:
    lay = model.layout
    if coupling.kappa == 0 or not model.hops:
        return sp.csr_matrix((lay.dim, lay.dim))
    ann = matter_annihilators(lay)
    H = sp.csr_matrix((lay.dim, lay.dim), dtype=complex)
    for hop in model.hops:
        a = ann[lay.site_index(hop.source)]
        b = ann[lay.site_index(hop.target)]
        M = sp.csr_matrix(a.T @ b)
        G = _gauge_product(lay, hop.gauge, representation, L, cyclic)
        H = H + sp.kron(M, G, format="csr")
    H = coupling.kappa * (H + H.conj().T)
    return maybe_real(H)


def mass_term(model: GaugeModel, coupling: CouplingParams) -> sp.csr_matrix:
    lay = model.layout
    occ = lay.occupations()
    diag = np.zeros(lay.matter_dim)
    for k, s in enumerate(lay.sites):
        diag += model.mass_weights.get(s, 0) * occ[k]
    return sp.kron(sp.diags(coupling.m * diag), sp.identity(lay.gauge_dim), format="csr")


def realize(
    model: GaugeModel,
    group: GroupParams,
    coupling: CouplingParams,
    representation: str = "electric",
    scheme: str = "projected",
    cyclic: bool = False,
    max_dim: int | None = None,
) -> ModelHamiltonian:
    """Sparse matrices of a :class:`GaugeModel`.

    ``cyclic`` switches the electric representation to untruncated Z_{2L+1}
    lowering operators (requires ``l == L``).
    """
    if representation not in ("electric", "magnetic"):
        raise DomainError(f"unknown representation {representation!r}")
    if group.l != model.layout.l:
        raise DomainError("group truncation does not match the layout")
    if cyclic and group.l != group.L:
        raise DomainError("cyclic lowering operators need the full group, l == L")
    _check_dim(model.layout, max_dim)
    L = group.L
    H_E, shift = electric_term(model, coupling, representation, L, scheme)
    H_B = magnetic_term(model, coupling, representation, L, cyclic)
    H_K = kinetic_term(model, coupling, representation, L, cyclic)
    H_M = mass_term(model, coupling)
    return ModelHamiltonian(representation, group, coupling, model.layout,
                            H_E, H_B, H_K, H_M, constant_shift=shift)


def total_charge_operator(layout: MatterLayout) -> sp.csr_matrix:
    """``sum_n q_n`` (static charges included) on the full basis."""
    q = sum(layout.charges().values())
    return sp.kron(sp.diags(q), sp.identity(layout.gauge_dim), format="csr")


def gauss_residuals(fields_by_link: Mapping[tuple[Site, str], LinearForm],
                    shape: tuple[int, int]) -> dict[Site, LinearForm]:
    """``div E - q`` at every site, as linear forms in registers and charges.

    ``fields_by_link`` maps ``(site, "x"|"y")`` to the field on the link
    leaving that site. Static charges are folded into ``q`` and therefore
    do not appear.
    """
    Nx, Ny = shape
    out = {}
    for nx in range(Nx):
        for ny in range(Ny):
            n = (nx, ny)
            div = (
                fields_by_link[(n, "x")]
                - fields_by_link[(((nx - 1) % Nx, ny), "x")]
                + fields_by_link[(n, "y")]
                - fields_by_link[((nx, (ny - 1) % Ny), "y")]
            )
            out[n] = div - LinearForm.charge(n)
    return out
