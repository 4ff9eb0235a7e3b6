"""Gauge-fixed Hamiltonian of an ``N_x x N_y`` periodic lattice with matter.

Registers: one rotator ``R(nx,ny)`` per plaquette except ``R(0,Ny-1)``,
which is fixed to zero, plus the strings ``Rx`` and ``Ry``. Link fields are

    E_{n,x} = delta_{ny,0} Rx + R_n - R_{n-e_y} + q_{n,x}
    E_{n,y} = delta_{nx,0} Ry + R_{n-e_x} - R_n + q_{n,y}

with charge strings running from the origin first along x and then along y.
The output is a symbolic :class:`TermList` (JSON-serializable) and, below a
dimension cap, a sparse matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Any, Mapping

import numpy as np

from compactqed.basis import CouplingParams, GroupParams
from compactqed.exceptions import DomainError, ResourceError
from compactqed.model import (
    STATISTICS,
    GaugeModel,
    Hop,
    LinearForm,
    MatterLayout,
    ModelHamiltonian,
    Site,
    gauss_residuals,
    realize,
)

TERMLIST_VERSION = 1

TERMLIST_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Gauge-fixed lattice Hamiltonian term list",
    "type": "object",
    "required": ["version", "lattice", "registers", "sites", "terms"],
    "properties": {
        "version": {"const": TERMLIST_VERSION},
        "lattice": {
            "type": "object",
            "required": ["Nx", "Ny", "statistics", "l", "L", "g2", "a", "m", "kappa"],
            "properties": {
                "Nx": {"type": "integer", "minimum": 2},
                "Ny": {"type": "integer", "minimum": 2},
                "statistics": {"enum": list(STATISTICS)},
                "max_occupation": {"type": "integer", "minimum": 1},
                "l": {"type": "integer", "minimum": 0},
                "L": {"type": "integer", "minimum": 1},
                "g2": {"type": "number", "exclusiveMinimum": 0},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "m": {"type": "number"},
                "kappa": {"type": "number"},
                "static_charges": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [
                            {"type": "integer"},
                            {"type": "integer"},
                            {"type": "integer"},
                        ],
                        "minItems": 3,
                        "maxItems": 3,
                    },
                },
            },
        },
        "registers": {"type": "array", "items": {"type": "string"}},
        "sites": {"type": "array", "items": {"$ref": "#/$defs/site"}},
        "terms": {"type": "array", "items": {"$ref": "#/$defs/term"}},
    },
    "$defs": {
        "site": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 2,
            "maxItems": 2,
        },
        "factor": {
            "type": "object",
            "required": ["op"],
            "properties": {
                "op": {"enum": ["R", "P", "charge", "number", "psi", "psi_dag"]},
                "register": {"type": "string"},
                "power": {"type": "integer"},
                "site": {"$ref": "#/$defs/site"},
            },
            "additionalProperties": False,
        },
        "term": {
            "type": "object",
            "required": ["part", "coefficient", "factors"],
            "properties": {
                "part": {"enum": ["electric", "magnetic", "kinetic", "mass"]},
                "coefficient": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "factors": {"type": "array", "items": {"$ref": "#/$defs/factor"}},
            },
            "additionalProperties": False,
        },
    },
}


@dataclass(frozen=True)
class TorusSpec:
    Nx: int
    Ny: int
    group: GroupParams
    coupling: CouplingParams
    statistics: str = "fermionic"
    static_charges: Mapping[Site, int] = field(default_factory=dict)
    max_occupation: int | None = None

    def __post_init__(self):
        if self.Nx < 2 or self.Ny < 2:
            raise DomainError("the torus needs at least two sites per direction")
        if self.statistics not in STATISTICS:
            raise DomainError(f"statistics must be one of {STATISTICS}")
        if self.max_occupation is None:
            object.__setattr__(self, "max_occupation", 1 if self.statistics == "fermionic" else 2)
        charges = {tuple(k): int(v) for k, v in dict(self.static_charges).items()}
        for s in charges:
            if not (0 <= s[0] < self.Nx and 0 <= s[1] < self.Ny):
                raise DomainError(f"static charge at {s} lies off the lattice")
        object.__setattr__(self, "static_charges", charges)

    @property
    def eliminated(self) -> Site:
        return (0, self.Ny - 1)

    @property
    def sites(self) -> tuple[Site, ...]:
        """Sites in Jordan-Wigner order: columns traversed as a snake."""
        out = []
        for nx in range(self.Nx):
            ys = range(self.Ny) if nx % 2 == 0 else range(self.Ny - 1, -1, -1)
            out.extend((nx, ny) for ny in ys)
        return tuple(out)

    @property
    def plaquettes(self) -> tuple[Site, ...]:
        return tuple(
            (nx, ny) for nx in range(self.Nx) for ny in range(self.Ny) if (nx, ny) != self.eliminated
        )

    @property
    def registers(self) -> tuple[str, ...]:
        return tuple(rotator_name(n) for n in self.plaquettes) + ("Rx", "Ry")

    @property
    def n_rotators(self) -> int:
        return self.Nx * self.Ny - 1


def rotator_name(n: Site) -> str:
    return f"R({n[0]},{n[1]})"


def _rot(spec: TorusSpec, n: Site, c: int = 1) -> LinearForm:
    n = (n[0] % spec.Nx, n[1] % spec.Ny)
    if n == spec.eliminated:
        return LinearForm()
    return LinearForm.register(rotator_name(n), c)


def charge_string(spec: TorusSpec, n: Site, direction: str) -> LinearForm:
    """Field correction ``q_{n,dir}`` of the conventional charge strings."""
    nx, ny = n
    out = LinearForm()
    if direction == "x":
        if ny == 0:
            for rx in range(nx + 1, spec.Nx):
                for ry in range(spec.Ny):
                    out = out - LinearForm.charge((rx, ry))
    elif direction == "y":
        for ry in range(ny + 1, spec.Ny):
            out = out - LinearForm.charge((nx, ry))
    else:
        raise DomainError("direction must be 'x' or 'y'")
    return out


def electric_field_expression(n: Site, direction: str, spec: TorusSpec) -> LinearForm:
    nx, ny = n
    if not (0 <= nx < spec.Nx and 0 <= ny < spec.Ny):
        raise DomainError(f"site {n} is not on the lattice")
    if direction == "x":
        out = _rot(spec, n) - _rot(spec, (nx, ny - 1))
        if ny == 0:
            out = out + LinearForm.register("Rx")
    elif direction == "y":
        out = _rot(spec, (nx - 1, ny)) - _rot(spec, n)
        if nx == 0:
            out = out + LinearForm.register("Ry")
    else:
        raise DomainError("direction must be 'x' or 'y'")
    return out + charge_string(spec, n, direction)


def all_fields(spec: TorusSpec) -> dict[tuple[Site, str], LinearForm]:
    return {
        ((nx, ny), d): electric_field_expression((nx, ny), d, spec)
        for nx in range(spec.Nx)
        for ny in range(spec.Ny)
        for d in ("x", "y")
    }


def gauss_law_residuals(spec: TorusSpec, neutral: bool = True) -> dict[Site, LinearForm]:
    """Symbolic ``div E - q`` per site.

    With ``neutral=True`` the origin charge is replaced by minus the sum of
    all other charges (total charge zero), after which every residual
    vanishes identically.
    """
    res = gauss_residuals(all_fields(spec), (spec.Nx, spec.Ny))
    if neutral:
        others = LinearForm()
        for s in spec.sites:
            if s != (0, 0):
                others = others - LinearForm.charge(s)
        res = {n: r.substitute_charge((0, 0), others) for n, r in res.items()}
    return res


def kinetic_replacement(n: Site, direction: str, spec: TorusSpec) -> dict[str, int]:
    """Register powers replacing ``U^dagger`` on the link leaving ``n`` along ``direction``."""
    nx, ny = n
    out: dict[str, int] = {}
    if direction == "x":
        if nx == spec.Nx - 1:
            out["Rx"] = -1
        for ry in range(ny):
            if (nx, ry) != spec.eliminated:
                out[rotator_name((nx, ry))] = 1
    elif direction == "y":
        if ny == spec.Ny - 1:
            out["Ry"] = -1
            block = [(rx, ry) for rx in range(nx, spec.Nx) for ry in range(spec.Ny)]
            # the product over every plaquette is the identity
            if spec.eliminated not in block:
                for p in block:
                    out[rotator_name(p)] = 1
    else:
        raise DomainError("direction must be 'x' or 'y'")
    return out


def torus_model(spec: TorusSpec) -> GaugeModel:
    layout = MatterLayout(
        spec.sites,
        spec.registers,
        spec.group.l,
        statistics=spec.statistics,
        max_occupation=spec.max_occupation,
        static_charges=spec.static_charges,
    )
    fields = {f"E{n[0]}{n[1]}{d}": form for (n, d), form in all_fields(spec).items()}
    hops = []
    for nx in range(spec.Nx):
        for ny in range(spec.Ny):
            hops.append(Hop((nx, ny), ((nx + 1) % spec.Nx, ny),
                            kinetic_replacement((nx, ny), "x", spec), f"({nx},{ny}) x"))
            hops.append(Hop((nx, ny), (nx, (ny + 1) % spec.Ny),
                            kinetic_replacement((nx, ny), "y", spec), f"({nx},{ny}) y"))
    plaqs = [{rotator_name(n): 1} for n in spec.plaquettes]
    plaqs.append({rotator_name(n): 1 for n in spec.plaquettes})
    if spec.statistics == "fermionic":
        weights = {s: (-1) ** (s[0] + s[1]) for s in spec.sites}
    else:
        weights = {s: 1 for s in spec.sites}
    return GaugeModel(layout, fields, tuple(plaqs), tuple(hops), weights)


# --- term list -------------------------------------------------------------

@dataclass(frozen=True)
class TermList:
    header: dict
    registers: tuple[str, ...]
    sites: tuple[Site, ...]
    terms: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "version": TERMLIST_VERSION,
            "lattice": self.header,
            "registers": list(self.registers),
            "sites": [list(s) for s in self.sites],
            "terms": list(self.terms),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def by_part(self, part: str) -> list[dict]:
        return [t for t in self.terms if t["part"] == part]


def _term(part: str, coeff: complex, factors: list[dict]) -> dict:
    return {"part": part, "coefficient": [float(np.real(coeff)), float(np.imag(coeff))],
            "factors": factors}


def _p(reg: str, power: int) -> dict:
    return {"op": "P", "register": reg, "power": int(power)}


def _expand_square(form: LinearForm) -> dict[tuple, int]:
    """Monomials of ``form^2`` keyed by sorted atom tuples."""
    atoms = [(("R", k), c) for k, c in form.registers.items()]
    atoms += [(("charge", s), c) for s, c in form.charges.items()]
    if form.const:
        atoms.append((("1", None), form.const))
    out: dict[tuple, int] = {}
    for (i, (a, ca)), (j, (b, cb)) in combinations_with_replacement(list(enumerate(atoms)), 2):
        key = tuple(sorted([a, b], key=repr))
        out[key] = out.get(key, 0) + (1 if i == j else 2) * ca * cb
    return out


def _factor(atom) -> dict | None:
    kind, what = atom
    if kind == "R":
        return {"op": "R", "register": what, "power": 1}
    if kind == "charge":
        return {"op": "charge", "site": list(what)}
    return None


def build_termlist(spec: TorusSpec) -> TermList:
    model = torus_model(spec)
    g2, a = spec.coupling.g2, spec.coupling.a
    terms: list[dict] = []

    mono: dict[tuple, int] = {}
    for form in model.fields.values():
        for k, v in _expand_square(form).items():
            mono[k] = mono.get(k, 0) + v
    for key in sorted(mono, key=repr):
        if mono[key]:
            facs = [f for f in (_factor(x) for x in key) if f is not None]
            terms.append(_term("electric", 0.5 * g2 * mono[key], facs))

    pref = -1.0 / (2 * g2 * a**2)
    for plaq in model.plaquettes:
        for sign in (1, -1):
            terms.append(_term("magnetic", pref, [_p(k, sign * v) for k, v in sorted(plaq.items())]))

    kappa = spec.coupling.kappa
    for hop in model.hops:
        gauge = [_p(k, v) for k, v in sorted(hop.gauge.items())]
        terms.append(_term("kinetic", kappa,
                           [{"op": "psi_dag", "site": list(hop.source)}] + gauge
                           + [{"op": "psi", "site": list(hop.target)}]))
        gauge_h = [_p(k, -v) for k, v in sorted(hop.gauge.items())]
        terms.append(_term("kinetic", np.conj(kappa),
                           [{"op": "psi_dag", "site": list(hop.target)}] + gauge_h
                           + [{"op": "psi", "site": list(hop.source)}]))

    for s in spec.sites:
        w = model.mass_weights[s]
        terms.append(_term("mass", spec.coupling.m * w, [{"op": "number", "site": list(s)}]))

    header = {
        "Nx": spec.Nx, "Ny": spec.Ny, "statistics": spec.statistics,
        "max_occupation": spec.max_occupation,
        "l": spec.group.l, "L": spec.group.L,
        "g2": spec.coupling.g2, "a": spec.coupling.a,
        "m": spec.coupling.m, "kappa": spec.coupling.kappa,
        "static_charges": [[s[0], s[1], q] for s, q in sorted(spec.static_charges.items())],
    }
    return TermList(header, spec.registers, spec.sites, tuple(terms))


def conjugate_term(term: dict) -> dict:
    """Hermitian conjugate of a term (factor order reversed, each factor daggered)."""
    out = []
    for f in reversed(term["factors"]):
        f = dict(f)
        if f["op"] == "P":
            f["power"] = -f["power"]
        elif f["op"] == "psi":
            f["op"] = "psi_dag"
        elif f["op"] == "psi_dag":
            f["op"] = "psi"
        out.append(f)
    re, im = term["coefficient"]
    return {"part": term["part"], "coefficient": [re, -im if im else 0.0], "factors": out}


def _canonical(term: dict) -> str:
    # gauge factors and diagonal factors commute among themselves
    facs = term["factors"]
    fermions = [f for f in facs if f["op"] in ("psi", "psi_dag")]
    rest = sorted((f for f in facs if f["op"] not in ("psi", "psi_dag")),
                  key=lambda f: json.dumps(f, sort_keys=True))
    return json.dumps([term["part"], term["coefficient"], fermions, rest], sort_keys=True)


def is_hermitian_closed(tl: TermList) -> bool:
    pool: dict[str, int] = {}
    for t in tl.terms:
        k = _canonical(t)
        pool[k] = pool.get(k, 0) + 1
    for t in tl.terms:
        if pool.get(_canonical(conjugate_term(t)), 0) != pool[_canonical(t)]:
            return False
    return True


def longest_kinetic_string(tl: TermList) -> int:
    """Largest number of gauge-register factors in any kinetic term."""
    return max((sum(f["op"] == "P" for f in t["factors"]) for t in tl.by_part("kinetic")),
               default=0)


def validate_termlist(data: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``data`` violates the schema."""
    import jsonschema

    jsonschema.validate(data, TERMLIST_SCHEMA)


@dataclass(frozen=True)
class TorusBuild:
    spec: TorusSpec
    termlist: TermList
    hamiltonian: ModelHamiltonian | None


def build_torus_hamiltonian(
    spec: TorusSpec,
    with_matrix: bool = True,
    representation: str = "electric",
    max_dim: int | None = 200_000,
) -> TorusBuild:
    """Term list and, when the basis fits under ``max_dim``, the sparse matrices.

    A :class:`ResourceError` raised for an oversized basis carries the
    already generated term list in its ``termlist`` attribute.
    """
    tl = build_termlist(spec)
    if not with_matrix:
        return TorusBuild(spec, tl, None)
    model = torus_model(spec)
    try:
        ham = realize(model, spec.group, spec.coupling, representation, max_dim=max_dim)
    except ResourceError as err:
        err.termlist = tl
        raise
    return TorusBuild(spec, tl, ham)
