"""Command-line front end.

Every run is described by a :class:`RunConfig`. Values come from, in
increasing precedence: built-in defaults, a YAML config file (``--config``)
and command-line flags. The resolved config is validated against
:data:`CONFIG_SCHEMA`, echoed into ``manifest.json`` and is enough to
reproduce the run.

Outputs go to ``--out`` (default ``results/<command>``); existing files are
never overwritten unless ``--force`` is given.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np
import scipy
import scipy.io
import scipy.sparse as sp
import yaml

from compactqed import __version__
from compactqed.exceptions import DomainError, ResourceError

log = logging.getLogger("compactqed")

COMMANDS = (
    "scan-plaquette",
    "fourier-fidelity",
    "sequence-fidelity",
    "l-opt",
    "g-m",
    "matter-scan",
    "torus-gen",
    "export-operator",
    "truncation-analysis",
    "resource-table",
)

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_ERROR = 0, 2, 3, 1


@dataclass
class RunConfig:
    """Complete, serializable description of one CLI run."""

    command: str
    inv_g2: list[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    l: list[int] = field(default_factory=lambda: [1, 2])
    L: list[int] | None = None
    L_policy: str = "opt"
    representation: str = "electric"
    system: str = "plaquette"
    m: float = 10.0
    kappa: float = 10.0
    Nx: int = 2
    Ny: int = 2
    statistics: str = "fermionic"
    static_charges: list[list[int]] = field(default_factory=list)
    reference_l: int = 10
    accuracy: float = 0.01
    fixed_L: list[Any] = field(default_factory=list)
    tol: float = 1e-11
    seed: int = 1234
    workers: int = 1
    max_dim: int = 200_000
    out: str | None = None
    force: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        validate_config(data)
        return cls(**data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        return cls.from_dict(yaml.safe_load(text) or {})

    @property
    def out_dir(self) -> Path:
        return Path(self.out or Path("results") / self.command)


_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "inv_g2": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                   "minItems": 1},
        "l": {"type": "array", "items": _pos_int, "minItems": 1},
        "L": {"type": ["array", "null"], "items": _pos_int},
        "L_policy": {"enum": ["opt", "grid", "none"]},
        "representation": {"enum": ["electric", "magnetic", "electric-cyclic"]},
        "system": {"enum": ["plaquette", "matter", "torus", "link"]},
        "m": _num,
        "kappa": _num,
        "Nx": {"type": "integer", "minimum": 2},
        "Ny": {"type": "integer", "minimum": 2},
        "statistics": {"enum": ["fermionic", "bosonic"]},
        "static_charges": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"},
                      "minItems": 3, "maxItems": 3},
        },
        "reference_l": _pos_int,
        "accuracy": {"type": "number", "exclusiveMinimum": 0},
        "fixed_L": {"type": "array",
                    "items": {"anyOf": [_pos_int, {"const": "reference"}]}},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "workers": _pos_int,
        "max_dim": _pos_int,
        "out": {"type": ["string", "null"]},
        "force": {"type": "boolean"},
    },
}


class UsageError(ValueError):
    """Invalid configuration; the message names the offending field path."""


def validate_config(data: dict) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.path) or "<root>"
        raise UsageError(f"invalid config at {path}: {err.message}")


# --- argument parsing ---------------------------------------------------------

def _floats(text: str) -> list[float]:
    """``"0.1,1,10"`` or a log grid ``"logspace:-1:2:7"``."""
    if text.startswith("logspace:"):
        _, a, b, n = text.split(":")
        return [float(x) for x in np.logspace(float(a), float(b), int(n))]
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    """``"1,2,5"`` or an inclusive range ``"1-10"``."""
    out: list[int] = []
    for part in text.split(","):
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _fixed(text: str) -> list[Any]:
    return [x if x == "reference" else int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compactqed",
        description="Plaquette and torus Hamiltonians of compact 2+1D QED.",
        epilog="Precedence: defaults < --config file < command-line flags.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file with RunConfig fields")
    common.add_argument("--inv-g2", dest="inv_g2", type=_floats,
                        help="coupling grid g^-2, e.g. 0.1,1,10 or logspace:-1:2:7")
    common.add_argument("--l", dest="l", type=_ints, help="truncations, e.g. 1-10")
    common.add_argument("--L", dest="L", type=_ints, help="group resolutions, e.g. 3-20")
    common.add_argument("--L-policy", dest="L_policy", choices=["opt", "grid", "none"],
                        help="opt: L_opt per point; grid: scan --L; none: electric only")
    common.add_argument("--representation", choices=["electric", "magnetic", "electric-cyclic"])
    common.add_argument("--system", choices=["plaquette", "matter", "torus", "link"])
    common.add_argument("--m", dest="m", type=float, help="fermion mass")
    common.add_argument("--kappa", type=float, help="hopping amplitude")
    common.add_argument("--Nx", type=int)
    common.add_argument("--Ny", type=int)
    common.add_argument("--statistics", choices=["fermionic", "bosonic"])
    common.add_argument("--static-charge", dest="static_charges", action="append",
                        type=_ints, metavar="X,Y,Q", help="static charge Q at (X,Y); repeatable")
    common.add_argument("--reference-l", dest="reference_l", type=int)
    common.add_argument("--accuracy", type=float)
    common.add_argument("--fixed-L", dest="fixed_L", type=_fixed,
                        help="fixed resolutions for the resource table; 'reference' allowed")
    common.add_argument("--tol", type=float, help="relative eigensolver residual")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="process pool size")
    common.add_argument("--max-dim", dest="max_dim", type=int, help="basis size cap")
    common.add_argument("--out", help="output directory")
    common.add_argument("--force", action="store_true", default=None,
                        help="overwrite existing outputs")
    common.add_argument("-v", "--verbose", action="store_true")

    helps = {
        "scan-plaquette": "plaquette expectation over g^-2 x l",
        "fourier-fidelity": "max-over-L Fourier fidelity between the representations",
        "sequence-fidelity": "overlap of ground states at truncations l-1 and l",
        "l-opt": "greedy L_opt search per (l, g^-2)",
        "g-m": "coupling with the best Fourier fidelity per l",
        "matter-scan": "plaquette with staggered fermions at L = L_opt",
        "torus-gen": "term list (JSON) of an Nx x Ny torus, matrices when small",
        "export-operator": "Matrix Market export of a Hamiltonian",
        "truncation-analysis": "shell populations of the truncation variants",
        "resource-table": "basis states needed per strategy for a target accuracy",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(argv: list[str] | None = None) -> tuple[RunConfig, bool]:
    """Merge defaults, config file and flags; returns the config and verbosity."""
    args = build_parser().parse_args(argv)
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            loaded = yaml.safe_load(args.config.read_text()) or {}
        except (OSError, yaml.YAMLError) as err:
            raise UsageError(f"cannot read config {args.config}: {err}") from err
        if not isinstance(loaded, dict):
            raise UsageError("config file must contain a mapping")
        data.update(loaded)
    names = {f.name for f in fields(RunConfig)}
    for key, value in vars(args).items():
        if key in names and value is not None:
            data[key] = value
    data["command"] = args.command
    base = RunConfig(command=args.command).to_dict()
    base.update(data)
    validate_config(base)
    return RunConfig(**base), bool(args.verbose)


# --- output handling ------------------------------------------------------------

class Output:
    """Writes artifacts into one directory, refusing to overwrite unless forced."""

    def __init__(self, root: Path, force: bool):
        self.root = root
        self.force = force
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        if p.exists() and not self.force:
            raise FileExistsError(f"{p} exists; pass --force to overwrite")
        self.root.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return p

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text)
        return p

    def write_json(self, name: str, obj: Any) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True, default=_json) + "\n")

    def write_csv(self, name: str, rows: list[dict], columns: list[str] | None = None) -> Path:
        columns = columns or (list(rows[0]) if rows else [])
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k)) for k in columns})
        return self.write_text(name, buf.getvalue())


def _json(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(type(obj))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


def _map(fn: Callable, items: list, workers: int) -> list:
    """Order-preserving map, in a process pool when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- commands -------------------------------------------------------------------

def _scan_chunk(job: tuple) -> list[dict]:
    from compactqed.analysis import scan

    observable, x, l_grid, rep, policy, tol = job
    return [r.to_dict() for r in scan(observable, [x], l_grid, rep, policy, tol)]


def _policy(cfg: RunConfig):
    if cfg.L_policy == "none":
        return None
    if cfg.L_policy == "grid":
        if not cfg.L:
            raise UsageError("invalid config at L: L_policy 'grid' needs a list of L values")
        return list(cfg.L)
    return "opt"


def cmd_scan(cfg: RunConfig, out: Output, observable: str) -> dict:
    rep = cfg.representation
    if observable == "fourier_fidelity":
        rep = "magnetic"
    policy = _policy(cfg) if (rep == "magnetic" or observable == "fourier_fidelity") else None
    if observable == "sequence_fidelity" and rep == "magnetic" and policy is None:
        raise UsageError("invalid config at L_policy: the magnetic representation needs L")
    jobs = [(observable, x, tuple(cfg.l), rep, policy, cfg.tol) for x in cfg.inv_g2]
    rows = [r for chunk in _map(_scan_chunk, jobs, cfg.workers) for r in chunk]
    out.write_csv(f"{observable}.csv", rows)
    failed = sum(r["status"] != "ok" for r in rows)
    return {"records": len(rows), "failed": failed}


def _lopt_job(job: tuple) -> dict:
    from compactqed.analysis import find_L_opt

    l, x, L_grid, tol = job
    p = find_L_opt(l, 1.0 / x, L_grid=L_grid, tol=tol)
    return {
        "l": l, "inv_g2": x, "L_opt": p.L_opt, "detection": p.detection,
        "freezing": p.freezing, "vacuum_weight": p.vacuum_weight, "warning": p.warning,
        "L_values": list(p.L_values), "infidelities": list(p.infidelities),
    }


def cmd_l_opt(cfg: RunConfig, out: Output) -> dict:
    jobs = [(l, x, cfg.L, cfg.tol) for l in cfg.l for x in cfg.inv_g2]
    rows = _map(_lopt_job, jobs, cfg.workers)
    out.write_csv("l_opt.csv", rows, ["l", "inv_g2", "L_opt", "detection", "freezing",
                                      "vacuum_weight", "warning"])
    out.write_json("l_opt_curves.json", rows)
    return {"points": len(rows), "freezing": sum(r["freezing"] for r in rows)}


def _gm_job(job: tuple) -> dict:
    from compactqed.analysis import find_gm

    l, grid, L_grid, tol = job
    r = find_gm(l, grid, L_grid, tol=tol)
    return {"l": l, "g_m": r.g_m, "inv_g2_m": r.inv_g2_grid[int(np.argmax(r.max_fidelities))], "fidelity": r.fidelity,
            "L_best": list(r.L_best), "warning": r.warning,
            "curve": [{"inv_g2": x, "max_fidelity": f}
                      for x, f in zip(r.inv_g2_grid, r.max_fidelities)]}


def cmd_g_m(cfg: RunConfig, out: Output) -> dict:
    jobs = [(l, tuple(cfg.inv_g2), cfg.L, cfg.tol) for l in cfg.l]
    rows = _map(_gm_job, jobs, cfg.workers)
    out.write_csv("g_m.csv", rows, ["l", "g_m", "inv_g2_m", "fidelity", "L_best", "warning"])
    out.write_json("g_m.json", rows)
    return {"points": len(rows)}


def _matter_job(job: tuple) -> dict:
    from compactqed.analysis import find_L_opt, matter_plaquette_point, pure_gauge_plaquette

    l, x, L_fixed, m, kappa, rep, tol, max_dim = job
    g2 = 1.0 / x
    L = L_fixed if L_fixed is not None else find_L_opt(l, g2, tol=1e-11).L_opt
    p = matter_plaquette_point(l, g2, L, m, kappa, rep, tol=tol, max_dim=max_dim)
    pure = pure_gauge_plaquette(rep, l, g2, L)
    return {"inv_g2": x, "l": l, "L": p.L, "m": m, "kappa": kappa, "representation": rep,
            "plaquette": p.plaquette, "pure_gauge_plaquette": pure, "energy": p.energy,
            "sector_dim": p.sector_dim}


def cmd_matter(cfg: RunConfig, out: Output) -> dict:
    L_fixed = cfg.L[0] if (cfg.L_policy == "grid" and cfg.L) else None
    rep = "magnetic" if cfg.representation == "electric-cyclic" else cfg.representation
    jobs = [(l, x, L_fixed, cfg.m, cfg.kappa, rep, max(cfg.tol, 1e-10), cfg.max_dim)
            for l in cfg.l for x in cfg.inv_g2]
    rows = _map(_matter_job, jobs, cfg.workers)
    out.write_csv("matter_plaquette.csv", rows)
    return {"points": len(rows)}


def _torus_spec(cfg: RunConfig, l: int, x: float):
    from compactqed.basis import CouplingParams, GroupParams
    from compactqed.torus import TorusSpec

    L = cfg.L[0] if cfg.L else l
    return TorusSpec(cfg.Nx, cfg.Ny, GroupParams(l, max(L, l)),
                     CouplingParams(1.0 / x, 1.0, cfg.m, cfg.kappa), cfg.statistics,
                     {(a, b): q for a, b, q in cfg.static_charges})


def cmd_torus(cfg: RunConfig, out: Output) -> dict:
    from compactqed.torus import build_torus_hamiltonian, validate_termlist

    spec = _torus_spec(cfg, cfg.l[0], cfg.inv_g2[0])
    rep = "magnetic" if cfg.representation == "magnetic" else "electric"
    summary: dict[str, Any] = {}
    try:
        build = build_torus_hamiltonian(spec, True, rep, cfg.max_dim)
        tl = build.termlist
    except ResourceError as err:
        tl = err.termlist
        build = None
        summary["matrix"] = f"skipped: {err}"
    validate_termlist(tl.to_dict())
    out.write_text("termlist.json", tl.to_json() + "\n")
    summary["terms"] = len(tl.terms)
    if build is not None and build.hamiltonian is not None:
        H = sp.csr_matrix(build.hamiltonian.total)
        summary["dim"] = H.shape[0]
        summary["sha256"] = _write_mtx(out, "hamiltonian.mtx", H)
    return summary


def _operator(cfg: RunConfig):
    from compactqed.basis import CouplingParams, GroupParams
    from compactqed.hamiltonian import (
        build_link_formulation, build_pure_gauge_electric, build_pure_gauge_magnetic)
    from compactqed.matter import build_matter_system

    l, x = cfg.l[0], cfg.inv_g2[0]
    L = cfg.L[0] if cfg.L else l
    group = GroupParams(l, max(L, l))
    coupling = CouplingParams(1.0 / x, 1.0, cfg.m, cfg.kappa)
    rep = cfg.representation
    if cfg.system == "plaquette":
        dim = (2 * l + 1) ** 3
        if dim > cfg.max_dim:
            raise ResourceError(f"dimension {dim} exceeds cap {cfg.max_dim}")
        if rep == "magnetic":
            return build_pure_gauge_magnetic(group, coupling).total
        if rep == "electric-cyclic":
            return build_pure_gauge_electric(GroupParams(l, l), coupling, cyclic=True).total
        return build_pure_gauge_electric(group, coupling).total
    if cfg.system == "matter":
        rep = "magnetic" if rep == "magnetic" else "electric"
        return build_matter_system(rep, group, coupling, cyclic=cfg.representation
                                   == "electric-cyclic", max_dim=cfg.max_dim).total
    if cfg.system == "link":
        return build_link_formulation(group, coupling).total
    from compactqed.torus import build_torus_hamiltonian

    spec = _torus_spec(cfg, l, x)
    rep = "magnetic" if rep == "magnetic" else "electric"
    return build_torus_hamiltonian(spec, True, rep, cfg.max_dim).hamiltonian.total


def _write_mtx(out: Output, name: str, H) -> str:
    buf = io.BytesIO()
    # 17 significant digits make the text round trip bit exact
    scipy.io.mmwrite(buf, sp.coo_matrix(H), precision=17, symmetry="general")
    data = buf.getvalue()
    out.path(name).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def export_operator(cfg: RunConfig, out: Output) -> dict:
    H = sp.csr_matrix(_operator(cfg))
    if H.shape[0] > cfg.max_dim:
        raise ResourceError(f"dimension {H.shape[0]} exceeds cap {cfg.max_dim}")
    digest = _write_mtx(out, "operator.mtx", H)
    return {"dim": H.shape[0], "nnz": int(H.nnz), "sha256": digest}


def cmd_truncation(cfg: RunConfig, out: Output) -> dict:
    from compactqed.analysis import truncation_decomposition

    l = cfg.l[0]
    L = cfg.L[0] if cfg.L else l + 1
    ta = truncation_decomposition(l, L, tol=cfg.tol)
    rows = []
    for variant, shells in ta.variants.items():
        acc = 0.0
        for r2, p in shells.items():
            acc += p
            rows.append({"variant": variant, "r2": r2, "population": p, "cumulative": acc})
    out.write_csv("shell_populations.csv", rows)
    out.write_json("truncation_energies.json", {"l": l, "L": L, "energies": ta.energies,
                                               "dims": ta.dims})
    return {"variants": len(ta.variants)}


def cmd_resource(cfg: RunConfig, out: Output) -> dict:
    from compactqed.analysis import resource_comparison

    rows = []
    for x in cfg.inv_g2:
        t = resource_comparison(x, cfg.reference_l, cfg.accuracy, fixed_L=cfg.fixed_L,
                                tol=cfg.tol)
        for r in t.rows:
            rows.append({"inv_g2": x, "reference": t.reference, "reference_L": t.reference_L,
                         "strategy": r.strategy, "l": r.l, "L": r.L, "states": r.states,
                         "value": r.value, "deviation": r.deviation})
    out.write_csv("resource_table.csv", rows)
    return {"rows": len(rows)}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the process exit status."""
    validate_config(cfg.to_dict())
    np.random.seed(cfg.seed)
    out = Output(cfg.out_dir, cfg.force)
    manifest_path = out.path("manifest.json")
    out.files.remove("manifest.json")
    start = time.time()
    status, summary, error = EXIT_OK, {}, None
    dispatch: dict[str, Callable[[], dict]] = {
        "scan-plaquette": lambda: cmd_scan(cfg, out, "plaquette"),
        "fourier-fidelity": lambda: cmd_scan(cfg, out, "fourier_fidelity"),
        "sequence-fidelity": lambda: cmd_scan(cfg, out, "sequence_fidelity"),
        "l-opt": lambda: cmd_l_opt(cfg, out),
        "g-m": lambda: cmd_g_m(cfg, out),
        "matter-scan": lambda: cmd_matter(cfg, out),
        "torus-gen": lambda: cmd_torus(cfg, out),
        "export-operator": lambda: export_operator(cfg, out),
        "truncation-analysis": lambda: cmd_truncation(cfg, out),
        "resource-table": lambda: cmd_resource(cfg, out),
    }
    try:
        summary = dispatch[cfg.command]()
    except ResourceError as err:
        status, error = EXIT_RESOURCE, f"resource error: {err}"
    except (DomainError, UsageError) as err:
        status, error = EXIT_USAGE, f"usage error: {err}"
    if error:
        log.error(error)
    manifest = {
        "config": cfg.to_dict(),
        "versions": {"compactqed": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(start)),
        "seconds": round(time.time() - start, 3),
        "status": status,
        "error": error,
        "summary": summary,
        "files": sorted(out.files),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json) + "\n")
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        cfg, verbose = resolve_config(argv)
    except UsageError as err:
        print(f"compactqed: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(cfg)
    except FileExistsError as err:
        print(f"compactqed: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
