"""Observables and convergence diagnostics for the periodic plaquette.

* plaquette expectation ``<P> = -(g^2 a^2 / V) <H_B>``
* truncated DFT between the electric and magnetic bases
* Fourier fidelity ``|<psi_b| F(L, l) |psi_e>|^2`` and its maximum over L
* sequence fidelity between truncations ``l-1`` and ``l``
* greedy search for the optimal group resolution ``L_opt``
* the coupling ``g_m`` at which the two representations agree best
* the decomposition of the cyclic lowering operator into window and remainder
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from compactqed.basis import CouplingParams, GroupParams
from compactqed.eigensolver import EigenResult, ConvergenceError, ground_state
from compactqed.exceptions import DomainError
from compactqed.hamiltonian import (
    GaugeHamiltonian,
    build_pure_gauge_electric,
    build_pure_gauge_magnetic,
)
from compactqed.operators import embed, fourier_blocks, lowering_matrix

PLAQUETTE_VOLUME = 4
DEFAULT_TOL = 1e-11


# --- observables ------------------------------------------------------------

def _as_columns(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    return state.reshape(-1, 1) if state.ndim == 1 else state


def expectation(state: np.ndarray, op) -> float:
    """``<psi|op|psi>``; for a block of orthonormal columns the cluster average."""
    X = _as_columns(state)
    vals = np.einsum("ij,ij->j", X.conj(), op @ X).real
    return float(vals.mean())


def plaquette_expectation(
    state: np.ndarray, H_B, coupling: CouplingParams, volume: int = PLAQUETTE_VOLUME
) -> float:
    """``-(g^2 a^2 / V) <H_B>``; ``volume`` counts plaquettes (4 for the periodic plaquette)."""
    if volume <= 0:
        raise DomainError("volume must be positive")
    return -coupling.g2 * coupling.a**2 / volume * expectation(state, H_B)


def electric_weak_coupling_limit(l: int) -> float:
    """``g -> 0`` limit of ``<P>`` in the truncated electric representation."""
    return math.cos(math.pi / (2 * l + 2))


# --- solves with caching ----------------------------------------------------

@lru_cache(maxsize=512)
def _pure_gauge_solve(rep: str, l: int, L: int, g2: float, a: float, scheme: str,
                      tol: float) -> tuple[GaugeHamiltonian, EigenResult]:
    group = GroupParams(l, max(L, l, 1))
    coupling = CouplingParams(g2, a)
    if rep == "electric":
        ham = build_pure_gauge_electric(group, coupling)
    elif rep == "electric-cyclic":
        ham = build_pure_gauge_electric(GroupParams(l, l), coupling, cyclic=True)
    elif rep == "magnetic":
        ham = build_pure_gauge_magnetic(group, coupling, scheme)
    else:
        raise DomainError(f"unknown representation {rep!r}")
    return ham, ground_state(ham.total, tol=tol)


def pure_gauge_ground_state(
    rep: str, l: int, g2: float, L: int | None = None, a: float = 1.0,
    scheme: str = "projected", tol: float = DEFAULT_TOL,
) -> tuple[GaugeHamiltonian, EigenResult]:
    """Cached build + ground-state solve. ``L`` is ignored for the electric representation."""
    if rep == "magnetic":
        if L is None:
            raise DomainError("the magnetic representation needs L")
        if L < l:
            raise DomainError(f"resolution L={L} below truncation l={l}")
    else:
        L = 0
    return _pure_gauge_solve(rep, int(l), int(L), float(g2), float(a), scheme, float(tol))


def clear_cache() -> None:
    _pure_gauge_solve.cache_clear()


def pure_gauge_plaquette(rep: str, l: int, g2: float, L: int | None = None, **kw) -> float:
    ham, res = pure_gauge_ground_state(rep, l, g2, L, **kw)
    return plaquette_expectation(res.ground_space, ham.H_B, ham.coupling)


# --- truncated Fourier transform -------------------------------------------

@dataclass(frozen=True)
class TruncatedDFT:
    """``F(L, l) = f^{(x) n}`` with ``f_jk = exp(2 pi i j k / (2L+1)) / sqrt(2L+1)``, ``|j|,|k| <= l``."""

    l: int
    L: int
    n_registers: int = 3

    @property
    def factor(self) -> np.ndarray:
        r = np.arange(-self.l, self.l + 1)
        N = 2 * self.L + 1
        return np.exp(2j * np.pi * np.outer(r, r) / N) / np.sqrt(N)

    @property
    def dim(self) -> int:
        return (2 * self.l + 1) ** self.n_registers

    def apply(self, state: np.ndarray) -> np.ndarray:
        X = _as_columns(state)
        d = 2 * self.l + 1
        f = self.factor
        T = X.reshape([d] * self.n_registers + [X.shape[1]])
        for axis in range(self.n_registers):
            T = np.moveaxis(np.tensordot(f, T, axes=([1], [axis])), 0, axis)
        out = T.reshape(self.dim, X.shape[1])
        return out[:, 0] if np.ndim(state) == 1 else out

    def __matmul__(self, state: np.ndarray) -> np.ndarray:
        return self.apply(state)

    def to_dense(self) -> np.ndarray:
        out = self.factor
        for _ in range(self.n_registers - 1):
            out = np.kron(out, self.factor)
        return out


def truncated_dft(l: int, L: int, n_registers: int = 3) -> TruncatedDFT:
    if l > L:
        raise DomainError(f"truncation l={l} exceeds resolution L={L}")
    return TruncatedDFT(l, L, n_registers)


# --- fidelities -------------------------------------------------------------

def _overlap(A: np.ndarray, B: np.ndarray) -> float:
    """``|a^dagger b|`` for vectors; the largest singular value for column blocks."""
    A, B = _as_columns(A), _as_columns(B)
    if A.shape[1] == 1 and B.shape[1] == 1:
        return float(abs(np.vdot(A[:, 0], B[:, 0])))
    return float(np.linalg.svd(A.conj().T @ B, compute_uv=False)[0])


def fourier_fidelity(state_e: np.ndarray, state_b: np.ndarray, l: int, L: int) -> float:
    """``|<psi_b| F(L, l) |psi_e>|^2`` (subspace version for degenerate clusters)."""
    F = truncated_dft(l, L)
    return min(_overlap(state_b, F.apply(state_e)) ** 2, 1.0 + 1e-12)


def embed_inner(state: np.ndarray, l_outer: int, l_inner: int, n_registers: int = 3) -> np.ndarray:
    """Amplitudes of a truncation-``l_outer`` state on the ``[-l_inner, l_inner]^n`` block."""
    X = _as_columns(state)
    d = 2 * l_outer + 1
    cut = l_outer - l_inner
    T = X.reshape([d] * n_registers + [X.shape[1]])
    sl = tuple(slice(cut, d - cut) for _ in range(n_registers)) + (slice(None),)
    return T[sl].reshape(-1, X.shape[1])


def sequence_fidelity(state_lm1: np.ndarray, state_l: np.ndarray, l: int,
                      n_registers: int = 3) -> float:
    """Modulus of the overlap of truncation ``l-1`` and ``l`` states on their common block."""
    if l < 1:
        raise DomainError("sequence fidelity needs l >= 1")
    inner = embed_inner(state_l, l, l - 1, n_registers)
    return min(_overlap(state_lm1, inner), 1.0 + 1e-12)


@dataclass(frozen=True)
class FidelityRecord:
    kind: str
    l: int
    L: int | None
    g2: float
    representation: str
    value: float


@dataclass(frozen=True)
class FourierScan:
    l: int
    g2: float
    L_values: tuple[int, ...]
    fidelities: tuple[float, ...]

    @property
    def best(self) -> float:
        return max(self.fidelities)

    @property
    def argmax(self) -> tuple[int, ...]:
        """Every grid L attaining the maximum (to 1e-12)."""
        b = self.best
        return tuple(L for L, f in zip(self.L_values, self.fidelities) if f >= b - 1e-12)


def default_L_grid(l: int, span: int = 64) -> list[int]:
    return list(range(l + 1, l + span + 1))


def fourier_fidelity_point(l: int, g2: float, L: int, **kw) -> float:
    _, re = pure_gauge_ground_state("electric", l, g2, **kw)
    _, rb = pure_gauge_ground_state("magnetic", l, g2, L, **kw)
    return fourier_fidelity(re.ground_space, rb.ground_space, l, L)


def max_fourier_fidelity(l: int, g2: float, L_grid: Iterable[int] | None = None,
                         **kw) -> FourierScan:
    """Fourier fidelity over an L grid (``L > l``)."""
    Ls = tuple(sorted(L_grid if L_grid is not None else default_L_grid(l, 16)))
    if not Ls or Ls[0] <= l:
        raise DomainError("the L grid must be non-empty with every L > l")
    vals = tuple(fourier_fidelity_point(l, g2, L, **kw) for L in Ls)
    return FourierScan(l, g2, Ls, vals)


def sequence_fidelity_point(rep: str, l: int, g2: float, L: int | None = None, **kw) -> float:
    _, lo = pure_gauge_ground_state(rep, l - 1, g2, L, **kw)
    _, hi = pure_gauge_ground_state(rep, l, g2, L, **kw)
    return sequence_fidelity(lo.ground_space, hi.ground_space, l)


# --- optimal group resolution -------------------------------------------------

@dataclass(frozen=True)
class LOptPoint:
    """Result of the greedy ``L_opt`` search at one ``(l, g^2)``.

    ``detection`` is ``"minimum"`` (first local minimum of the sequence
    infidelity), ``"corner"`` (first sharp upward bend on a log scale),
    ``"start"`` (no kink: the curve rises from the first grid point) or
    ``"grid-end"`` (the infidelity still falls at the end of the grid).
    """

    l: int
    g2: float
    L_opt: int
    detection: str
    freezing: bool
    L_values: tuple[int, ...]
    infidelities: tuple[float, ...]
    vacuum_weight: float
    warning: str | None = None

    @property
    def inv_g2(self) -> float:
        return 1.0 / self.g2


@dataclass(frozen=True)
class LOptCurve:
    l: int
    points: tuple[LOptPoint, ...]

    def as_map(self) -> dict[float, int]:
        return {p.g2: p.L_opt for p in self.points}


def _kink_index(f: Sequence[float], corner: float, floor: float,
                min_rise: float = 0.0) -> tuple[int | None, str]:
    """First kink of an infidelity curve, scanning upward.

    A local minimum only counts when the following point rises by at least
    ``min_rise`` relative to it; flat plateaus with solver-level wiggles are
    skipped.
    """
    lf = np.log(np.maximum(np.asarray(f, dtype=float), floor))
    for i in range(1, len(f) - 1):
        if f[i] < f[i - 1] and f[i + 1] - f[i] >= min_rise * f[i]:
            return i, "minimum"
        if lf[i + 1] - 2 * lf[i] + lf[i - 1] >= corner:
            return i, "corner"
    return None, ""


def find_L_opt(
    l: int,
    g2: float,
    L_grid: Sequence[int] | None = None,
    corner: float = math.log(2.0),
    freeze_weight: float = 0.9,
    floor: float = 1e-14,
    lookahead: int = 2,
    min_rise: float = 1e-3,
    **kw,
) -> LOptPoint:
    """Greedy search for the kink of ``1 - F_s(l, L)`` over ascending ``L``.

    The grid is walked from its lowest value and the walk stops ``lookahead``
    points after the first kink: either a local minimum or a sharp convex
    bend of the logarithmic infidelity (second difference ``>= corner``).
    Minima followed by a relative rise below ``min_rise`` are ignored.
    Without a kink ``L_opt`` is the first grid point. That case is flagged
    as freezing when the ground state at ``L_opt`` keeps at least
    ``freeze_weight`` of its population in the ``r = 0`` bin.
    """
    if l < 1:
        raise DomainError("L_opt needs l >= 1")
    Ls = list(L_grid if L_grid is not None else default_L_grid(l))
    if not Ls or any(b <= a for a, b in zip(Ls, Ls[1:])) or Ls[0] < l:
        raise DomainError("L grid must be ascending and start at or above l")
    f: list[float] = []
    k, how = None, ""
    for L in Ls:
        f.append(1.0 - sequence_fidelity_point("magnetic", l, g2, L, **kw))
        if k is None:
            k, how = _kink_index(f, corner, floor, min_rise)
            if k is not None and len(f) < k + 1 + lookahead:
                # keep scanning a few points to make sure the kink is settled
                k, how = None, ""
        if k is not None and len(f) >= k + 1 + lookahead:
            break
    warning = None
    if k is None:
        if len(f) >= 2 and f[-1] < f[-2]:
            k, how = len(f) - 1, "grid-end"
            warning = "sequence infidelity still decreasing at the end of the L grid"
        else:
            k, how = 0, "start"
    L_opt = Ls[k]
    _, res = pure_gauge_ground_state("magnetic", l, g2, L_opt, **kw)
    d = 2 * l + 1
    v = _as_columns(res.ground_space)
    center = (d**3 - 1) // 2
    weight = float(np.sum(np.abs(v[center]) ** 2) / v.shape[1])
    freezing = how == "start" and weight >= freeze_weight
    return LOptPoint(l, g2, L_opt, how, freezing, tuple(Ls[: len(f)]), tuple(f), weight, warning)


def L_opt_curve(l: int, inv_g2_grid: Iterable[float], **kw) -> LOptCurve:
    return LOptCurve(l, tuple(find_L_opt(l, 1.0 / x, **kw) for x in inv_g2_grid))


# --- representation crossover -------------------------------------------------

@dataclass(frozen=True)
class GmResult:
    l: int
    g_m: float
    fidelity: float
    L_best: tuple[int, ...]
    inv_g2_grid: tuple[float, ...]
    max_fidelities: tuple[float, ...]
    warning: str | None = None

    def representation_for(self, g: float) -> str:
        """Electric for ``g >= g_m``, magnetic below."""
        return "electric" if g >= self.g_m else "magnetic"


def find_gm(l: int, inv_g2_grid: Sequence[float], L_grid: Iterable[int] | None = None,
            flat_tol: float = 1e-9, **kw) -> GmResult:
    """Grid maximization of the max-over-L Fourier fidelity over the coupling."""
    grid = tuple(float(x) for x in inv_g2_grid)
    if not grid:
        raise DomainError("empty coupling grid")
    Lg = list(L_grid) if L_grid is not None else None
    scans = [max_fourier_fidelity(l, 1.0 / x, Lg, **kw) for x in grid]
    vals = tuple(s.best for s in scans)
    i = int(np.argmax(vals))
    warning = None
    if len(grid) == 1:
        warning = "single-point coupling grid"
    elif max(vals) - min(vals) <= flat_tol:
        warning = "flat fidelity curve; g_m is ambiguous"
    if warning:
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return GmResult(l, 1.0 / math.sqrt(grid[i]), vals[i], scans[i].argmax, grid, vals, warning)


# --- truncation decomposition -------------------------------------------------

@dataclass(frozen=True)
class TruncationParts:
    """Cyclic lowering operator on ``[-L, L]`` split as ``P = P' + V'``."""

    l: int
    L: int
    P: sp.csr_matrix = field(repr=False)
    P_window: sp.csr_matrix = field(repr=False)
    V_remainder: sp.csr_matrix = field(repr=False)


def lowering_decomposition(l: int, L: int) -> TruncationParts:
    if l > L:
        raise DomainError(f"truncation l={l} exceeds resolution L={L}")
    P = lowering_matrix(L, cyclic=True)
    r = np.arange(-L, L + 1)
    inside = np.abs(r) <= l
    mask = sp.diags(inside.astype(float))
    Pw = sp.csr_matrix(mask @ P @ mask)
    Pw.eliminate_zeros()
    V = sp.csr_matrix(P - Pw)
    V.eliminate_zeros()
    return TruncationParts(l, L, P, Pw, V)


def _electric_dual(l: int, L: int, scheme: str) -> sp.csr_matrix:
    C, S = fourier_blocks(l, L, scheme)
    C, S = sp.csr_matrix(C), sp.csr_matrix(S)
    d = 2 * l + 1
    dims = [d] * 3
    return sp.csr_matrix(embed({0: C}, dims) + embed({1: C}, dims) + embed({2: C}, dims)
                         + 0.5 * (embed({0: S, 1: S}, dims) + embed({1: S, 2: S}, dims)))


def shell_populations(state: np.ndarray, l: int, n_registers: int = 3) -> dict[int, float]:
    """Population summed over shells of equal ``|r|^2``."""
    X = _as_columns(state)
    p = np.sum(np.abs(X) ** 2, axis=1) / X.shape[1]
    r = np.arange(-l, l + 1)
    grids = np.meshgrid(*([r] * n_registers), indexing="ij")
    r2 = sum(g.ravel() ** 2 for g in grids)
    out: dict[int, float] = {}
    for k, v in zip(r2, p):
        out[int(k)] = out.get(int(k), 0.0) + float(v)
    return dict(sorted(out.items()))


def cumulative_population(shells: dict[int, float], radius2: int) -> float:
    return float(sum(v for k, v in shells.items() if k <= radius2))


@dataclass(frozen=True)
class TruncationAnalysis:
    parts: TruncationParts
    variants: dict[str, dict[int, float]]
    energies: dict[str, float]
    dims: dict[str, int]

    def low_shell_population(self, variant: str, radius2: int) -> float:
        return cumulative_population(self.variants[variant], radius2)


TRUNCATION_VARIANTS = ("untruncated", "truncated", "window-band", "cyclic-removed")


def truncation_decomposition(l: int, L: int, tol: float = DEFAULT_TOL) -> TruncationAnalysis:
    """Ground states of the dual electric term (magnetic term neglected, ``g -> oo``).

    Variants:

    ``untruncated``
        full Z_{2L+1} on ``[-L, L]^3``;
    ``truncated``
        window ``[-l, l]^3`` with the projected cyclic powers (the scheme
        used by :func:`build_pure_gauge_magnetic`);
    ``window-band``
        window with powers of the band ``P'`` only, i.e. every ``V'``
        contribution removed;
    ``cyclic-removed``
        full ``[-L, L]^3`` with only the wrap term ``|L><-L|`` removed.
    """
    parts = lowering_decomposition(l, L)
    ops = {
        "untruncated": (_electric_dual(L, L, "projected"), L),
        "truncated": (_electric_dual(l, L, "projected"), l),
        "window-band": (_electric_dual(l, L, "band"), l),
        "cyclic-removed": (_electric_dual(L, L, "band"), L),
    }
    variants, energies, dims = {}, {}, {}
    for name, (H, lw) in ops.items():
        res = ground_state(H, tol=tol)
        variants[name] = shell_populations(res.ground_space, lw)
        energies[name] = res.ground_energy
        dims[name] = H.shape[0]
    return TruncationAnalysis(parts, variants, energies, dims)


# --- scans ------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    observable: str
    representation: str
    inv_g2: float
    l: int
    L: int | None
    value: float | None
    energy: float | None = None
    status: str = "ok"
    message: str = ""

    @property
    def key(self) -> tuple:
        return (self.observable, self.representation, self.inv_g2, self.l, self.L)

    def to_dict(self) -> dict:
        return asdict(self)


OBSERVABLES = ("plaquette", "energy", "fourier_fidelity", "sequence_fidelity")
SCAN_FIELDS = tuple(ScanRecord.__dataclass_fields__)


def _resolve_L(policy, l: int, g2: float, **kw) -> int | None:
    if policy is None:
        return None
    if policy == "opt":
        return find_L_opt(l, g2, **kw).L_opt
    if callable(policy):
        return int(policy(l, g2))
    return int(policy)


def _point(observable: str, rep: str, l: int, g2: float, L: int | None, tol: float):
    if observable in ("plaquette", "energy"):
        ham, res = pure_gauge_ground_state(rep, l, g2, L, tol=tol)
        if observable == "plaquette":
            return plaquette_expectation(res.ground_space, ham.H_B, ham.coupling), \
                res.ground_energy + ham.constant_shift
        e = res.ground_energy + ham.constant_shift
        return e, e
    if observable == "fourier_fidelity":
        return fourier_fidelity_point(l, g2, L, tol=tol), None
    if observable == "sequence_fidelity":
        return sequence_fidelity_point(rep, l, g2, L, tol=tol), None
    raise DomainError(f"unknown observable {observable!r}")


def scan(
    observable: str,
    inv_g2_grid: Iterable[float],
    l_grid: Iterable[int],
    representation: str = "electric",
    L_policy: int | str | Callable | Iterable[int] | None = None,
    tol: float = DEFAULT_TOL,
    done: Iterable[ScanRecord] = (),
    on_record: Callable[[ScanRecord], None] | None = None,
) -> list[ScanRecord]:
    """Evaluate an observable over ``g^-2 x l (x L)``.

    ``L_policy`` is ``None`` (electric), a fixed integer, an iterable of
    integers (an L axis), ``"opt"`` (``L_opt`` per point) or a callable
    ``(l, g2) -> L``. Records already present in ``done`` are reused, so an
    interrupted scan can be resumed. Per-point failures are recorded with
    ``status="error"`` and the scan continues.
    """
    if observable not in OBSERVABLES:
        raise DomainError(f"unknown observable {observable!r}")
    previous = {r.key: r for r in done}
    if isinstance(L_policy, (list, tuple, range)):
        L_axis = [int(L) for L in L_policy]
    else:
        L_axis = [L_policy]
    out = []
    for x in inv_g2_grid:
        g2 = 1.0 / float(x)
        for l in l_grid:
            for pol in L_axis:
                status, msg = "ok", ""
                try:
                    L = _resolve_L(pol, l, g2, tol=tol) if representation == "magnetic" \
                        or observable == "fourier_fidelity" else None
                except (ConvergenceError, DomainError) as err:
                    L, status, msg = None, "error", str(err)
                key = (observable, representation, float(x), int(l), L)
                if key in previous:
                    out.append(previous[key])
                    continue
                value = energy = None
                if status == "ok":
                    try:
                        value, energy = _point(observable, representation, l, g2, L, tol)
                    except (ConvergenceError, DomainError) as err:
                        status, msg = "error", str(err)
                rec = ScanRecord(observable, representation, float(x), int(l), L,
                                 value, energy, status, msg)
                out.append(rec)
                if on_record is not None:
                    on_record(rec)
    return out


# --- resource comparison ------------------------------------------------------

@dataclass(frozen=True)
class ResourceRow:
    strategy: str
    l: int | None
    L: int | None
    states: int | None
    value: float | None
    deviation: float | None
    trace: tuple[tuple[int, int | None, float], ...] = ()


@dataclass(frozen=True)
class ResourceTable:
    inv_g2: float
    reference: float
    reference_l: int
    reference_L: int | None
    accuracy: float
    rows: tuple[ResourceRow, ...]

    def row(self, strategy: str) -> ResourceRow:
        for r in self.rows:
            if r.strategy == strategy:
                return r
        raise KeyError(strategy)


def resource_comparison(
    inv_g2: float,
    reference_l: int = 10,
    accuracy: float = 0.01,
    l_max: int | None = None,
    fixed_L: Sequence[int | str] = (),
    tol: float = DEFAULT_TOL,
) -> ResourceTable:
    """Basis states each strategy needs to get within ``accuracy`` of the reference ``<P>``.

    The reference is computed at truncation ``reference_l`` in the
    representation preferred at this coupling (magnetic with ``L_opt`` for
    ``g^-2 >= 1``, electric otherwise). Strategies:

    ``electric``      truncated U(1), growing ``l``;
    ``fixed-group``   Z_{2L+1} kept whole (``l = L``), growing ``L``;
    ``fixed-L=<L>``   Z_{2L+1} with ``L`` fixed, growing ``l <= L``; the entry
                      ``"reference"`` fixes ``L`` to the resolution of the
                      reference run (the group is chosen once, only ``l``
                      is reduced);
    ``scaled-L``      ``L = L_opt(l, g)``, growing ``l``.

    The first ``l`` meeting the accuracy is reported (``None`` if none up
    to ``l_max``, default ``reference_l``).
    """
    g2 = 1.0 / inv_g2
    l_max = reference_l if l_max is None else l_max
    if inv_g2 >= 1.0:
        ref_L = find_L_opt(reference_l, g2, tol=tol).L_opt
        ref = pure_gauge_plaquette("magnetic", reference_l, g2, ref_L, tol=tol)
    else:
        ref_L = None
        ref = pure_gauge_plaquette("electric", reference_l, g2, tol=tol)

    def first_hit(name: str, value_at: Callable[[int], tuple[int | None, float]],
                  ls: Iterable[int]) -> ResourceRow:
        trace = []
        for l in ls:
            L, v = value_at(l)
            trace.append((l, L, v))
            dev = abs(v - ref) / abs(ref)
            if dev <= accuracy:
                return ResourceRow(name, l, L, (2 * l + 1) ** 3, v, dev, tuple(trace))
        return ResourceRow(name, None, None, None, None, None, tuple(trace))

    rows = [
        first_hit("electric", lambda l: (None, pure_gauge_plaquette("electric", l, g2, tol=tol)),
                  range(1, l_max + 1)),
        first_hit("fixed-group",
                  lambda l: (l, pure_gauge_plaquette("magnetic", l, g2, l, tol=tol)),
                  range(1, l_max + 1)),
    ]
    for L in fixed_L:
        if L == "reference":
            if ref_L is None:
                continue
            L = ref_L
        L = int(L)
        rows.append(first_hit(
            f"fixed-L={L}",
            lambda l, L=L: (L, pure_gauge_plaquette("magnetic", l, g2, L, tol=tol)),
            range(1, min(l_max, L) + 1)))

    def scaled(l: int) -> tuple[int, float]:
        L = find_L_opt(l, g2, tol=tol).L_opt
        return L, pure_gauge_plaquette("magnetic", l, g2, L, tol=tol)

    rows.append(first_hit("scaled-L", scaled, range(1, l_max + 1)))
    return ResourceTable(inv_g2, ref, reference_l, ref_L, accuracy, tuple(rows))


# --- plaquette with matter ------------------------------------------------------

@dataclass(frozen=True)
class MatterPoint:
    l: int
    L: int
    g2: float
    m: float
    kappa: float
    representation: str
    plaquette: float
    energy: float
    sector_dim: int
    matvecs: int


def charge_sector(Q, charge: int = 0) -> np.ndarray:
    """Basis indices of a diagonal total-charge operator with the given eigenvalue."""
    q = np.asarray(Q.diagonal()).real
    return np.flatnonzero(np.abs(q - charge) < 0.5)


def matter_plaquette_point(
    l: int, g2: float, L: int, m: float, kappa: float,
    representation: str = "magnetic", charge: int = 0, tol: float = 1e-9,
    max_dim: int | None = None,
) -> MatterPoint:
    """``<P>`` of the plaquette with staggered fermions, in one total-charge sector."""
    from compactqed.matter import build_matter_system, total_charge

    group = GroupParams(l, max(L, l))
    coupling = CouplingParams(g2, 1.0, m, kappa)
    ham = build_matter_system(representation, group, coupling, max_dim=max_dim)
    idx = charge_sector(total_charge(l), charge)
    if idx.size == 0:
        raise DomainError(f"empty charge sector {charge}")
    H = sp.csr_matrix(ham.total)[idx][:, idx]
    H_B = sp.csr_matrix(ham.H_B)[idx][:, idx]
    res = ground_state(H, tol=tol)
    value = plaquette_expectation(res.ground_space, H_B, coupling)
    return MatterPoint(l, group.L, g2, m, kappa, representation, value,
                       res.ground_energy + ham.constant_shift, idx.size, res.matvecs)
