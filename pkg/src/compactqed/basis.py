"""Parameter types and mixed-radix basis bookkeeping.

Every gauge register (rotator or string) carries integer flux values in
``[-l, l]``. Multi-register states are ordered mixed-radix with the first
register most significant, which is the ordering produced by
``numpy.kron``/``scipy.sparse.kron`` when operators are composed left to
right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from compactqed.exceptions import DomainError


@dataclass(frozen=True)
class GroupParams:
    """Truncation ``l`` and Z_{2L+1} resolution ``L`` (``l <= L``)."""

    l: int
    L: int

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 0:
            raise DomainError(f"truncation l must be a nonnegative integer, got {self.l}")
        if int(self.L) != self.L or self.L < 1:
            raise DomainError(f"resolution L must be a positive integer, got {self.L}")
        if self.l > self.L:
            raise DomainError(f"truncation l={self.l} exceeds resolution L={self.L}")

    @property
    def local_dim(self) -> int:
        return 2 * self.l + 1

    @property
    def group_order(self) -> int:
        return 2 * self.L + 1


@dataclass(frozen=True)
class CouplingParams:
    """Bare coupling squared, lattice spacing, fermion mass and hopping."""

    g2: float
    a: float = 1.0
    m: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not self.g2 > 0:
            raise DomainError(f"g2 must be positive, got {self.g2}")
        if not self.a > 0:
            raise DomainError(f"lattice spacing must be positive, got {self.a}")

    @classmethod
    def from_inverse_g2(cls, inv_g2: float, **kwargs) -> "CouplingParams":
        """Build from ``beta = 1/g^2``, the axis used in coupling scans."""
        return cls(g2=1.0 / inv_g2, **kwargs)

    @property
    def beta(self) -> float:
        return 1.0 / self.g2


@dataclass(frozen=True)
class RotatorBasis:
    """Product basis of ``n_rotators`` registers with values in ``[-l, l]``."""

    n_rotators: int
    l: int

    def __post_init__(self):
        if self.n_rotators < 1:
            raise DomainError("need at least one register")
        if self.l < 0:
            raise DomainError("truncation must be nonnegative")

    @property
    def local_dim(self) -> int:
        return 2 * self.l + 1

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_rotators

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.local_dim,) * self.n_rotators

    def values(self) -> np.ndarray:
        """Integer flux values of one register, ascending."""
        return np.arange(-self.l, self.l + 1)

    def grid(self) -> np.ndarray:
        """All basis vectors, shape ``(dim, n_rotators)``, in index order."""
        axes = np.meshgrid(*([self.values()] * self.n_rotators), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)


@dataclass(frozen=True)
class MatterBasis:
    """Four staggered fermion sites, three rotators and two strings.

    Factor order: the four occupation bits in Jordan-Wigner order
    (0,0), (0,1), (1,1), (1,0), then R1, R2, R3, Rx, Ry.
    """

    l: int
    n_sites: int = 4
    n_rotators: int = 3
    n_strings: int = 2

    @property
    def gauge(self) -> RotatorBasis:
        return RotatorBasis(self.n_rotators + self.n_strings, self.l)

    @property
    def dim(self) -> int:
        return 2**self.n_sites * self.gauge.dim

    @property
    def dims(self) -> list[int]:
        return [2] * self.n_sites + [2 * self.l + 1] * (self.n_rotators + self.n_strings)


def index_of(r_vec, basis: RotatorBasis) -> int:
    """Linear index of the flux configuration ``r_vec``."""
    r = np.asarray(r_vec)
    if r.shape != (basis.n_rotators,):
        raise DomainError(f"expected {basis.n_rotators} components, got shape {r.shape}")
    if np.any(np.abs(r) > basis.l):
        raise DomainError(f"component outside [-{basis.l}, {basis.l}]: {tuple(r)}")
    return int(np.ravel_multi_index(tuple(r + basis.l), basis.shape))


def vector_of(i: int, basis: RotatorBasis) -> tuple[int, ...]:
    """Inverse of :func:`index_of`."""
    if not 0 <= i < basis.dim:
        raise DomainError(f"index {i} outside [0, {basis.dim})")
    return tuple(int(k) - basis.l for k in np.unravel_index(i, basis.shape))
