"""Closed-system tight-binding Hamiltonians on a periodic ring.

Three quasiperiodic models are supported:

* ``mosaic`` -- the cosine potential sits only on every ``kappa``-th site,
* ``aah``    -- Aubry-Andre-Harper, the cosine potential on every site,
* ``gaah``   -- generalized AAH with potential ``D cos(x) / (1 - a cos(x))``.

Sites are labelled ``1..N`` in every public function; the returned matrices
are ordinary 0-indexed numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

GOLDEN_BETA = (math.sqrt(5.0) - 1.0) / 2.0
KINDS = ("mosaic", "aah", "gaah")


def fibonacci_beta(m: int) -> float:
    """Rational approximant ``F_{m-1} / F_m`` of the inverse golden ratio.

    ``F_1 = F_2 = 1``; e.g. ``m = 15`` gives ``377/610``.
    """
    if m < 2:
        raise DomainError(f"Fibonacci index must be >= 2, got {m}")
    prev, cur = 1, 1
    for _ in range(m - 2):
        prev, cur = cur, prev + cur
    return prev / cur


@dataclass(frozen=True)
class ModelSpec:
    """Full description of one lattice instance.

    Parameters
    ----------
    kind : {"mosaic", "aah", "gaah"}
    N : int
        Number of sites (periodic ring).
    delta : float
        Quasidisorder strength.
    phi : float
        Phase offset of the cosine potential.
    kappa : int
        Unit-cell size of the mosaic model; ignored otherwise.
    a : float
        GAAH deformation parameter in (-1, 1); ignored otherwise.
    hopping : float
        Nearest-neighbour hopping ``lambda``.
    beta : float
        Incommensuration ratio.
    """

    kind: str = "mosaic"
    N: int = 12
    delta: float = 2.0
    phi: float = 0.0
    kappa: int = 1
    a: float = 0.0
    hopping: float = 1.0
    beta: float = GOLDEN_BETA
    boundary: str = field(default="periodic")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N}")
        if self.boundary != "periodic":
            raise DomainError("only periodic boundary conditions are supported")
        if self.kind == "mosaic" and not (1 <= self.kappa <= self.N):
            raise DomainError(f"kappa must satisfy 1 <= kappa <= N, got {self.kappa}")
        if self.kind == "gaah" and not (-1.0 < self.a < 1.0):
            raise DomainError(f"GAAH parameter a must lie in (-1, 1), got {self.a}")

    @classmethod
    def mosaic(cls, kappa: int, N: int, delta: float, phi: float = 0.0, **kw) -> "ModelSpec":
        return cls(kind="mosaic", kappa=kappa, N=N, delta=delta, phi=phi, **kw)

    @classmethod
    def aah(cls, N: int, delta: float, phi: float = 0.0, **kw) -> "ModelSpec":
        return cls(kind="aah", N=N, delta=delta, phi=phi, **kw)

    @classmethod
    def gaah(cls, a: float, N: int, delta: float, phi: float = 0.0, **kw) -> "ModelSpec":
        return cls(kind="gaah", a=a, N=N, delta=delta, phi=phi, **kw)

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def label(self) -> str:
        if self.kind == "mosaic":
            return f"mosaic(kappa={self.kappa})"
        if self.kind == "gaah":
            return f"gaah(a={self.a:g})"
        return "aah"


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Real symmetric ``N x N`` single-particle Hamiltonian plus its spec."""

    entries: np.ndarray
    spec: ModelSpec

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def onsite_potential(spec: ModelSpec, n: int) -> float:
    """On-site energy of site ``n`` (1-based)."""
    if not 1 <= n <= spec.N:
        raise IndexError(f"site index {n} outside 1..{spec.N}")
    x = 2.0 * math.pi * spec.beta * n + spec.phi
    if spec.kind == "gaah":
        if not -1.0 < spec.a < 1.0:
            raise DomainError(f"GAAH parameter a must lie in (-1, 1), got {spec.a}")
        return spec.delta * math.cos(x) / (1.0 - spec.a * math.cos(x))
    if spec.kind == "mosaic" and n % spec.kappa != 0:
        return 0.0
    return spec.delta * math.cos(x)


def build_hamiltonian(spec: ModelSpec) -> HamiltonianMatrix:
    """Assemble the periodic-ring Hamiltonian of ``spec``.

    Bonds are accumulated as in the operator sum over ``n = 1..N`` with
    ``c_{N+1} = c_1``, so for ``N = 2`` the single bond carries ``2 * hopping``.
    """
    N = spec.N
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    h = np.zeros((N, N))
    for n in range(1, N + 1):
        h[n - 1, n - 1] = onsite_potential(spec, n)
    for i in range(N):
        j = (i + 1) % N
        h[i, j] += spec.hopping
        h[j, i] += spec.hopping
    h.setflags(write=False)
    return HamiltonianMatrix(h, spec)


def periodic_state(pattern, N: int) -> np.ndarray:
    """Tile ``pattern`` over ``N`` sites and normalize.

    Used for the dissipation-free periodic eigenstates, e.g. ``[1, 0, -1, 0]``
    for the ``kappa = 2`` zero-energy state.
    """
    pattern = np.asarray(pattern, dtype=float)
    if N % len(pattern):
        raise DomainError(f"pattern of length {len(pattern)} does not tile N={N}")
    v = np.tile(pattern, N // len(pattern))
    return v / np.linalg.norm(v)
