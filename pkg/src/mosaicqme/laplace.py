"""Laplace-domain solution: dynamical poles, residues and reconstruction.

With the Lorentzian spectral density on the full frequency line the bath
self-energy is a single simple pole,

    Sigma(z) = pi * eta * omega_c / (z + i omega_c),

so the pole condition ``det[z - H_s - Sigma(z) u u^T] = 0`` (``u`` the uniform
coupling vector) is a polynomial of degree ``N + 1``.  It is linearized exactly
by appending one lossy pseudomode to the lattice:

    M = [[H_s,     g u ],
         [g u^T, -i w_c]],      g = sqrt(pi eta w_c).

The eigenvalues of ``M`` are the poles ``z_i`` and its (complex-symmetric)
eigenvectors give the residues ``c_{n,i}`` of

    alpha_n(t) = sum_i c_{n,i} exp(-i z_i t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, IllConditionedError, NumericalError
from .lattice import HamiltonianMatrix, build_hamiltonian
from .localization import EigenSystem, eigendecompose
from .trajectory import Trajectory, time_grid

log = logging.getLogger(__name__)

DEFAULT_TOL_STEADY = 1e-10
_DEGENERATE_SEP = 1e-8


@dataclass(frozen=True)
class SpectralDensityParams:
    """Lorentzian bath ``J(w) = eta w_c^2 / (w^2 + w_c^2)``.

    ``eta = 0`` is accepted and describes the closed (decoupled) lattice.
    """

    eta: float = 0.1
    omega_c: float = 1.0

    def __post_init__(self):
        if not self.eta >= 0:
            raise DomainError(f"eta must be >= 0, got {self.eta}")
        if not self.omega_c > 0:
            raise DomainError(f"omega_c must be > 0, got {self.omega_c}")

    @property
    def coupling(self) -> float:
        """Pseudomode coupling ``g = sqrt(pi eta w_c)``."""
        return float(np.sqrt(np.pi * self.eta * self.omega_c))


def spectral_density(omega, params: SpectralDensityParams):
    w = np.asarray(omega, dtype=float)
    return params.eta * params.omega_c**2 / (w * w + params.omega_c**2)


def self_energy(z: complex, params: SpectralDensityParams) -> complex:
    """Retarded bath self-energy ``pi eta w_c / (z + i w_c)``."""
    den = z + 1j * params.omega_c
    if den == 0:
        raise DomainError("self-energy is singular at z = -i omega_c")
    return np.pi * params.eta * params.omega_c / den


@dataclass(frozen=True)
class AugmentedGenerator:
    matrix: np.ndarray
    g: float
    params: SpectralDensityParams
    spec: object = None

    @property
    def N(self) -> int:
        return self.matrix.shape[0] - 1


def build_augmented(H: HamiltonianMatrix | np.ndarray, params: SpectralDensityParams) -> AugmentedGenerator:
    h = np.asarray(H, dtype=float)
    N = h.shape[0]
    g = params.coupling
    m = np.zeros((N + 1, N + 1), dtype=complex)
    m[:N, :N] = h
    m[:N, N] = g
    m[N, :N] = g
    m[N, N] = -1j * params.omega_c
    m.setflags(write=False)
    return AugmentedGenerator(m, g, params, getattr(H, "spec", None))


@dataclass(frozen=True)
class PoleDecomposition:
    """Poles of ``A_n(p)`` (in the ``z = i p`` variable) and, optionally, residues.

    Attributes
    ----------
    poles : (N+1,) complex, sorted by descending real part
    vectors : (N+1, N+1) complex right eigenvectors of the augmented matrix,
        column ``i`` belonging to ``poles[i]``
    aux_weight : fraction of each eigenvector's weight on the pseudomode slot
    steady, pseudomode : boolean flags per pole
    degenerate_pairs : index pairs of poles closer than 1e-8
    residues : (N, N+1) table ``c_{n,i}`` for ``alpha0``, or None
    """

    poles: np.ndarray
    vectors: np.ndarray
    aux_weight: np.ndarray
    steady: np.ndarray
    pseudomode: np.ndarray
    degenerate_pairs: list = field(default_factory=list)
    newton_residual: float = 0.0
    params: SpectralDensityParams | None = None
    alpha0: np.ndarray | None = None
    residues: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.poles.size - 1

    def steady_indices(self) -> np.ndarray:
        return np.flatnonzero(self.steady)

    def pseudomode_index(self) -> int:
        return int(np.flatnonzero(self.pseudomode)[0])


def _reduced_pole_function(z, values, weights, g2, wc):
    """``D(z) / prod_j (z - E_j)`` and its derivative."""
    d = z - values
    f = z + 1j * wc - g2 * np.sum(weights / d)
    df = 1.0 + g2 * np.sum(weights / (d * d))
    return f, df


def pole_function(z: complex, es: EigenSystem, params: SpectralDensityParams) -> complex:
    """Degree-``N+1`` pole polynomial ``D(z)`` in eigenbasis product form.

    ``D(z) = (z + i w_c) prod_j (z - E_j) - pi eta w_c sum_j w_j prod_{k!=j} (z - E_k)``
    with ``w_j = (u^T v_j)^2``.
    """
    E = es.values
    w = es.uniform_overlaps() ** 2
    d = z - E
    total = (z + 1j * params.omega_c) * np.prod(d)
    g2 = np.pi * params.eta * params.omega_c
    for j in range(E.size):
        total -= g2 * w[j] * np.prod(np.delete(d, j))
    return complex(total)


def _scaled_residual(z, E, w, g2, wc) -> float:
    d = z - E
    f = z + 1j * wc - g2 * np.sum(w / np.where(d == 0, np.inf, d))
    # relative to the magnitude of the individual products in D(z)
    scale = np.prod(np.abs(z) + np.abs(E) + 1.0) * (abs(z) + wc + 1.0)
    return float(abs(f) * np.prod(np.abs(d)) / scale)


def _newton_refine(z0, E, w, g2, wc, max_iter=50):
    z = z0
    f0, _ = _reduced_pole_function(z0, E, w, g2, wc)
    for _ in range(max_iter):
        f, df = _reduced_pole_function(z, E, w, g2, wc)
        if not np.isfinite(f) or df == 0:
            return z0
        step = f / df
        z = z - step
        if abs(step) <= 1e-15 * (1.0 + abs(z)):
            break
    f1, _ = _reduced_pole_function(z, E, w, g2, wc)
    # never trade the eigenvalue seed for a different root
    if abs(z - z0) > 1e-6 * (1.0 + abs(z0)) or not abs(f1) <= abs(f0):
        return z0
    return z


def sort_poles(z: np.ndarray) -> np.ndarray:
    """Indices ordering poles by descending real part (ties: descending imag)."""
    return np.lexsort((-z.imag, -z.real))


def classify_steady(decomp: PoleDecomposition, tol_steady: float = DEFAULT_TOL_STEADY):
    """Steady flags ``|Im z| < tol_steady`` and the pseudomode flag."""
    if tol_steady <= 0:
        raise DomainError("tol_steady must be positive")
    steady = np.abs(decomp.poles.imag) < tol_steady
    pseudo = np.zeros(decomp.poles.size, dtype=bool)
    pseudo[int(np.argmax(decomp.aux_weight))] = True
    return steady, pseudo


def find_poles(aug: AugmentedGenerator, es: EigenSystem | None = None,
               tol_steady: float = DEFAULT_TOL_STEADY) -> PoleDecomposition:
    """All ``N + 1`` poles from the augmented eigenproblem, Newton polished on ``D(z)``."""
    m = aug.matrix
    N = aug.N
    try:
        z, V = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"augmented eigensolve failed for N={N}: {exc}") from exc
    if not np.all(np.isfinite(z)):
        raise NumericalError(f"non-finite poles for N={N}")

    if es is None:
        es = eigendecompose(np.real(m[:N, :N]))
    E = es.values
    w = es.uniform_overlaps() ** 2
    g2 = aug.g**2
    wc = aug.params.omega_c
    if g2 > 0:
        z = np.array([_newton_refine(zi, E, w, g2, wc) for zi in z])
    residual = max(_scaled_residual(zi, E, w, g2, wc) for zi in z) if g2 > 0 else 0.0

    order = sort_poles(z)
    z, V = z[order], V[:, order]
    aux = np.abs(V[N, :]) ** 2 / np.sum(np.abs(V) ** 2, axis=0)

    pairs = []
    for i in range(z.size):
        for k in range(i + 1, z.size):
            if abs(z[i] - z[k]) < _DEGENERATE_SEP:
                pairs.append((i, k))
    if pairs:
        log.info("near-degenerate poles at %s", pairs)

    decomp = PoleDecomposition(z, V, aux, np.zeros(z.size, bool), np.zeros(z.size, bool),
                               pairs, residual, aug.params)
    steady, pseudo = classify_steady(decomp, tol_steady)
    return replace(decomp, steady=steady, pseudomode=pseudo)


def _bilinear_normalized(V: np.ndarray, pairs) -> np.ndarray:
    """Columns made orthogonal under ``x^T y`` inside degenerate clusters."""
    V = V.copy()
    clusters: dict[int, set] = {}
    for i, k in pairs:
        root = clusters.get(i, {i}) | clusters.get(k, {k})
        for m in root:
            clusters[m] = root
    seen = set()
    for members in clusters.values():
        key = min(members)
        if key in seen:
            continue
        seen.add(key)
        idx = sorted(members)
        for a, i in enumerate(idx):
            for k in idx[:a]:
                V[:, i] -= (V[:, k] @ V[:, i]) / (V[:, k] @ V[:, k]) * V[:, k]
    return V


def residues(decomp: PoleDecomposition, alpha0) -> np.ndarray:
    """Residue table ``c_{n,i}`` for initial lattice amplitudes ``alpha0``.

    ``c_{n,i} = (V_i)_n (V_i^T psi0) / (V_i^T V_i)`` with ``psi0 = [alpha0; 0]``.
    """
    a0 = np.asarray(alpha0, dtype=complex)
    N = decomp.N
    if a0.shape != (N,):
        raise DomainError(f"alpha0 must have shape ({N},), got {a0.shape}")
    if abs(np.vdot(a0, a0).real - 1.0) > 1e-10:
        raise DomainError("alpha0 must be normalized")
    V = decomp.vectors
    if decomp.degenerate_pairs:
        V = _bilinear_normalized(V, decomp.degenerate_pairs)
    psi0 = np.append(a0, 0.0)
    norms = np.einsum("ni,ni->i", V, V)
    scale = np.sum(np.abs(V) ** 2, axis=0)
    bad = np.abs(norms) < 1e-10 * scale
    if np.any(bad):
        raise IllConditionedError(
            f"near-defective eigenvectors at poles {decomp.poles[bad]}; use direct integration")
    proj = (V.T @ psi0) / norms
    return V[:N, :] * proj[None, :]


def decompose(aug: AugmentedGenerator, alpha0, es: EigenSystem | None = None,
              tol_steady: float = DEFAULT_TOL_STEADY) -> PoleDecomposition:
    """Poles plus the residue table for one initial state."""
    d = find_poles(aug, es, tol_steady)
    c = residues(d, alpha0)
    return replace(d, alpha0=np.asarray(alpha0, dtype=complex), residues=c)


def with_initial_state(decomp: PoleDecomposition, alpha0) -> PoleDecomposition:
    return replace(decomp, alpha0=np.asarray(alpha0, dtype=complex), residues=residues(decomp, alpha0))


def reconstruct_amplitudes(decomp: PoleDecomposition, t):
    """``alpha(t) = sum_i c_{.,i} exp(-i z_i t)``; array ``t`` gives shape (len(t), N)."""
    if decomp.residues is None:
        raise DomainError("decomposition carries no residues; call decompose() first")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("reconstruction is defined for t >= 0 only")
    phase = np.exp(-1j * np.multiply.outer(t_arr, decomp.poles))
    return phase @ decomp.residues.T


def reconstruct_trajectory(decomp: PoleDecomposition, T: float, h: float,
                           decimation: int = 1, label: str = "") -> Trajectory:
    _, times = time_grid(T, h, decimation)
    return Trajectory(times, reconstruct_amplitudes(decomp, times), "residue_reconstruction", label)


def overlap_matrix(es: EigenSystem, params: SpectralDensityParams,
                   H: HamiltonianMatrix | np.ndarray | None = None) -> np.ndarray:
    """``O[j, i] = |sum_n v_j(n)^* c_{n,i}|^2`` with ``alpha0 = v_j``.

    No normalization: entries may exceed one.
    """
    if H is None:
        if es.spec is None:
            raise DomainError("need either H or an EigenSystem carrying its ModelSpec")
        H = build_hamiltonian(es.spec)
    decomp = find_poles(build_augmented(H, params), es)
    O = np.empty((es.N, es.N + 1))
    for j in range(es.N):
        v = es.vectors[:, j]
        c = residues(decomp, v)
        O[j] = np.abs(v.conj() @ c) ** 2
    return O


def pole_polynomial(es: EigenSystem, params: SpectralDensityParams) -> np.ndarray:
    """Power-basis coefficients (lowest first) of ``D(z)``."""
    E = es.values
    w = es.uniform_overlaps() ** 2
    g2 = np.pi * params.eta * params.omega_c
    coef = P.polymul(P.polyfromroots(E), [1j * params.omega_c, 1.0]).astype(complex)
    for j in range(E.size):
        coef[: E.size] -= g2 * w[j] * P.polyfromroots(np.delete(E, j))
    return coef


def poles_via_polynomial(es: EigenSystem, params: SpectralDensityParams, polish: int = 8) -> np.ndarray:
    """Independent pole route: companion-matrix roots of ``D(z)``, Newton polished."""
    coef = pole_polynomial(es, params)
    dcoef = P.polyder(coef)
    z = P.polyroots(coef)
    for _ in range(polish):
        f = P.polyval(z, coef)
        df = P.polyval(z, dcoef)
        ok = df != 0
        z = np.where(ok, z - np.where(ok, f / np.where(ok, df, 1), 0), z)
    return z[sort_poles(z)]
