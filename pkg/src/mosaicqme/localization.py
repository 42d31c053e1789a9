"""Spectrum, inverse participation ratio and mobility edges of the closed lattice."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError
from .lattice import HamiltonianMatrix, ModelSpec, build_hamiltonian

# Roots with a larger imaginary part than this are not considered real.  Kept
# loose enough to capture tangential (double) roots, which the companion
# eigensolver splits into conjugate pairs of size ~sqrt(eps).
_REAL_ROOT_TOL = 1e-6
_DEDUP_TOL = 1e-7


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of ``H`` with eigenvalues in descending order.

    ``vectors[:, j]`` is the eigenvector for ``values[j]``.
    """

    values: np.ndarray
    vectors: np.ndarray
    spec: ModelSpec | None = None

    @property
    def N(self) -> int:
        return self.values.size

    def uniform_overlaps(self) -> np.ndarray:
        """``u^T v_j`` with ``u = (1, ..., 1)``."""
        return self.vectors.sum(axis=0)


@dataclass(frozen=True)
class MobilityEdgeReport:
    edges: list[float]
    asymptotic_edges: list[float]
    kappa: int
    delta: float


def eigendecompose(H: HamiltonianMatrix | np.ndarray) -> EigenSystem:
    """Dense symmetric eigendecomposition, sorted descending.

    Each eigenvector is signed so that its first component with magnitude
    above ``1e-12`` is positive.
    """
    spec = getattr(H, "spec", None)
    h = np.asarray(H, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise DomainError("Hamiltonian is not symmetric")
    w, v = np.linalg.eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for j in range(v.shape[1]):
        nz = np.flatnonzero(np.abs(v[:, j]) > 1e-12)
        if nz.size and v[nz[0], j] < 0:
            v[:, j] *= -1.0
    return EigenSystem(w, v, spec)


def ipr(amplitudes) -> float:
    """Inverse participation ratio ``sum_n |alpha_n|^4``.

    No renormalization is applied: a decaying state has an IPR that decays
    with it.
    """
    a = np.asarray(amplitudes)
    if a.size == 0:
        raise DomainError("IPR of an empty vector is undefined")
    p = np.abs(a) ** 2
    return float(np.sum(p * p))


def chebyshev_a(kappa: int, E):
    """Mobility-edge function ``a_kappa(E)`` via its three-term recurrence.

    ``a_1 = 1``, ``a_2 = E``, ``a_{k+1} = E a_k - a_{k-1}``.  This is the
    analytic continuation of the surd form through ``|E| < 2``.
    """
    if kappa < 1:
        raise DomainError(f"kappa must be >= 1, got {kappa}")
    E = np.asarray(E)
    prev, cur = np.zeros_like(E, dtype=np.result_type(E, float)), np.ones_like(E, dtype=np.result_type(E, float))
    for _ in range(kappa - 1):
        prev, cur = cur, E * cur - prev
    return cur if cur.ndim else cur.item()


def chebyshev_a_surd(kappa: int, E: float) -> float:
    """Closed surd form of ``a_kappa(E)``; only defined for ``|E| > 2``."""
    if abs(E) <= 2.0:
        raise DomainError("surd form of a_kappa is singular for |E| <= 2")
    s = math.sqrt(E * E - 4.0)
    return (((E + s) / 2.0) ** kappa - ((E - s) / 2.0) ** kappa) / s


def _chebyshev_derivative(kappa: int, E: float) -> float:
    prev, cur = 0.0, 1.0
    dprev, dcur = 0.0, 0.0
    for _ in range(kappa - 1):
        prev, cur, dprev, dcur = cur, E * cur - prev, dcur, cur + E * dcur - dprev
    return dcur


def chebyshev_coefficients(kappa: int) -> np.ndarray:
    """Power-basis coefficients (lowest degree first) of ``a_kappa``."""
    if kappa < 1:
        raise DomainError(f"kappa must be >= 1, got {kappa}")
    prev, cur = np.array([0.0]), np.array([1.0])
    for _ in range(kappa - 1):
        prev, cur = cur, P.polysub(P.polymulx(cur), prev)
    return P.polytrim(cur)


def _real_roots(kappa: int, shift: float) -> list[float]:
    """Real solutions of ``a_kappa(E) = shift``, Newton polished and deduplicated."""
    coef = P.polysub(chebyshev_coefficients(kappa), [shift])
    coef = P.polytrim(coef, tol=0.0)
    if coef.size < 2:
        return []
    roots = P.polyroots(coef)
    cand = sorted(r.real for r in roots if abs(r.imag) < _REAL_ROOT_TOL)
    out: list[float] = []
    for x in cand:
        for _ in range(60):
            f = chebyshev_a(kappa, x) - shift
            df = _chebyshev_derivative(kappa, x)
            if f == 0.0 or df == 0.0:
                break
            step = f / df
            x -= step
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        if not out or abs(x - out[-1]) > _DEDUP_TOL:
            out.append(float(x) + 0.0)  # no signed zero
    return out


def asymptotic_edges(kappa: int) -> list[float]:
    """Large-disorder mobility edges: real roots of ``a_kappa(E) = 0``, descending."""
    return sorted(_real_roots(kappa, 0.0), reverse=True)


def mobility_edges(kappa: int, delta: float) -> MobilityEdgeReport:
    """Mobility edges of the mosaic model, ``|delta * a_kappa(E) / 2| = 1``."""
    if delta == 0:
        raise DomainError("mobility edges require nonzero disorder strength")
    level = 2.0 / abs(delta)
    edges = _real_roots(kappa, level) + _real_roots(kappa, -level)
    edges = sorted(set(edges), reverse=True)
    dedup: list[float] = []
    for e in edges:
        if not dedup or abs(e - dedup[-1]) > _DEDUP_TOL:
            dedup.append(e)
    return MobilityEdgeReport(dedup, asymptotic_edges(kappa), kappa, float(delta))


def gaah_mobility_edge(a: float, hopping: float, delta: float) -> float:
    """Exact mobility edge of the generalized AAH model."""
    if a == 0:
        raise DomainError("the GAAH model has no finite mobility edge at a = 0")
    return float(np.sign(hopping)) * (2.0 * abs(hopping) - abs(delta)) / a


def ipr_spectrum(spec: ModelSpec) -> list[tuple[float, float]]:
    """``(E_j, IPR_j)`` for every eigenlevel, descending in energy."""
    es = eigendecompose(build_hamiltonian(spec))
    iprs = np.sum(es.vectors ** 4, axis=0)
    return [(float(e), float(i)) for e, i in zip(es.values, iprs)]


def model_edges(spec: ModelSpec) -> dict:
    """Mobility-edge summary appropriate to the model kind (for manifests)."""
    if spec.kind == "gaah":
        edges = [] if spec.a == 0 else [gaah_mobility_edge(spec.a, spec.hopping, spec.delta)]
        return {"kind": "gaah", "a": spec.a, "delta": spec.delta, "edges": edges, "asymptotic_edges": []}
    kappa = 1 if spec.kind == "aah" else spec.kappa
    if spec.delta == 0:
        return {"kind": spec.kind, "kappa": kappa, "delta": 0.0, "edges": [],
                "asymptotic_edges": asymptotic_edges(kappa)}
    rep = mobility_edges(kappa, spec.delta)
    return {"kind": spec.kind, "kappa": kappa, "delta": spec.delta,
            "edges": rep.edges, "asymptotic_edges": rep.asymptotic_edges}
