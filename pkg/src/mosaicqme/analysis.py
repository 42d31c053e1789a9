"""Observables built on top of the dynamics: IPR curves, crossings, sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, MosaicError
from .lattice import ModelSpec, build_hamiltonian
from .laplace import (DEFAULT_TOL_STEADY, PoleDecomposition, SpectralDensityParams,
                      build_augmented, find_poles, reconstruct_amplitudes)
from .localization import eigendecompose, ipr
from .trajectory import Trajectory

log = logging.getLogger(__name__)

INDISTINGUISHABLE_TOL = 1e-9


@dataclass(frozen=True)
class IprCurve:
    """Raw IPR ``sum_n |alpha_n(t)|^4`` on a time grid.

    ``evaluate``, when present, gives the IPR at arbitrary ``t`` and is used to
    refine crossing times beyond the grid resolution.
    """

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    energy: float | None = None
    evaluate: Callable[[float], float] | None = field(default=None, repr=False, compare=False)

    @property
    def ipr0(self) -> float:
        return float(self.values[0])


@dataclass(frozen=True)
class CrossingReport:
    label_a: str
    label_b: str
    t_star: list[float]
    brackets: list[tuple[float, float]]
    ipr0_a: float
    ipr0_b: float
    indistinguishable: bool = False

    def to_dict(self) -> dict:
        return {
            "pair": [self.label_a, self.label_b],
            "t_star": list(self.t_star),
            "brackets": [list(b) for b in self.brackets],
            "ipr0_a": self.ipr0_a,
            "ipr0_b": self.ipr0_b,
            "indistinguishable": self.indistinguishable,
        }


@dataclass(frozen=True)
class SweepPoint:
    value: float
    N: int
    poles: np.ndarray | None
    steady: np.ndarray | None
    pseudomode: np.ndarray | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: list
    points: list[SweepPoint]
    metadata: dict = field(default_factory=dict)

    def rows(self):
        """Long-format rows ``(axis value, N, index, Re z, Im z, steady, pseudomode)``."""
        for pt in self.points:
            if pt.poles is None:
                continue
            for i, z in enumerate(pt.poles):
                yield pt.value, pt.N, i + 1, z.real, z.imag, bool(pt.steady[i]), bool(pt.pseudomode[i])


def ipr_trajectory(traj: Trajectory, energy: float | None = None) -> IprCurve:
    return IprCurve(traj.times, traj.ipr(), traj.label, energy)


def ipr_curve_from_poles(decomp: PoleDecomposition, times, label: str = "",
                         energy: float | None = None) -> IprCurve:
    """IPR curve of a residue reconstruction; carries an exact evaluator."""
    times = np.asarray(times, dtype=float)
    amps = reconstruct_amplitudes(decomp, times)
    p = np.abs(amps) ** 2
    return IprCurve(times, np.sum(p * p, axis=1), label, energy,
                    evaluate=lambda t: ipr(reconstruct_amplitudes(decomp, t)))


def survival_probability(traj: Trajectory) -> np.ndarray:
    """Total lattice population ``S(t) = sum_n |alpha_n(t)|^2``."""
    return traj.survival()


def detect_crossings(a: IprCurve, b: IprCurve, xtol: float = 1e-10) -> CrossingReport:
    """All sign changes of ``a - b`` at ``t > 0``.

    Brackets are located on the shared grid.  When both curves carry
    evaluators the crossing is refined with Brent's method, otherwise by
    linear interpolation inside the bracket.  Every reported crossing is
    sign-checked one grid step either side.
    """
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise DomainError("IPR curves must share an identical time grid")
    t = a.times
    d = a.values - b.values
    if np.max(np.abs(d)) < INDISTINGUISHABLE_TOL:
        return CrossingReport(a.label, b.label, [], [], a.ipr0, b.ipr0, indistinguishable=True)

    exact = a.evaluate is not None and b.evaluate is not None
    diff = (lambda s: a.evaluate(s) - b.evaluate(s)) if exact else None
    step = float(t[1] - t[0]) if t.size > 1 else 0.0

    nz = np.flatnonzero(d != 0)
    t_star, brackets = [], []
    for k0, k1 in zip(nz[:-1], nz[1:]):
        if np.sign(d[k0]) == np.sign(d[k1]):
            continue
        lo, hi = t[k0], t[k1]
        if exact:
            ts = brentq(diff, lo, hi, xtol=xtol)
        else:
            ts = lo + (hi - lo) * d[k0] / (d[k0] - d[k1])
        if ts <= 0:
            continue
        if exact and step > 0:
            left, right = diff(max(ts - step, 0.0)), diff(ts + step)
            if np.sign(left) == np.sign(right):
                continue
        t_star.append(float(ts))
        brackets.append((float(lo), float(hi)))
    return CrossingReport(a.label, b.label, t_star, brackets, a.ipr0, b.ipr0)


def all_crossings(curves: Sequence[IprCurve]) -> list[CrossingReport]:
    out = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            out.append(detect_crossings(curves[i], curves[j]))
    return out


def _sweep_point(spec: ModelSpec, value, params, tol_steady) -> SweepPoint:
    try:
        H = build_hamiltonian(spec)
        d = find_poles(build_augmented(H, params), eigendecompose(H), tol_steady)
        return SweepPoint(value, spec.N, d.poles, d.steady, d.pseudomode)
    except (MosaicError, np.linalg.LinAlgError) as exc:
        log.warning("sweep point %s failed: %s", value, exc)
        return SweepPoint(value, spec.N, None, None, None, error=str(exc))


SWEEP_AXES = ("delta", "N", "phi", "kappa", "a")


def pole_sweep(base: ModelSpec, axis: str, values: Sequence, params: SpectralDensityParams,
               threads: int = 1, tol_steady: float = DEFAULT_TOL_STEADY) -> SweepResult:
    """Poles at every value of one model parameter (``delta`` or ``N`` typically)."""
    if axis not in SWEEP_AXES:
        raise DomainError(f"cannot sweep over {axis!r}; choose from {sorted(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise DomainError("sweep axis has no values")
    jobs = []
    for v in values:
        try:
            spec = base.with_(**{axis: int(v) if axis in ("N", "kappa") else float(v)})
        except MosaicError as exc:
            jobs.append(exc)
            continue
        jobs.append(spec)

    def run(item):
        spec, v = item
        if isinstance(spec, Exception):
            return SweepPoint(v, base.N, None, None, None, error=str(spec))
        return _sweep_point(spec, v, params, tol_steady)

    items = list(zip(jobs, values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            points = list(ex.map(run, items))
    else:
        points = [run(it) for it in items]
    meta = {"base": base.label(), "eta": params.eta, "omega_c": params.omega_c}
    return SweepResult(axis, values, points, meta)


def decoupled_levels(spec: ModelSpec, tol: float = 1e-12) -> list[float]:
    """Energies of eigenstates orthogonal to the uniform coupling vector."""
    es = eigendecompose(build_hamiltonian(spec))
    ov = es.uniform_overlaps()
    return [float(e) for e, o in zip(es.values, ov) if abs(o) < tol]
