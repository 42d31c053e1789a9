from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

METHODS = ("volterra", "auxiliary_ode", "residue_reconstruction")


@dataclass(frozen=True)
class Trajectory:
    """Site amplitudes ``alpha_n(t)`` sampled on a uniform time grid.

    ``amplitudes[k, n]`` is the amplitude of site ``n + 1`` at ``times[k]``.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    method: str
    label: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown trajectory method {self.method!r}")
        if self.amplitudes.shape[0] != self.times.size:
            raise DomainError("times and amplitudes disagree in length")

    @property
    def N(self) -> int:
        return self.amplitudes.shape[1]

    def survival(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def ipr(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return np.sum(p * p, axis=1)


def time_grid(T: float, h: float, decimation: int = 1) -> tuple[int, np.ndarray]:
    """Number of integration steps and the stored (decimated) time grid."""
    if h <= 0 or T < 0:
        raise DomainError(f"need h > 0 and T >= 0, got h={h}, T={T}")
    if decimation < 1:
        raise DomainError(f"decimation must be >= 1, got {decimation}")
    n_steps = int(round(T / h))
    if abs(n_steps * h - T) > 1e-9 * max(1.0, T):
        raise DomainError(f"T={T} is not an integer multiple of h={h}")
    if n_steps > 10**6:
        raise DomainError(f"T/h = {n_steps} exceeds the 1e6 step guard")
    idx = np.arange(0, n_steps + 1, decimation)
    return n_steps, idx * h
