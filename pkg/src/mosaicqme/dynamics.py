"""Direct time-domain integration of the memory-kernel equation of motion.

    d alpha/dt = -i H alpha - u * int_0^t f(t - s) (u^T alpha(s)) ds,
    f(tau) = pi eta w_c exp(-w_c tau).

Two independent discretizations are provided:

``integrate_volterra``
    integrating-factor Heun steps for the lattice part with trapezoidal
    quadrature of the full convolution history.  Works for any causal kernel
    and costs O((T/h)^2).
``integrate_auxiliary``
    classic RK4 on the (N+1)-dimensional linear ODE obtained by carrying the
    exponential memory as one auxiliary amplitude.
"""

from __future__ import annotations

import logging
import warnings
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError
from .laplace import SpectralDensityParams, build_augmented
from .trajectory import Trajectory, time_grid

log = logging.getLogger(__name__)

STABILITY_LIMIT = 0.5


def memory_kernel(tau, params: SpectralDensityParams):
    """``f(tau) = pi eta w_c exp(-w_c tau)`` for ``tau >= 0``."""
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise DomainError("memory kernel is causal; tau must be >= 0")
    out = np.pi * params.eta * params.omega_c * np.exp(-params.omega_c * t)
    return out if out.ndim else float(out)


def _check_inputs(H, alpha0, h):
    h_mat = np.asarray(H, dtype=float)
    a0 = np.asarray(alpha0, dtype=complex)
    if a0.shape != (h_mat.shape[0],):
        raise DomainError(f"alpha0 has shape {a0.shape}, expected ({h_mat.shape[0]},)")
    if abs(np.vdot(a0, a0).real - 1.0) > 1e-12:
        raise DomainError("alpha0 must be normalized to 1e-12")
    hnorm = np.linalg.norm(h_mat, 2)
    if h * hnorm > STABILITY_LIMIT:
        warnings.warn(f"step h={h} with ||H||={hnorm:.3g} exceeds h*||H|| <= {STABILITY_LIMIT}",
                      RuntimeWarning, stacklevel=3)
    return h_mat, a0


def _abort_on_nan(x, step, t):
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"non-finite amplitudes at step {step} (t={t:.6g})")


def integrate_volterra(H, params: SpectralDensityParams, alpha0, T: float = 50.0, h: float = 1e-3,
                       decimation: int = 10, kernel: Callable | None = None, label: str = "") -> Trajectory:
    """Second-order scheme for the integro-differential equation.

    The lattice propagator ``U = exp(-i H h)`` is applied exactly (Lawson/
    integrating-factor form) and the memory force is advanced with a Heun
    predictor-corrector; the convolution integral uses the trapezoidal rule
    over the stored history of ``S(t) = u^T alpha(t)``.

    Parameters
    ----------
    kernel : callable, optional
        ``kernel(tau_array) -> array``; defaults to the Lorentzian closed form.
    """
    h_mat, a0 = _check_inputs(H, alpha0, h)
    n_steps, times = time_grid(T, h, decimation)
    N = a0.size
    kern = kernel if kernel is not None else (lambda tau: memory_kernel(tau, params))
    f = np.asarray(kern(np.arange(n_steps + 1) * h), dtype=complex)
    # reversed kernel table so that the history sum is a contiguous dot product
    f_rev = f[::-1].copy()

    w, v = np.linalg.eigh(h_mat)
    U = (v * np.exp(-1j * w * h)) @ v.T
    U_ones = U.sum(axis=1)  # U @ u

    S = np.zeros(n_steps + 1, dtype=complex)
    out = np.empty((times.size, N), dtype=complex)
    alpha = a0.copy()
    S[0] = alpha.sum()
    out[0] = alpha
    conv = 0.0 + 0.0j  # convolution at t_0 = 0
    k_out = 1
    for n in range(n_steps):
        # history part of the trapezoid at t_{n+1}, everything except the S_{n+1} endpoint
        hist = 0.5 * f[n + 1] * S[0]
        if n >= 1:
            hist += f_rev[n_steps - n : n_steps] @ S[1 : n + 1]
        Un_alpha = U @ alpha
        # predictor: explicit Euler on the memory force, exact lattice step
        pred = Un_alpha - h * conv * U_ones
        S_pred = pred.sum()
        conv_pred = h * (hist + 0.5 * f[0] * S_pred)
        # corrector: trapezoidal average of the memory force
        alpha = Un_alpha - 0.5 * h * (conv * U_ones + conv_pred)
        S[n + 1] = alpha.sum()
        conv = h * (hist + 0.5 * f[0] * S[n + 1])
        if (n + 1) % decimation == 0:
            _abort_on_nan(alpha, n + 1, (n + 1) * h)
            out[k_out] = alpha
            k_out += 1
    return Trajectory(times, out, "volterra", label)


def _rk4_propagator(m: np.ndarray, h: float) -> np.ndarray:
    """One classic RK4 step for ``psi' = -i M psi`` as a matrix."""
    a = -1j * h * m
    eye = np.eye(m.shape[0], dtype=complex)
    a2 = a @ a
    return eye + a + a2 / 2.0 + a2 @ a / 6.0 + a2 @ a2 / 24.0


def integrate_auxiliary(H, params: SpectralDensityParams, alpha0, T: float = 50.0, h: float = 1e-3,
                        decimation: int = 10, label: str = "") -> Trajectory:
    """RK4 on the pseudomode-augmented linear ODE, auxiliary amplitude starting at zero."""
    h_mat, a0 = _check_inputs(H, alpha0, h)
    n_steps, times = time_grid(T, h, decimation)
    aug = build_augmented(h_mat, params)
    step = _rk4_propagator(aug.matrix, h)
    if decimation > 1:
        # identical to applying the RK4 step `decimation` times
        stride = np.linalg.matrix_power(step, decimation)
    else:
        stride = step
    N = a0.size
    out = np.empty((times.size, N), dtype=complex)
    psi = np.append(a0, 0.0)
    out[0] = a0
    n_full = n_steps // decimation
    for k in range(1, n_full + 1):
        psi = stride @ psi
        out[k] = psi[:N]
        if k % 1000 == 0:
            _abort_on_nan(psi, k * decimation, k * decimation * h)
    _abort_on_nan(psi, n_steps, T)
    return Trajectory(times, out, "auxiliary_ode", label)
