"""The tension determination problem.

Given a curve ``X`` (through its frame) and data ``g``, find the scalar
tension ``tau`` with

    Q[tau] = -(L[g])_s . X_s,     Q[tau] = (L[(tau X_s)_s])_s . X_s,

where ``L`` is the principal curved map of :mod:`slenderloop.ntd`.  The
velocity ``v = L[g + (tau X_s)_s]`` then satisfies ``v_s . X_s = 0``.  Any
other pointwise-symmetric coupling (such as resistive force theory) can be
passed as ``operator``, a callable taking force fields of shape (N, ..., 3).

Sign convention: with ``g = X_ssss`` this is the tension problem of the
elastic force ``-X_ssss + (T X_s)_s``, and the physical tension is
``T = -tau``.

``tau`` is expanded in the real orthonormal basis ``1, sqrt2 cos(2 pi j s),
sqrt2 sin(2 pi j s)`` for ``j <= K``.  Integrating by parts gives
``<Q tau, phi> = -<L (tau X_s)_s, (phi X_s)_s>``.  The spectral derivative
is skew-adjoint on the grid, so the Galerkin matrix inherits this symmetry
up to roundoff.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError
from .geometry import inextensibility_identities
from .grid import apply_multiplier, spectral_derivative
from .ntd import curved_ntd_apply

__all__ = [
    "TensionSystem",
    "tension_basis",
    "apply_Q",
    "assemble_Q",
    "tdp_rhs",
    "solve_tension",
    "main_term_G0",
    "tension_for_bending",
    "constraint_residual",
    "SIGMA_FLOOR",
]

#: Smallest singular value accepted before the solve is declared singular.
SIGMA_FLOOR = 1e-10


@dataclass
class TensionSystem:
    """Galerkin discretization of ``Q`` and, once solved, the tension."""

    n_modes: int
    matrix: np.ndarray = field(repr=False)
    symmetry_defect: float
    sigma_min: float
    rhs: np.ndarray = field(default=None, repr=False)
    coeffs: np.ndarray = field(default=None, repr=False)
    tau: np.ndarray = field(default=None, repr=False)
    solve_residual: float = np.nan
    constraint_residual: float = np.nan
    reduction_residual: float = np.nan

    def diagnostics(self):
        return {
            "n_modes": self.n_modes,
            "symmetry_defect": self.symmetry_defect,
            "sigma_min": self.sigma_min,
            "solve_residual": self.solve_residual,
            "constraint_residual": self.constraint_residual,
            "reduction_residual": self.reduction_residual,
        }


def tension_basis(n, n_modes):
    """(n, 2K+1) samples of the orthonormal real Fourier basis."""
    s = np.arange(n) / n
    j = np.arange(1, n_modes + 1)
    arg = 2 * np.pi * np.outer(s, j)
    out = np.empty((n, 2 * n_modes + 1))
    out[:, 0] = 1.0
    out[:, 1::2] = np.sqrt(2.0) * np.cos(arg)
    out[:, 2::2] = np.sqrt(2.0) * np.sin(arg)
    return out


def _check_resolution(n, n_modes):
    if n_modes < 1 or n < 4 * n_modes + 2:
        raise ConfigurationError(
            f"tension with K = {n_modes} modes needs a grid of at least "
            f"{4 * n_modes + 2} points, got {n}")


def _coupling(frame, table, mean_closure, operator):
    if operator is not None:
        return operator
    return lambda f: curved_ntd_apply(frame, table, f, mean_closure=mean_closure)


def apply_Q(frame, table, tau, mean_closure=True, operator=None):
    """Matrix-free ``Q[tau]`` on the grid; ``tau`` has shape (N,) or (N, M)."""
    tau = np.asarray(tau, dtype=float)
    xs = frame.x_s
    shape = (xs.shape[0],) + (1,) * (tau.ndim - 1) + (3,)
    xs_b = xs.reshape(shape)
    force = spectral_derivative(tau[..., None] * xs_b, 1)
    vel = _coupling(frame, table, mean_closure, operator)(force)
    return np.sum(spectral_derivative(vel, 1) * xs_b, axis=-1)


def tdp_rhs(frame, table, g, mean_closure=True, operator=None):
    """Right side ``-(L[g])_s . X_s`` on the grid."""
    vel = _coupling(frame, table, mean_closure, operator)(np.asarray(g, dtype=float))
    return -np.sum(spectral_derivative(vel, 1) * frame.x_s, axis=-1)


def assemble_Q(frame, table, n_modes, mean_closure=True, operator=None):
    """Assemble the (2K+1)-square Galerkin matrix of ``Q``.

    Every basis function is pushed through :func:`apply_Q` in one batched
    call and projected back with the grid inner product, which is the least
    squares projection for an orthonormal basis.
    """
    n = frame.n
    _check_resolution(n, n_modes)
    basis = tension_basis(n, n_modes)
    cols = apply_Q(frame, table, basis, mean_closure=mean_closure, operator=operator)
    mat = basis.T @ cols / n
    norm = np.linalg.norm(mat)
    defect = float(np.linalg.norm(mat - mat.T) / norm) if norm > 0 else 0.0
    sym = 0.5 * (mat + mat.T)
    sigma = float(np.linalg.svd(sym, compute_uv=False)[-1])
    return TensionSystem(int(n_modes), mat, defect, sigma)


def constraint_residual(frame, table, g, tau, mean_closure=True, operator=None):
    """Sup norm of ``v_s . X_s`` with ``v = L[g + (tau X_s)_s]``."""
    force = np.asarray(g, dtype=float) + spectral_derivative(tau[:, None] * frame.x_s, 1)
    vel = _coupling(frame, table, mean_closure, operator)(force)
    return float(np.max(np.abs(np.sum(spectral_derivative(vel, 1) * frame.x_s, axis=1))))


def solve_tension(frame, table, g, n_modes=None, sigma_floor=SIGMA_FLOOR,
                  mean_closure=True, system=None, operator=None):
    """Solve ``Q[tau] = -(L[g])_s . X_s`` for the tension.

    The symmetrized matrix ``(Q + Q^T)/2`` is solved; the asymmetry is pure
    discretization error and is reported as ``symmetry_defect``.  A
    previously assembled ``system`` for the same frame may be passed in.
    ``n_modes`` defaults to the largest K allowed by the grid.
    """
    n = frame.n
    if n_modes is None:
        n_modes = (n - 2) // 4
    if system is None:
        system = assemble_Q(frame, table, n_modes, mean_closure=mean_closure, operator=operator)
    if not system.sigma_min > sigma_floor:
        raise NumericalError(
            f"tension system is numerically singular: sigma_min = {system.sigma_min:.3e}")
    basis = tension_basis(n, system.n_modes)
    rhs = basis.T @ tdp_rhs(frame, table, g, mean_closure=mean_closure, operator=operator) / n
    sym = 0.5 * (system.matrix + system.matrix.T)
    coeffs = np.linalg.solve(sym, rhs)
    if not np.all(np.isfinite(coeffs)):
        raise NumericalError("tension solve produced non-finite values")
    rnorm = np.linalg.norm(rhs)
    system.rhs = rhs
    system.coeffs = coeffs
    system.tau = basis @ coeffs
    system.solve_residual = float(np.linalg.norm(sym @ coeffs - rhs) / rnorm) if rnorm > 0 else 0.0
    system.constraint_residual = constraint_residual(frame, table, g, system.tau,
                                                     mean_closure=mean_closure, operator=operator)
    return system


def main_term_G0(frame, table, g):
    """Leading tension ``(I - Lbar^t d_ss)^-1 d_s Lbar^t [e_t.g - mean]``.

    All factors are Fourier multipliers, so this is one mode-wise product
    with ``m2 * m_t``.
    """
    gt = np.sum(np.asarray(g, dtype=float) * frame.e_t, axis=1)
    gt = gt - np.mean(gt)
    return apply_multiplier(gt, table.m2 * table.m_t)


def tension_for_bending(frame, table, X, n_modes=None, identity_tol=1e-6, **kw):
    """Tension for the bending data ``g = X_ssss``.

    Also records the residual of ``e_t.X_ssss + 3 X_ss.X_sss``.  This
    reduction is what makes the tangential data smoother than ``X_ssss``; a
    warning is raised when it does not hold to ``identity_tol``.
    """
    reduction = inextensibility_identities(X)["third"]
    if reduction > identity_tol:
        warnings.warn(
            f"inextensibility identity residual {reduction:.2e} exceeds {identity_tol:.0e}; "
            "the tangential data reduction does not apply", RuntimeWarning, stacklevel=2)
    # roundoff in X is amplified ~ (2 pi N/2)^4 by the fourth derivative
    system = solve_tension(frame, table, X.deriv(4, filter_tol="auto"), n_modes=n_modes, **kw)
    system.reduction_residual = reduction
    return system
