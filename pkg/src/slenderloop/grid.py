"""Periodic spectral machinery on the unit circle T = R/Z.

Fields are plain numpy arrays whose first axis runs over the ``N`` uniform
samples ``s_i = i/N``; any trailing axes (for instance the three Cartesian
components of a curve) are carried along untouched.  Fourier coefficients use
numpy's FFT ordering and are normalized so that

    u(s) = sum_k c_k exp(2 pi i k s).

The Nyquist mode ``k = N/2`` is kept for even-order operations and zeroed by
odd-order derivative multipliers, so real fields stay real.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "PeriodicGrid",
    "make_grid",
    "wavenumbers",
    "to_coeffs",
    "from_coeffs",
    "spectral_derivative",
    "roundoff_filter",
    "noise_floor",
    "derivative_symbol",
    "apply_multiplier",
    "mode_table",
    "DyadicPartition",
    "lp_project",
    "besov_norm",
    "resample",
    "write_field_csv",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid with ``n_samples`` nodes on [0, 1)."""

    n_samples: int
    nodes: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)

    @property
    def max_mode(self):
        return self.n_samples // 2


def make_grid(n_samples):
    """Build a :class:`PeriodicGrid`; ``n_samples`` must be even and >= 8."""
    if int(n_samples) != n_samples or n_samples < 8 or n_samples % 2:
        raise ConfigurationError(
            f"grid size must be an even integer >= 8, got {n_samples!r}")
    n = int(n_samples)
    return PeriodicGrid(n, np.arange(n) / n, wavenumbers(n))


def wavenumbers(n):
    """Integer wavenumbers in FFT order, with the Nyquist mode as ``+n/2``."""
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = n // 2
    return k


def to_coeffs(u):
    return np.fft.fft(u, axis=0) / u.shape[0]


def from_coeffs(c, real=True):
    u = np.fft.ifft(c, axis=0) * c.shape[0]
    return u.real if real else u


def _expand(table, u):
    return table.reshape(table.shape + (1,) * (u.ndim - 1))


def derivative_symbol(n, order):
    """Symbol ``(2 pi i k)^order`` in FFT order; Nyquist zeroed for odd orders."""
    k = wavenumbers(n)
    sym = (2j * np.pi * k) ** order
    if order % 2:
        sym[n // 2] = 0.0
    return sym


def noise_floor(c):
    """Largest coefficient magnitude in the upper half of the spectrum.

    For a resolved smooth field this is the ceiling of the FFT roundoff
    plateau (the plateau is ragged, so its median would be too low).
    """
    c = np.asarray(c)
    mag = np.abs(c) if c.ndim == 1 else np.linalg.norm(c.reshape(c.shape[0], -1), axis=1)
    k = np.abs(wavenumbers(c.shape[0]))
    return float(np.max(mag[k > c.shape[0] // 4]))


def roundoff_filter(c, rel_tol="auto", factor=2.0, cap=1e-15):
    """Zero Fourier coefficients that sit at the roundoff level.

    Removes FFT noise before high-order differentiation, where the symbol
    ``(2 pi k)^4`` would otherwise amplify it far above the signal.  With
    ``rel_tol="auto"`` the threshold is ``factor`` times :func:`noise_floor`,
    capped at ``cap`` times the largest coefficient so under-resolved fields
    are never truncated deep into their content.  Trailing axes are filtered
    jointly by the Euclidean coefficient norm.
    """
    c = np.asarray(c)
    mag = np.abs(c) if c.ndim == 1 else np.linalg.norm(c.reshape(c.shape[0], -1), axis=1)
    top = np.max(mag)
    if rel_tol == "auto":
        thresh = min(factor * noise_floor(c), cap * top)
    else:
        thresh = float(rel_tol) * top
    return c * _expand(mag > thresh, c)


def spectral_derivative(u, order=1, filter_tol=None):
    """Differentiate a periodic field ``order`` times in s.

    With ``filter_tol`` set (a relative level or ``"auto"``), roundoff-level
    coefficients are dropped first (see :func:`roundoff_filter`).
    """
    u = np.asarray(u)
    if order == 0:
        return u.copy()
    sym = derivative_symbol(u.shape[0], order)
    c = to_coeffs(u)
    if filter_tol is not None:
        c = roundoff_filter(c, filter_tol)
    out = from_coeffs(c * _expand(sym, u), real=False)
    return out.real if np.isrealobj(u) else out


def mode_table(fn, n):
    """Tabulate a multiplier ``fn(k)`` on the FFT-ordered modes of an n-grid."""
    return np.asarray(fn(wavenumbers(n)), dtype=complex)


def apply_multiplier(u, table):
    """Multiply the Fourier coefficients of ``u`` by ``table`` mode-wise.

    ``table`` is indexed in FFT order and must have one entry per mode of
    ``u``.  Real input stays real whenever ``table(-k) = conj(table(k))``.
    """
    u = np.asarray(u)
    table = np.asarray(table)
    if table.shape[0] != u.shape[0]:
        raise ValueError(
            f"multiplier table covers {table.shape[0]} modes, field has {u.shape[0]}")
    out = from_coeffs(to_coeffs(u) * _expand(table, u), real=False)
    return out.real if np.isrealobj(u) else out


# --- Littlewood-Paley apparatus -------------------------------------------

_LOW, _HIGH = 0.75, 4.0 / 3.0


def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, glued from exp(-1/x)."""
    x = np.asarray(x, dtype=float)

    def f(y):
        pos = y > 0
        return np.where(pos, np.exp(-1.0 / np.where(pos, y, 1.0)), 0.0)

    fx = f(x)
    return fx / (fx + f(1.0 - x))


def low_pass_profile(xi):
    """Radial cutoff equal to 1 on |xi| <= 3/4 and 0 on |xi| >= 4/3."""
    a = np.abs(np.asarray(xi, dtype=float))
    return _smooth_step((_HIGH - a) / (_HIGH - _LOW))


def bump_profile(xi):
    """Annular bump supported on 3/4 <= |xi| <= 8/3.

    Defined as ``chi(xi/2) - chi(xi)`` so the dyadic sum telescopes to 1 on
    every nonzero frequency.
    """
    xi = np.asarray(xi, dtype=float)
    return low_pass_profile(0.5 * xi) - low_pass_profile(xi)


class DyadicPartition:
    """Dyadic blocks ``phi_j(k) = phi(2^-j k)`` on the modes of an n-grid."""

    def __init__(self, n_samples):
        self.n = int(n_samples)
        self.k = wavenumbers(self.n)
        kmax = self.n // 2
        # phi_j(1) != 0 only for j in {-1, 0}; the top block must reach kmax
        j_hi = int(np.ceil(np.log2(kmax / _LOW))) if kmax > 0 else 0
        self.j_range = np.arange(-1, j_hi + 1)
        self.blocks = {int(j): bump_profile(self.k / 2.0 ** j) for j in self.j_range}
        self.low = low_pass_profile(self.k / 2.0)  # symbol of P_{<=0}

    def block(self, j):
        j = int(j)
        if j in self.blocks:
            return self.blocks[j]
        return bump_profile(self.k / 2.0 ** j)


_partitions = {}


def _partition(n):
    if n not in _partitions:
        _partitions[n] = DyadicPartition(n)
    return _partitions[n]


def lp_project(u, j):
    """Littlewood-Paley projection of ``u`` onto dyadic block ``j``."""
    u = np.asarray(u)
    return apply_multiplier(u, _partition(u.shape[0]).block(j))


def _sup(u):
    u = np.asarray(u)
    if u.ndim == 1:
        return float(np.max(np.abs(u)))
    return float(np.max(np.linalg.norm(u.reshape(u.shape[0], -1), axis=1)))


def besov_norm(u, nu):
    """Discrete ``B^nu_{inf,inf}`` norm.

    ``max(|P_{<=0} u|_inf, max_{j>0} 2^{j nu} |P_j u|_inf)`` with sup norms
    taken over grid samples (pointwise Euclidean norm for vector fields).
    """
    u = np.asarray(u)
    part = _partition(u.shape[0])
    c = to_coeffs(u)
    best = _sup(from_coeffs(c * _expand(part.low, c), real=np.isrealobj(u)))
    for j in part.j_range:
        if j <= 0:
            continue
        pj = from_coeffs(c * _expand(part.blocks[int(j)], c), real=np.isrealobj(u))
        best = max(best, 2.0 ** (j * nu) * _sup(pj))
    return best


def resample(u, n_new):
    """Trigonometric interpolation of uniform samples ``u`` onto ``n_new`` points."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if n_new == n:
        return u.copy()
    c = to_coeffs(u)
    out = np.zeros((n_new,) + u.shape[1:], dtype=complex)
    m = (min(n, n_new) + 1) // 2  # modes |k| < m are copied verbatim
    out[:m] = c[:m]
    out[n_new - m + 1:] = c[n - m + 1:]
    shared = min(n, n_new)
    if shared % 2 == 0:
        h = shared // 2
        if n_new > n:
            # the old Nyquist mode splits evenly between +h and -h
            out[h] = 0.5 * c[h]
            out[n_new - h] = 0.5 * c[h]
        else:
            out[h] = c[h] + c[n - h]
    return from_coeffs(out)


def write_field_csv(path, u, coeffs=False):
    """Dump a field as ``s, value...`` samples or ``k, re, im`` coefficients."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    flat = u.reshape(n, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if coeffs:
            c = to_coeffs(flat)
            k = wavenumbers(n)
            order = np.argsort(k, kind="stable")
            if flat.shape[1] == 1:
                w.writerow(["k", "re", "im"])
            else:
                w.writerow(["k"] + [f"{p}{i}" for i in range(flat.shape[1]) for p in ("re", "im")])
            for idx in order:
                row = [int(k[idx])]
                for comp in c[idx]:
                    row += [f"{comp.real:.17g}", f"{comp.imag:.17g}"]
                w.writerow(row)
        else:
            cols = ["value"] if flat.shape[1] == 1 else [f"value{i}" for i in range(flat.shape[1])]
            w.writerow(["s"] + cols)
            for i in range(n):
                w.writerow([f"{i / n:.17g}"] + [f"{x:.17g}" for x in flat[i]])
