"""Independent reference computations for the test suite.

* Bessel values from the integral ``K_nu(z) = int_0^inf exp(-z cosh t)
  cosh(nu t) dt``, evaluated by mpmath's adaptive quadrature at extended
  precision.  This path shares nothing with :mod:`slenderloop.specialfn`.
* Dense matrices of linear operators by brute-force basis application.
* Sixth-order centered finite differences to check spectral derivatives.

Run ``python3 -m slenderloop.oracle`` to regenerate the Bessel fixture.
"""
import os
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, OracleError
from .grid import spectral_derivative, to_coeffs, wavenumbers

__all__ = [
    "OracleReport",
    "bessel_reference",
    "fixture_grid",
    "write_bessel_fixture",
    "load_bessel_fixture",
    "FIXTURE_PATH",
    "dense_matrix_of",
    "fd_weights",
    "fd_derivative",
    "fd_check",
]

FIXTURE_PATH = os.path.join(os.path.dirname(__file__), "data", "bessel_k.txt")
_DPS = 40


@dataclass(frozen=True)
class OracleReport:
    """Comparison of one operation against its reference."""

    subject: str
    max_rel_error: float
    grid: str
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_rel_error <= self.tolerance)

    def as_dict(self):
        return {"subject": self.subject, "max_rel_error": self.max_rel_error,
                "grid": self.grid, "tolerance": self.tolerance, "pass": self.passed}


def bessel_reference(order, z, dps=_DPS):
    """``K_order(z)`` by quadrature of its integral representation.

    Returns an ``mpmath.mpf``.  The factor ``e^-z`` is pulled out so the
    integrand is O(1).  The half line is then cut where the integrand falls
    below ``10^-(dps+10)`` of its peak, and split into panels no wider than
    ``min(1, z^-1/2)``, which keeps each panel resolved for tiny and large z.
    Raises :class:`OracleError` if the quadrature error estimate is not
    small relative to the value.
    """
    if order not in (0, 1, 2):
        raise DomainError(f"unsupported Bessel order {order!r}")
    if not 1e-6 <= float(z) <= 1e3:
        raise DomainError(f"reference quadrature supports z in [1e-6, 1e3], got {z!r}")
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        nu = mpmath.mpf(order)
        # integrate exp(-z (cosh t - 1)) cosh(nu t) so the integrand is O(1)
        expo = lambda t: -zz * (mpmath.cosh(t) - 1) + nu * t  # noqa: E731
        t_peak = mpmath.asinh(nu / zz)
        drop = (dps + 10) * mpmath.log(10)
        t_hi = t_peak + 1
        while expo(t_hi) > expo(t_peak) - drop:
            t_hi *= 2
        # panels no wider than the peak width ~ z^-1/2
        width = min(mpmath.mpf(1), 1 / mpmath.sqrt(zz))
        pts = list(mpmath.linspace(0, t_hi, int(mpmath.ceil(t_hi / width)) + 1))
        if t_peak > 0:
            pts = sorted(set(pts + [t_peak]))
        f = lambda t: mpmath.exp(-zz * (mpmath.cosh(t) - 1)) * mpmath.cosh(nu * t)  # noqa: E731
        val, err = mpmath.quad(f, pts, error=True, maxdegree=10)
        if not val > 0 or err > val * mpmath.mpf(10) ** (-(dps - 10)):
            raise OracleError(f"Bessel quadrature did not converge at order={order}, z={z}")
        return val * mpmath.exp(-zz)


def fixture_grid(n=200, lo=1e-6, hi=50.0):
    return np.logspace(np.log10(lo), np.log10(hi), n)


def write_bessel_fixture(path=FIXTURE_PATH, n=200):
    """Write ``order z value`` records for K0, K1, K2 on the log grid."""
    lines = [
        "# K_nu(z) reference values: order z value",
        "# generated by slenderloop.oracle.write_bessel_fixture (python3 -m slenderloop.oracle)",
        f"# adaptive quadrature of int_0^inf exp(-z cosh t) cosh(nu t) dt at {_DPS} digits",
        f"# grid: {n} log-spaced points on [1e-6, 50]",
    ]
    for z in fixture_grid(n):
        for order in (0, 1, 2):
            val = bessel_reference(order, z)
            lines.append(f"{order} {z:.17g} {mpmath.nstr(val, 25, min_fixed=1, max_fixed=0)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_bessel_fixture(path=FIXTURE_PATH):
    """Return ``(order, z, value)`` arrays; values are parsed to double."""
    orders, zs, vals = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise OracleError(f"{path}:{lineno}: expected 'order z value'")
            try:
                orders.append(int(parts[0]))
                zs.append(float(parts[1]))
                vals.append(float(parts[2]))
            except ValueError as exc:
                raise OracleError(f"{path}:{lineno}: {exc}") from None
    return np.array(orders), np.array(zs), np.array(vals)


def dense_matrix_of(op, n, basis="fourier", components=None):
    """Dense matrix of a real-linear operator on fields of ``n`` samples.

    ``basis="grid"`` applies ``op`` to unit impulses and returns the matrix
    acting on sample values.  ``basis="fourier"`` returns the matrix in the
    complex exponential basis (FFT order), built from the images of the
    real cosine and sine modes, so ``op`` only ever sees real input.  With
    ``components`` set, fields are (n, components) arrays and the matrix
    acts on the flattened (sample-major) layout.
    """
    shape = (n,) if components is None else (n, components)
    size = int(np.prod(shape))
    if basis == "grid":
        out = np.empty((size, size))
        for j in range(size):
            e = np.zeros(size)
            e[j] = 1.0
            out[:, j] = np.asarray(op(e.reshape(shape)), dtype=float).ravel()
        return out
    if basis != "fourier":
        raise ValueError(f"unknown basis {basis!r}")
    s = np.arange(n) / n
    k = wavenumbers(n)
    m = 1 if components is None else components
    out = np.empty((size, size), dtype=complex)
    for i, kk in enumerate(k):
        cos = np.cos(2 * np.pi * kk * s)
        sin = np.sin(2 * np.pi * kk * s)
        for c in range(m):
            fc = np.zeros((n, m))
            fs = np.zeros((n, m))
            fc[:, c] = cos
            fs[:, c] = sin
            img = (np.asarray(op(fc.reshape(shape)), dtype=float)
                   + 1j * np.asarray(op(fs.reshape(shape)), dtype=float))
            out[:, i * m + c] = to_coeffs(img.reshape(n, m)).ravel()
    return out


def fd_weights(deriv, half_width):
    """Centered finite-difference weights on offsets ``-w..w``."""
    offs = np.arange(-half_width, half_width + 1, dtype=float)
    mat = np.vander(offs, increasing=True).T
    rhs = np.zeros(offs.size)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(mat, rhs)


def fd_derivative(u, deriv, accuracy=6):
    """Periodic centered difference of order ``deriv`` and given accuracy."""
    u = np.asarray(u, dtype=float)
    half = (deriv + 1) // 2 - 1 + accuracy // 2
    w = fd_weights(deriv, half)
    h = 1.0 / u.shape[0]
    out = np.zeros_like(u)
    for j, wj in zip(range(-half, half + 1), w):
        out += wj * np.roll(u, -j, axis=0)
    return out / h ** deriv


def fd_check(field_fn, n, deriv, tolerance, subject=None, derivative_fn=None):
    """Compare the spectral derivative of ``field_fn`` samples with finite differences.

    ``field_fn(s)`` returns samples at the nodes ``s``.  When
    ``derivative_fn`` is given the spectral result is instead compared with
    that exact derivative and the difference stencil is not used.  The error
    is relative to the sup norm of the reference.
    """
    s = np.arange(n) / n
    u = np.asarray(field_fn(s), dtype=float)
    spec = spectral_derivative(u, deriv)
    ref = derivative_fn(s) if derivative_fn is not None else fd_derivative(u, deriv)
    err = float(np.max(np.abs(spec - ref)) / np.max(np.abs(ref)))
    name = subject or f"spectral derivative order {deriv}"
    return OracleReport(name, err, f"{n} uniform samples", tolerance)


if __name__ == "__main__":  # pragma: no cover
    print(write_bessel_fixture())
