"""Modified Bessel functions of the second kind, orders 0, 1 and 2.

Two regimes are used for K0 and K1:

* ``z <= 2``: the convergent power series (DLMF 10.31.1), which carries the
  logarithmic term for order 0 and the ``1/z`` pole for order 1.
* ``z > 2``: Steed's continued fraction (the "CF2" of Thompson and Barnett),
  which yields the exponentially scaled values ``e^z K_nu(z)`` directly and
  converges for every positive argument.

K2 is always formed from the recurrence ``K2 = K0 + (2/z) K1``.

All functions accept scalars or arrays and return the same shape.
"""
import numpy as np

from .errors import DomainError

__all__ = ["bessel_k", "bessel_k_scaled", "OVERFLOW_THRESHOLD"]

#: Beyond this argument ``e^{-z}`` underflows; use :func:`bessel_k_scaled`.
OVERFLOW_THRESHOLD = 700.0

_SERIES_MAX_Z = 2.0
_N_SERIES = 30
_CF_MAXITER = 10000
_CF_TOL = 1e-17


def _series_k0_k1(z):
    t = 0.25 * z * z
    log_half = np.log(0.5 * z)
    # power-series weights t^k / (k!)^2 and t^k / (k! (k+1)!)
    a = np.ones_like(z)
    b = np.ones_like(z)
    i0 = np.zeros_like(z)
    i1 = np.zeros_like(z)
    s0 = np.zeros_like(z)
    s1 = np.zeros_like(z)
    psi = -np.euler_gamma  # psi(k + 1)
    for k in range(_N_SERIES):
        psi_next = psi + 1.0 / (k + 1)  # psi(k + 2)
        i0 += a
        i1 += b
        s0 += psi * a
        s1 += (psi + psi_next) * b
        a = a * t / ((k + 1) ** 2)
        b = b * t / ((k + 1) * (k + 2))
        psi = psi_next
    i1 *= 0.5 * z
    k0 = -log_half * i0 + s0
    k1 = 1.0 / z + log_half * i1 - 0.25 * z * s1
    return k0, k1


def _cf2_scaled_k0_k1(x):
    """Scaled K0, K1 for x >= 2 by Steed's algorithm with mu = 0."""
    s_out = np.empty_like(x)
    h_out = np.empty_like(x)
    idx = np.arange(x.size)
    xa = x.copy()
    b = 2.0 * (1.0 + xa)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(xa)
    q2 = np.ones_like(xa)
    a1 = 0.25
    q = np.full_like(xa, a1)
    c = np.full_like(xa, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        done = np.abs(dels / s) < _CF_TOL
        if done.any():
            s_out[idx[done]] = s[done]
            h_out[idx[done]] = h[done]
            keep = ~done
            if not keep.any():
                break
            # drop converged lanes; the remaining ones keep iterating
            idx, xa, b, d, h, delh = idx[keep], xa[keep], b[keep], d[keep], h[keep], delh[keep]
            q1, q2, q, c, s = q1[keep], q2[keep], q[keep], c[keep], s[keep]
    else:  # pragma: no cover - CF2 converges for all x >= 2
        raise DomainError("continued fraction for K did not converge")
    h_out *= a1
    k0 = np.sqrt(np.pi / (2.0 * x)) / s_out
    k1 = k0 * (x + 0.5 - h_out) / x
    return k0, k1


def _check(order, z):
    if order not in (0, 1, 2):
        raise DomainError(f"unsupported Bessel order {order!r}; expected 0, 1 or 2")
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("Bessel K requires strictly positive arguments")
    return z


def _scaled_all(z):
    """Return e^z K0, e^z K1 for positive array z."""
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    small = z <= _SERIES_MAX_Z
    if small.any():
        zs = z[small]
        s0, s1 = _series_k0_k1(zs)
        e = np.exp(zs)
        k0[small] = s0 * e
        k1[small] = s1 * e
    if (~small).any():
        k0[~small], k1[~small] = _cf2_scaled_k0_k1(z[~small])
    return k0, k1


def bessel_k_scaled(order, z):
    """Exponentially scaled Bessel function ``e^z K_order(z)``.

    Finite for every positive ``z`` (tested up to 1e6).

    Parameters
    ----------
    order : {0, 1, 2}
    z : float or array_like
        Strictly positive argument(s).
    """
    z = _check(order, z)
    zz = np.atleast_1d(z)
    k0, k1 = _scaled_all(zz)
    if order == 0:
        out = k0
    elif order == 1:
        out = k1
    else:
        out = k0 + 2.0 / zz * k1
    return out.reshape(z.shape) if z.ndim else float(out[0])


def bessel_k(order, z):
    """Modified Bessel function of the second kind ``K_order(z)``.

    Raises :class:`DomainError` for ``z > OVERFLOW_THRESHOLD``, where the
    unscaled value underflows; call :func:`bessel_k_scaled` there instead.
    """
    z = _check(order, z)
    if np.any(z > OVERFLOW_THRESHOLD):
        raise DomainError(
            f"z > {OVERFLOW_THRESHOLD} underflows; use bessel_k_scaled instead")
    zz = np.atleast_1d(z)
    small = zz <= _SERIES_MAX_Z
    k0 = np.empty_like(zz)
    k1 = np.empty_like(zz)
    if small.any():
        k0[small], k1[small] = _series_k0_k1(zz[small])
    if (~small).any():
        big = zz[~small]
        s0, s1 = _cf2_scaled_k0_k1(big)
        e = np.exp(-big)
        k0[~small] = s0 * e
        k1[~small] = s1 * e
    if order == 0:
        out = k0
    elif order == 1:
        out = k1
    else:
        out = k0 + 2.0 / zz * k1
    return out.reshape(z.shape) if z.ndim else float(out[0])


def scaled_triple(z):
    """Return ``(e^z K0, e^z K1, e^z K2)`` for an array of positive ``z``."""
    z = _check(0, z)
    k0, k1 = _scaled_all(np.atleast_1d(z))
    k2 = k0 + 2.0 / np.atleast_1d(z) * k1
    return k0.reshape(z.shape), k1.reshape(z.shape), k2.reshape(z.shape)
