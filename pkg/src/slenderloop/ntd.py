"""Fourier-multiplier operators of the straight and curved slender body.

The straight periodic cylinder of radius ``epsilon`` has a Neumann-to-Dirichlet
map that is diagonal in Fourier.  Tangential (``z``) and normal (``x, y``)
force components are multiplied by ``m_t(k)`` and ``m_n(k)``, both explicit
in the Bessel functions ``K_j(2 pi epsilon |k|)``.  Everything else here is
built from those two symbols:

* the principal curved map ``Phi Lbar Phi^-1`` through a frame,
* the resolvents ``(I - Lbar^t d_ss)^-1`` and ``(I - Lbar^t d_ss)^-1 d_s``,
* the linear semigroup ``exp(-t Lbar d_s^4)``,
* a resistive-force-theory baseline.

Vector fields have shape (N, ..., 3) with components ordered (x, y, z).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import phi_apply, phi_inverse
from .grid import apply_multiplier, from_coeffs, to_coeffs, wavenumbers
from .specialfn import scaled_triple

__all__ = [
    "MultiplierTable",
    "multiplier_tangential",
    "multiplier_normal",
    "multiplier_table",
    "straight_ntd_apply",
    "curved_ntd_apply",
    "rft_apply",
    "RFT_CONSTANT",
    "resolvent_tables",
    "apply_resolvent",
    "apply_resolvent_ds",
    "semigroup_apply",
    "BoundEntry",
    "certify_multiplier_bounds",
    "bound_stability",
]

RFT_CONSTANT = 1.0 / (8.0 * np.pi)


def _check_eps(epsilon):
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")


def _symbols(epsilon, k):
    """(m_t, m_n) at real |k| > 0, from scaled Bessel values.

    Both expressions are homogeneous in (K0, K1, K2), so the common factor
    ``e^{-z}`` cancels and the scaled values are used throughout.
    """
    z = 2.0 * np.pi * epsilon * np.abs(k)
    k0, k1, k2 = scaled_triple(z)
    mt = (2 * k0 * k1 + z * (k0 * k0 - k1 * k1)) / (4 * np.pi * z * k1 * k1)
    num = 2 * k0 * k1 * k2 + z * (k1 * k1 * (k0 + k2) - 2 * k0 * k0 * k2)
    den = 2 * np.pi * z * (4 * k1 * k1 * k2 + z * k1 * (k1 * k1 - k0 * k2))
    return mt, num / den


def _evaluate(which, epsilon, k):
    _check_eps(epsilon)
    k = np.asarray(k, dtype=float)
    kk = np.atleast_1d(k)
    out = np.zeros_like(kk)
    nz = kk != 0
    if nz.any():
        out[nz] = _symbols(epsilon, kk[nz])[which]
    return out.reshape(k.shape) if k.ndim else float(out[0])


def multiplier_tangential(epsilon, k):
    """Tangential symbol ``m_t(k)`` of the straight cylinder.

    The mean mode ``k = 0`` returns 0 (mean-zero convention).  Accepts real
    ``k`` so the symbol can be sampled off the integer lattice.
    """
    return _evaluate(0, epsilon, k)


def multiplier_normal(epsilon, k):
    """Normal symbol ``m_n(k)`` of the straight cylinder; 0 at ``k = 0``."""
    return _evaluate(1, epsilon, k)


@dataclass(frozen=True)
class MultiplierTable:
    """Per-mode multiplier values on the FFT-ordered modes of an N-grid.

    ``m_t, m_n`` are 0 at the mean mode.  ``m1`` is 1 there and ``m2`` 0;
    ``m2`` is also zeroed at the Nyquist mode so it maps real fields to real
    fields.  ``lambda_t, lambda_n`` are the semigroup rates ``(2 pi k)^4 m``.
    """

    epsilon: float
    k: np.ndarray = field(repr=False)
    m_t: np.ndarray = field(repr=False)
    m_n: np.ndarray = field(repr=False)
    m1: np.ndarray = field(repr=False)
    m2: np.ndarray = field(repr=False)
    lambda_t: np.ndarray = field(repr=False)
    lambda_n: np.ndarray = field(repr=False)
    mean_closure: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.mean_closure is None:
            # symbols used on the mean mode by curved_ntd_apply
            pair = (multiplier_normal(self.epsilon, 1.0), multiplier_tangential(self.epsilon, 1.0))
            object.__setattr__(self, "mean_closure", pair)

    @property
    def n(self):
        return self.k.shape[0]

    def component_symbols(self, isotropic=False):
        """(N, 3) array of per-component symbols: m_n on x, y and m_t on z."""
        zsym = self.m_n if isotropic else self.m_t
        return np.stack([self.m_n, self.m_n, zsym], axis=1)

    def component_rates(self, isotropic=False):
        zrate = self.lambda_n if isotropic else self.lambda_t
        return np.stack([self.lambda_n, self.lambda_n, zrate], axis=1)


def _build_table(epsilon, k, nyquist=None):
    _check_eps(epsilon)
    k = np.asarray(k, dtype=float)
    mt = multiplier_tangential(epsilon, k)
    mn = multiplier_normal(epsilon, k)
    w2 = (2 * np.pi * k) ** 2
    m1 = 1.0 / (1.0 + w2 * mt)
    m2 = 2j * np.pi * k * m1
    if nyquist is not None:
        m2[nyquist] = 0.0
    return MultiplierTable(float(epsilon), k, mt, mn, m1, m2, w2 * w2 * mt, w2 * w2 * mn)


def multiplier_table(epsilon, n):
    """Tabulate every symbol on the modes of an ``n``-point grid."""
    if n < 2:
        raise ConfigurationError("multiplier table needs at least two modes")
    return _build_table(epsilon, wavenumbers(n), n // 2 if n % 2 == 0 else None)


def resolvent_tables(epsilon, k_max):
    """Modes ``0..k_max`` with the symbols of the table for each.

    Returns a :class:`MultiplierTable` over nonnegative modes, for dumps and
    bound sweeps rather than for applying to fields.
    """
    if int(k_max) != k_max or k_max < 0:
        raise ConfigurationError(f"k_max must be a nonnegative integer, got {k_max!r}")
    return _build_table(epsilon, np.arange(int(k_max) + 1))


def _match(table, u):
    if table.n != u.shape[0]:
        raise ConfigurationError(
            f"multiplier table built for {table.n} modes, field has {u.shape[0]}")


def _componentwise(u, sym):
    # sym has shape (N, 3); broadcast across any middle batch axes
    c = to_coeffs(u)
    shape = (sym.shape[0],) + (1,) * (u.ndim - 2) + (3,)
    return from_coeffs(c * sym.reshape(shape))


def straight_ntd_apply(table, f, isotropic=False):
    """Straight-cylinder map: m_t on the z-component, m_n on x and y.

    The mean mode of the output is zero.
    """
    f = np.asarray(f, dtype=float)
    _match(table, f)
    return _componentwise(f, table.component_symbols(isotropic))


def curved_ntd_apply(frame, table, f, mean_closure=True):
    """Principal curved map ``Phi Lbar Phi^-1`` applied to the data ``f``.

    ``f`` is split into its frame mean ``Phi(int Phi^-1 f)`` and the
    mean-free remainder.  The remainder goes through the straight map.  The
    straight map annihilates the mean; with ``mean_closure`` it is instead
    multiplied by the first-mode symbols ``(m_n(1), m_n(1), m_t(1))``, which
    keeps the operator positive definite while leaving it symmetric.
    """
    f = np.asarray(f, dtype=float)
    _match(table, f)
    # Phi^-1 of the mean-subtracted data is Phi^-1 f minus its mean
    g = phi_inverse(frame, f)
    mean = np.mean(g, axis=0, keepdims=True)
    out = straight_ntd_apply(table, g - mean)
    if mean_closure:
        mn1, mt1 = table.mean_closure
        out = out + mean * np.array([mn1, mn1, mt1])
    return phi_apply(frame, out)


def rft_apply(X, epsilon, f, c=RFT_CONSTANT):
    """Local drag ``c |log eps| (I + t t^T) f`` with unit tangent ``t``."""
    _check_eps(epsilon)
    f = np.asarray(f, dtype=float)
    xs = X.deriv(1)
    t = xs / np.linalg.norm(xs, axis=1, keepdims=True)
    shape = (t.shape[0],) + (1,) * (f.ndim - 2) + (3,)
    t = t.reshape(shape)
    return c * abs(np.log(epsilon)) * (f + np.sum(f * t, axis=-1, keepdims=True) * t)


def apply_resolvent(table, u):
    """``(I - Lbar^t d_ss)^-1 u`` by mode-wise multiplication with m1."""
    u = np.asarray(u)
    _match(table, u)
    return apply_multiplier(u, table.m1)


def apply_resolvent_ds(table, u):
    """``(I - Lbar^t d_ss)^-1 d_s u`` by mode-wise multiplication with m2."""
    u = np.asarray(u)
    _match(table, u)
    return apply_multiplier(u, table.m2)


def semigroup_apply(table, t, V, isotropic=False):
    """Linear flow ``exp(-t Lbar d_s^4) V``; the mean mode is unchanged."""
    if not t >= 0:
        raise DomainError(f"semigroup time must be nonnegative, got {t!r}")
    V = np.asarray(V, dtype=float)
    _match(table, V)
    return _componentwise(V, np.exp(-t * table.component_rates(isotropic)))


# --- bound certification ----------------------------------------------------

@dataclass(frozen=True)
class BoundEntry:
    """Smallest constant ``c`` with ``|d^l f(k)| <= c w(k)`` over a regime."""

    symbol: str
    regime: str
    order: int
    constant: float
    k_at_max: float
    n_modes: int


def _weights(symbol, regime, ell, k, eps):
    le = abs(np.log(eps))
    low_damp = 1.0 / (1.0 + k * k * le)
    table = {
        ("m_t_inv", "high"): eps * k ** (1 - ell),
        ("m_t_inv", "low"): k ** (-ell) / le,
        ("m_t", "high"): k ** (-ell - 1) / eps,
        ("m_t", "low"): le * k ** (-ell),
        ("m1", "high"): eps * k ** (-1 - ell),
        ("m1", "low"): k ** (-ell) * low_damp,
        ("m2", "high"): eps * k ** (-ell),
        ("m2", "low"): k ** (1 - ell) * low_damp,
    }
    return table[(symbol, regime)]


def certify_multiplier_bounds(epsilon, high_span=64.0):
    """Fit the constants of the derivative bounds on ``m_t^{-1}, m_t, m1, m2``.

    The low regime is ``1 <= |k| < 1/(2 pi eps)``; the high regime runs from
    there to ``high_span/(2 pi eps)``.  Derivatives of order 1 and 2 use
    centered differences on the integer lattice, so they are sampled where
    both neighbours exist.  Returns a list of :class:`BoundEntry`.
    """
    if not 1e-4 <= epsilon <= 1e-1:
        raise DomainError(f"bound certification needs epsilon in [1e-4, 1e-1], got {epsilon!r}")
    k_split = 1.0 / (2 * np.pi * epsilon)
    k_top = int(np.ceil(high_span * k_split))
    k = np.arange(0, k_top + 2, dtype=float)
    mt = multiplier_tangential(epsilon, k)
    w2 = (2 * np.pi * k) ** 2
    m1 = 1.0 / (1.0 + w2 * mt)
    values = {
        "m_t_inv": np.where(k > 0, 1.0 / np.where(mt > 0, mt, 1.0), 0.0),
        "m_t": mt,
        "m1": m1,
        "m2": 2 * np.pi * k * m1,  # modulus of the purely imaginary symbol
    }
    entries = []
    for name, v in values.items():
        derivs = {
            0: v,
            1: np.concatenate([[np.nan], 0.5 * (v[2:] - v[:-2]), [np.nan]]),
            2: np.concatenate([[np.nan], v[2:] - 2 * v[1:-1] + v[:-2], [np.nan]]),
        }
        for ell, d in derivs.items():
            k_lo = 1 if ell == 0 else 2  # differences must not touch k = 0
            for regime in ("low", "high"):
                if regime == "low":
                    sel = (k >= k_lo) & (k < k_split)
                else:
                    sel = (k >= max(k_split, k_lo)) & (k <= k_top)
                kk = k[sel]
                ratio = np.abs(d[sel]) / _weights(name, regime, ell, kk, epsilon)
                i = int(np.argmax(ratio))
                entries.append(BoundEntry(name, regime, ell, float(ratio[i]), float(kk[i]), int(kk.size)))
    return entries


def bound_stability(epsilons=(1e-2, 1e-3, 1e-4), factor=2.0):
    """Max/min spread of every fitted constant across ``epsilons``.

    Returns ``{(symbol, regime, order): (constants, spread, ok)}``; a bound is
    stable when its spread is at most ``factor``.
    """
    fits = [certify_multiplier_bounds(e) for e in epsilons]
    out = {}
    for i, entry in enumerate(fits[0]):
        consts = [f[i].constant for f in fits]
        spread = max(consts) / min(consts)
        out[(entry.symbol, entry.regime, entry.order)] = (consts, spread, spread <= factor)
    return out
