"""Closed centerline curves, orthonormal frames and the identification map.

A :class:`ClosedCurve` stores ``N`` samples of ``X(s)`` on the uniform grid
``s_i = i/N``.  Periodicity is structural: every derivative is spectral.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GeometryError
from .grid import (from_coeffs, resample, spectral_derivative, to_coeffs,
                   wavenumbers)

__all__ = [
    "ClosedCurve",
    "OrthonormalFrame",
    "circle",
    "perturbed_circle",
    "ellipse",
    "trefoil",
    "star_norm",
    "r_star_bound",
    "reparameterize_arclength",
    "build_frame",
    "straight_frame",
    "phi_apply",
    "phi_inverse",
    "mean_subtract_phi",
    "inextensibility_identities",
    "bending_energy",
    "curvature",
    "load_curve_csv",
    "write_curve_csv",
]

ARCLENGTH_TOL = 1e-8


@dataclass(frozen=True)
class ClosedCurve:
    """Samples ``points`` of shape (N, 3) of a closed curve on [0, 1)."""

    points: np.ndarray
    arclength_tol: float = ARCLENGTH_TOL

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ConfigurationError("curve samples must have shape (N, 3)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def deriv(self, order=1, filter_tol=None):
        """Spectral derivative; ``filter_tol="auto"`` drops roundoff modes first."""
        return spectral_derivative(self.points, order, filter_tol=filter_tol)

    def speed(self):
        return np.linalg.norm(self.deriv(1), axis=1)

    def length(self):
        # the speed is smooth and periodic, so the grid mean is spectrally exact
        return float(np.mean(self.speed()))

    def arclength_defect(self):
        return float(np.max(np.abs(self.speed() - 1.0)))

    @property
    def is_arclength(self):
        return self.arclength_defect() <= self.arclength_tol

    def transformed(self, rotation=None, shift=None):
        """Rigid motion ``x -> R x + b`` applied to every sample."""
        pts = self.points
        if rotation is not None:
            pts = pts @ np.asarray(rotation).T
        if shift is not None:
            pts = pts + np.asarray(shift)
        return ClosedCurve(pts, self.arclength_tol)


@dataclass(frozen=True)
class OrthonormalFrame:
    """Frame ``(e_t, e_n1, e_n2)`` with coefficients of the frame ODE.

    ``kappa3`` is the constant normal-plane twist, chosen in (-pi, pi] so the
    frame closes periodically.
    """

    e_t: np.ndarray
    e_n1: np.ndarray
    e_n2: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    kappa3: float
    x_s: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return self.e_t.shape[0]

    def rotated(self, angle):
        """Same frame with the normal pair rotated by a constant ``angle``."""
        c, s = np.cos(angle), np.sin(angle)
        n1 = c * self.e_n1 + s * self.e_n2
        n2 = -s * self.e_n1 + c * self.e_n2
        k1 = c * self.kappa1 + s * self.kappa2
        k2 = -s * self.kappa1 + c * self.kappa2
        return OrthonormalFrame(self.e_t, n1, n2, k1, k2, self.kappa3, self.x_s)


# --- builders ---------------------------------------------------------------

def _from_angle(n, fn):
    theta = 2 * np.pi * np.arange(n) / n
    return ClosedCurve(fn(theta))


def circle(n, length=1.0, center=(0.0, 0.0, 0.0)):
    """Planar circle of the given length in the xy-plane, arclength-scaled."""
    r = length / (2 * np.pi)
    theta = 2 * np.pi * np.arange(n) / n
    pts = np.stack([r * np.cos(theta), r * np.sin(theta), np.zeros(n)], axis=1)
    return ClosedCurve(pts + np.asarray(center, dtype=float))


def perturbed_circle(n, mode=3, amplitude=1e-2, lift=0.0, length=1.0):
    """Circle with a radial ``mode`` perturbation of relative ``amplitude``.

    ``lift`` adds an out-of-plane ``sin(2 theta)`` component (relative to the
    radius) to make the curve non-planar.  The result is reparameterized by
    arclength and rescaled to the requested length.
    """
    r = 1.0 / (2 * np.pi)

    def shape(theta):
        rad = r * (1.0 + amplitude * np.cos(mode * theta))
        return np.stack([rad * np.cos(theta), rad * np.sin(theta),
                         lift * r * np.sin(2 * theta)], axis=1)

    raw = _from_angle(n, shape)
    out = reparameterize_arclength(raw, normalize=True)
    if length != 1.0:
        out = ClosedCurve(out.points * length)
    return out


def ellipse(n, a=0.2, b=0.15):
    """Ellipse with semi-axes a, b in the angle parameterization (not arclength)."""
    return _from_angle(n, lambda t: np.stack([a * np.cos(t), b * np.sin(t), 0 * t], axis=1))


def trefoil(n, tube=0.3, scale=1.0):
    """Unit-length (2, 3) torus knot, arclength parameterized.

    ``tube`` is the ratio of tube to core radius; larger values give a more
    strongly curved knot.
    """

    def shape(t):
        rad = 1.0 + tube * np.cos(3 * t)
        return np.stack([rad * np.cos(2 * t), rad * np.sin(2 * t),
                         tube * np.sin(3 * t)], axis=1)

    out = reparameterize_arclength(_from_angle(n, shape), normalize=True)
    return ClosedCurve(out.points * scale) if scale != 1.0 else out


# --- scalar functionals -----------------------------------------------------

def star_norm(X):
    """Discrete non-self-intersection functional.

    Minimum over sample pairs of ``|X(s) - X(s')| / d(s, s')`` with the
    periodic parameter distance ``d(s, s') = min(|s - s'|, 1 - |s - s'|)``.
    """
    pts = X.points if isinstance(X, ClosedCurve) else np.asarray(X, dtype=float)
    n = pts.shape[0]
    if n < 8:
        raise ConfigurationError("star_norm needs at least 8 samples")
    best = np.inf
    # row blocks keep the pairwise table small for large n
    idx = np.arange(n)
    for start in range(0, n, 256):
        rows = idx[start:start + 256]
        diff = pts[rows, None, :] - pts[None, :, :]
        chord = np.linalg.norm(diff, axis=2)
        gap = np.abs(rows[:, None] - idx[None, :]) / n
        dist = np.minimum(gap, 1.0 - gap)
        mask = dist > 0
        best = min(best, float(np.min(chord[mask] / dist[mask])))
    return best


def curvature(X):
    """Geometric curvature ``|X_s x X_ss| / |X_s|^3`` at every sample."""
    xs = X.deriv(1)
    xss = X.deriv(2)
    sp = np.linalg.norm(xs, axis=1)
    return np.linalg.norm(np.cross(xs, xss), axis=1) / sp ** 3


def r_star_bound(X):
    """Admissible-radius surrogate ``min(c_Gamma / 2, 1 / (2 max curvature))``.

    For arclength curves the curvature equals ``|X_ss|``.
    """
    c_gamma = star_norm(X)
    kmax = float(np.max(curvature(X)))
    if kmax == 0.0:
        return c_gamma / 2
    return min(c_gamma / 2.0, 1.0 / (2.0 * kmax))


def bending_energy(X):
    """Bending energy ``int |X_ss|^2 ds`` in the geometric sense.

    Computed as ``int kappa^2 |X_s| ds`` so that it is invariant under
    reparameterization and equals ``int |X_ss|^2 ds`` on arclength curves.
    The factor 1/2 of the physical energy is not included.
    """
    xs = X.deriv(1)
    xss = X.deriv(2)
    sp = np.linalg.norm(xs, axis=1)
    cross = np.linalg.norm(np.cross(xs, xss), axis=1)
    ok = sp > 0
    integrand = np.zeros_like(sp)
    integrand[ok] = cross[ok] ** 2 / sp[ok] ** 5
    return float(np.mean(integrand))


def inextensibility_identities(X, filter_tol="auto"):
    """Sup-norm residuals of the identities implied by ``|X_s|^2 = 1``.

    Returns a dict with keys ``first`` (X_s.X_ss), ``second``
    (X_s.X_sss + |X_ss|^2) and ``third`` (X_s.X_ssss + 3 X_ss.X_sss).
    Roundoff-level coefficients are filtered before differentiating (pass
    ``filter_tol=None`` for raw derivatives); otherwise the fourth derivative
    of FFT noise dominates the residual.
    """
    d1, d2, d3, d4 = (spectral_derivative(X.points, k, filter_tol=filter_tol)
                      for k in (1, 2, 3, 4))
    dot = lambda a, b: np.sum(a * b, axis=1)  # noqa: E731
    return {
        "first": float(np.max(np.abs(dot(d1, d2)))),
        "second": float(np.max(np.abs(dot(d1, d3) + dot(d2, d2)))),
        "third": float(np.max(np.abs(dot(d1, d4) + 3 * dot(d2, d3)))),
    }


# --- reparameterization -----------------------------------------------------

def _eval_series(coeffs, k, theta):
    """Evaluate sum_k c_k exp(2 pi i k theta) at arbitrary points theta."""
    phase = np.exp(2j * np.pi * np.outer(theta, k))
    return (phase @ coeffs).real


def reparameterize_arclength(X, normalize=False, tol=1e-15, max_iter=50):
    """Resample ``X`` at equal arclength spacing, keeping ``X(0)`` fixed.

    The cumulative length is integrated spectrally and inverted by Newton's
    method; the curve is then evaluated by its trigonometric interpolant.
    Total length is preserved unless ``normalize`` is set, in which case the
    curve is scaled about its centroid to unit length.
    """
    n = X.n
    k = wavenumbers(n)
    # Nyquist term is not smooth to evaluate off-grid; drop its odd part
    k_eval = k.copy()
    c_x = to_coeffs(X.points)
    nyq = n // 2
    c_x = c_x.copy()
    speed = X.speed()
    if np.min(speed) <= 1e-12 * max(np.max(speed), 1.0):
        raise GeometryError("vanishing speed; cannot reparameterize by arclength")
    c_sp = to_coeffs(speed)
    total = c_sp[0].real
    s_target = np.arange(n) / n
    nz = k != 0
    kk = k[nz]
    cs = c_sp[nz]

    def cum(theta):
        ph = np.exp(2j * np.pi * np.outer(theta, kk))
        return total * theta + ((ph - 1.0) @ (cs / (2j * np.pi * kk))).real

    def sp(theta):
        return _eval_series(c_sp, k, theta)

    theta = s_target.copy()
    for _ in range(max_iter):
        step = (cum(theta) - total * s_target) / sp(theta)
        theta -= step
        if np.max(np.abs(step)) < tol:
            break
    theta[0] = 0.0
    # split the Nyquist coefficient symmetrically so off-grid evaluation is real
    c_eval = c_x
    k_eval = k.copy()
    if n % 2 == 0:
        c_eval = np.concatenate([c_x, 0.5 * c_x[nyq:nyq + 1]], axis=0)
        c_eval[nyq] *= 0.5
        k_eval = np.concatenate([k, [-nyq]])
    pts = _eval_series(c_eval, k_eval, theta)
    if normalize:
        centroid = pts.mean(axis=0)
        pts = centroid + (pts - centroid) / total
    return ClosedCurve(pts, X.arclength_tol)


# --- frames -----------------------------------------------------------------

def _candidate_directions(m=256):
    i = np.arange(m) + 0.5
    phi = np.arccos(1 - 2 * i / m)
    th = np.pi * (1 + 5 ** 0.5) * i
    return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)


def _reference_direction(e_t):
    cand = np.vstack([np.eye(3), _candidate_directions()])
    # worst-case sine between each candidate and the tangent indicatrix
    cosines = np.abs(e_t @ cand.T)
    worst = np.sqrt(np.clip(1.0 - np.max(cosines, axis=0) ** 2, 0.0, 1.0))
    best = int(np.argmax(worst))
    return cand[best], float(worst[best])


def _wrap_angle(a):
    a = np.mod(a + np.pi, 2 * np.pi) - np.pi
    return np.pi if a == -np.pi else a


def build_frame(X, min_reference_sine=0.2, check_arclength=True):
    """Orthonormal frame along an arclength curve with constant twist.

    A smooth periodic reference normal is obtained by projecting a fixed
    direction onto the normal planes; its twist rate ``w`` is integrated
    spectrally.  The parallel-transport holonomy over one period is
    ``-int w``, so ``kappa3`` is that integral reduced to (-pi, pi] and the
    reference pair is rotated by ``kappa3 s - int_0^s w`` to close the frame.
    If no reference direction stays well away from the tangent indicatrix,
    a fourth-order Runge-Kutta parallel transport is used instead.

    ``check_arclength=False`` accepts slightly non-arclength curves (such as
    intermediate time-stepping stages); ``e_t`` is then the normalized
    ``X_s`` while ``x_s`` keeps the raw derivative.
    """
    if check_arclength and not X.is_arclength:
        raise GeometryError(
            f"build_frame needs an arclength curve (defect {X.arclength_defect():.3g})")
    xs = X.deriv(1)
    xss = X.deriv(2)
    e_t = xs / np.linalg.norm(xs, axis=1, keepdims=True)
    a, worst = _reference_direction(e_t)
    if worst >= min_reference_sine:
        u1 = a[None, :] - (e_t @ a)[:, None] * e_t
        u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
        u2 = np.cross(e_t, u1)
        w = np.sum(spectral_derivative(u1, 1) * u2, axis=1)
        total = float(np.mean(w))
        kappa3 = _wrap_angle(total)
        # periodic antiderivative of w - mean(w)
        c = to_coeffs(w - total)
        k = wavenumbers(X.n)
        c_int = np.zeros_like(c)
        nz = k != 0
        c_int[nz] = c[nz] / (2j * np.pi * k[nz])
        c_int[X.n // 2] = 0.0
        w_int = from_coeffs(c_int)
        w_int -= w_int[0]
        s = np.arange(X.n) / X.n
        phi = (kappa3 - total) * s - w_int
        cp, sn = np.cos(phi)[:, None], np.sin(phi)[:, None]
        n1 = cp * u1 + sn * u2
        n2 = -sn * u1 + cp * u2
    else:
        n1, n2, kappa3 = _transport_rk4(X, e_t)
    k1 = np.sum(xss * n1, axis=1)
    k2 = np.sum(xss * n2, axis=1)
    return OrthonormalFrame(e_t, n1, n2, k1, k2, float(kappa3), xs)


def _transport_rk4(X, e_t, refine=8):
    """Parallel transport of a normal vector by RK4 on a refined grid."""
    n = X.n
    m = refine * n
    ts = resample(X.deriv(1), 2 * m)
    kss = resample(X.deriv(2), 2 * m)
    h = 1.0 / m

    def rhs(y, i):
        return -(y @ kss[i]) * ts[i]

    t0 = e_t[0]
    guess = np.eye(3)[int(np.argmin(np.abs(t0)))]
    y = guess - (guess @ t0) * t0
    y /= np.linalg.norm(y)
    y0 = y.copy()
    out = np.empty((n, 3))
    for step in range(m):
        if step % refine == 0:
            out[step // refine] = y
        i = 2 * step
        k1 = rhs(y, i)
        k2 = rhs(y + 0.5 * h * k1, i + 1)
        k3 = rhs(y + 0.5 * h * k2, i + 1)
        k4 = rhs(y + h * k3, (i + 2) % (2 * m))
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    # holonomy angle of the transported vector around t(0)
    theta = np.arctan2(np.cross(y0, y) @ t0, y0 @ y)
    kappa3 = _wrap_angle(-theta)
    u1 = out - np.sum(out * e_t, axis=1, keepdims=True) * e_t
    u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
    u2 = np.cross(e_t, u1)
    s = np.arange(n) / n
    cp, sn = np.cos(kappa3 * s)[:, None], np.sin(kappa3 * s)[:, None]
    return cp * u1 + sn * u2, -sn * u1 + cp * u2, kappa3


def straight_frame(n):
    """The identity frame (e_z, e_x, e_y) of the straight cylinder."""
    ones = np.ones((n, 1))
    ez = ones * np.array([0.0, 0.0, 1.0])
    ex = ones * np.array([1.0, 0.0, 0.0])
    ey = ones * np.array([0.0, 1.0, 0.0])
    zero = np.zeros(n)
    return OrthonormalFrame(ez, ex, ey, zero, zero.copy(), 0.0, ez)


# --- identification map -----------------------------------------------------

def _frame_axes(frame, arr):
    shape = (frame.n,) + (1,) * (arr.ndim - 2) + (3,)
    return (frame.e_t.reshape(shape), frame.e_n1.reshape(shape), frame.e_n2.reshape(shape))


def phi_apply(frame, g):
    """Map straight-cylinder components to the curved frame.

    ``Phi g = g_z e_t + g_x e_n1 + g_y e_n2``; ``g`` has shape (N, ..., 3).
    """
    g = np.asarray(g, dtype=float)
    et, n1, n2 = _frame_axes(frame, g)
    return g[..., 2:3] * et + g[..., 0:1] * n1 + g[..., 1:2] * n2


def phi_inverse(frame, h):
    """Inverse of :func:`phi_apply`: ``(h.e_n1, h.e_n2, h.e_t)`` in (x, y, z)."""
    h = np.asarray(h, dtype=float)
    et, n1, n2 = _frame_axes(frame, h)
    return np.stack([np.sum(h * n1, axis=-1), np.sum(h * n2, axis=-1),
                     np.sum(h * et, axis=-1)], axis=-1)


def mean_subtract_phi(frame, h):
    """``h - Phi(int Phi^-1 h ds)``: remove the frame-relative mean."""
    mean = np.mean(phi_inverse(frame, h), axis=0, keepdims=True)
    return np.asarray(h, dtype=float) - phi_apply(frame, np.broadcast_to(mean, np.shape(h)))


# --- I/O --------------------------------------------------------------------

def load_curve_csv(path, n_samples=None):
    """Read ``s, x, y, z`` samples and resample onto an ``n_samples`` grid."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec[:4]])
            except ValueError:
                continue  # header line
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[1] < 4 or data.shape[0] < 8:
        raise ConfigurationError(f"{path}: expected at least 8 rows of s,x,y,z")
    pts = data[np.argsort(data[:, 0], kind="stable"), 1:4]
    if n_samples is not None and n_samples != pts.shape[0]:
        pts = resample(pts, n_samples)
    return ClosedCurve(pts)


def write_curve_csv(path, X):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "x", "y", "z"])
        for i, p in enumerate(X.points):
            w.writerow([f"{i / X.n:.17g}"] + [f"{v:.17g}" for v in p])
