import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderloop.errors import ConfigurationError, DomainError
from slenderloop.geometry import build_frame, perturbed_circle, straight_frame
from slenderloop.grid import apply_multiplier, spectral_derivative, wavenumbers
from slenderloop.ntd import (RFT_CONSTANT, apply_resolvent, apply_resolvent_ds, bound_stability,
                             certify_multiplier_bounds, curved_ntd_apply, multiplier_normal,
                             multiplier_table, multiplier_tangential, resolvent_tables,
                             rft_apply, semigroup_apply, straight_ntd_apply)
from slenderloop.oracle import dense_matrix_of
from slenderloop.specialfn import bessel_k


def _oracle_symbols(eps, k):
    with mpmath.workdps(40):
        z = 2 * mpmath.pi * mpmath.mpf(eps) * abs(k)
        k0, k1, k2 = (mpmath.besselk(j, z) for j in (0, 1, 2))
        mt = (2 * k0 * k1 + z * (k0 ** 2 - k1 ** 2)) / (4 * mpmath.pi * z * k1 ** 2)
        mn = ((2 * k0 * k1 * k2 + z * (k1 ** 2 * (k0 + k2) - 2 * k0 ** 2 * k2))
              / (2 * mpmath.pi * z * (4 * k1 ** 2 * k2 + z * k1 * (k1 ** 2 - k0 * k2))))
        return float(mt), float(mn)


@settings(max_examples=40, deadline=None)
@given(eps=st.sampled_from([1e-1, 1e-2, 1e-3, 1e-4]), k=st.integers(1, 20000))
def test_symbols_match_extended_precision(eps, k):
    mt, mn = _oracle_symbols(eps, k)
    assert multiplier_tangential(eps, k) == pytest.approx(mt, rel=1e-12)
    assert multiplier_normal(eps, k) == pytest.approx(mn, rel=1e-12)


def test_symbols_even_positive_and_zero_mean():
    k = np.arange(-512, 513)
    for eps in (1e-2, 1e-3):
        for fn in (multiplier_tangential, multiplier_normal):
            m = fn(eps, k)
            np.testing.assert_array_equal(m, m[::-1])
            assert m[512] == 0 and np.all(m[k != 0] > 0)


def test_symbol_asymptotics():
    eps = 1e-3
    # large z: both symbols decay like 1/z
    k = 1e5
    z = 2 * np.pi * eps * k
    assert multiplier_tangential(eps, k) * 4 * np.pi * z == pytest.approx(1.0, rel=2 / z)
    # small z: closed form (2 K0 - 1)/(4 pi) up to O(z^2 |log z|)
    for eps in (1e-6, 1e-8):
        closed = (2 * bessel_k(0, 2 * np.pi * eps) - 1) / (4 * np.pi)
        assert multiplier_tangential(eps, 1) == pytest.approx(closed, rel=1e-9)


def test_bad_epsilon():
    for eps in (0.0, -1e-2, np.nan):
        with pytest.raises((DomainError, ConfigurationError)):
            multiplier_table(eps, 16)


def test_table_relations():
    t = multiplier_table(1e-2, 64)
    w2 = (2 * np.pi * t.k) ** 2
    np.testing.assert_allclose(t.m1 * (1 + w2 * t.m_t), 1.0, rtol=1e-14)
    assert t.m2[32] == 0 and t.m1[0] == 1 and t.m2[0] == 0
    np.testing.assert_allclose(t.lambda_n, w2 ** 2 * t.m_n, rtol=1e-14)
    r = resolvent_tables(1e-2, 10)
    np.testing.assert_array_equal(r.k, np.arange(11))
    with pytest.raises(ConfigurationError):
        resolvent_tables(1e-2, -1)


def test_straight_map_is_diagonal_in_fourier():
    n = 16
    t = multiplier_table(1e-2, n)
    mat = dense_matrix_of(lambda f: straight_ntd_apply(t, f), n, components=3)
    diag = np.diag(mat)
    assert np.max(np.abs(mat - np.diag(diag))) < 1e-14
    expect = np.stack([t.m_n, t.m_n, t.m_t], axis=1).ravel()
    np.testing.assert_allclose(diag.real, expect, atol=1e-15)


def test_curved_map_on_straight_frame_is_straight_map(rng):
    t = multiplier_table(1e-2, 32)
    f = rng.standard_normal((32, 3))
    f -= f.mean(axis=0)
    np.testing.assert_allclose(curved_ntd_apply(straight_frame(32), t, f), straight_ntd_apply(t, f),
                               atol=1e-14)


def test_curved_map_symmetric_positive():
    n = 32
    X = perturbed_circle(n, 3, 1e-2, lift=0.05)
    fr = build_frame(X)
    t = multiplier_table(1e-2, n)
    mat = dense_matrix_of(lambda f: curved_ntd_apply(fr, t, f), n, basis="grid", components=3)
    assert np.max(np.abs(mat - mat.T)) < 1e-14 * np.max(np.abs(mat))
    assert np.min(np.linalg.eigvalsh(0.5 * (mat + mat.T))) > 0
    no_closure = dense_matrix_of(lambda f: curved_ntd_apply(fr, t, f, mean_closure=False), n,
                                 basis="grid", components=3)
    assert np.linalg.matrix_rank(no_closure, tol=1e-10 * np.max(np.abs(no_closure))) == 3 * n - 3


def test_curved_map_ignores_normal_rotation(wobbly_frame, table128, rng):
    f = rng.standard_normal((128, 3))
    a = curved_ntd_apply(wobbly_frame, table128, f)
    b = curved_ntd_apply(wobbly_frame.rotated(1.3), table128, f)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_curved_map_batches(wobbly_frame, table128, rng):
    f = rng.standard_normal((128, 4, 3))
    out = curved_ntd_apply(wobbly_frame, table128, f)
    np.testing.assert_allclose(out[:, 2], curved_ntd_apply(wobbly_frame, table128, f[:, 2]),
                               atol=1e-14)
    with pytest.raises(ConfigurationError):
        curved_ntd_apply(wobbly_frame, table128, f[:64])


def test_resolvents(rng):
    t = multiplier_table(1e-2, 64)
    u = rng.standard_normal(64)
    v = apply_resolvent(t, u)
    # (I - m_t d_ss) v = u
    back = v - apply_multiplier(spectral_derivative(v, 2), t.m_t)
    np.testing.assert_allclose(back, u, atol=1e-12)
    w = apply_resolvent_ds(t, u)
    np.testing.assert_allclose(w, apply_resolvent(t, spectral_derivative(u, 1)), atol=1e-12)


def test_semigroup(rng):
    t = multiplier_table(1e-2, 64)
    V = rng.standard_normal((64, 3))
    np.testing.assert_allclose(semigroup_apply(t, 0.0, V), V, atol=1e-14)
    ab = semigroup_apply(t, 2e-4, semigroup_apply(t, 1e-4, V))
    np.testing.assert_allclose(ab, semigroup_apply(t, 3e-4, V), atol=1e-13)
    np.testing.assert_allclose(semigroup_apply(t, 1.0, V).mean(axis=0), V.mean(axis=0), atol=1e-14)
    assert np.linalg.norm(semigroup_apply(t, 1e-3, V)) < np.linalg.norm(V)
    with pytest.raises(DomainError):
        semigroup_apply(t, -1e-3, V)


def test_rft_eigenvalues(circle128):
    eps = 1e-2
    xs = circle128.deriv(1)
    normal = np.cross(xs, [0, 0, 1.0])
    mu = RFT_CONSTANT * abs(np.log(eps))
    np.testing.assert_allclose(rft_apply(circle128, eps, xs), 2 * mu * xs, atol=1e-13)
    np.testing.assert_allclose(rft_apply(circle128, eps, normal), mu * normal, atol=1e-13)


def test_bound_certification():
    entries = certify_multiplier_bounds(1e-2)
    assert len(entries) == 4 * 3 * 2
    assert all(np.isfinite(e.constant) and e.constant > 0 for e in entries)
    stab = bound_stability((1e-2, 1e-3))
    high = {k: v for k, v in stab.items() if k[1] == "high"}
    assert all(ok for _, _, ok in high.values())
    with pytest.raises(DomainError):
        certify_multiplier_bounds(1.0)


def test_wavenumber_table_consistency():
    t = multiplier_table(1e-3, 32)
    np.testing.assert_array_equal(t.k, wavenumbers(32))
