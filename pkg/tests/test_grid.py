import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderloop.errors import ConfigurationError
from slenderloop.grid import (DyadicPartition, apply_multiplier, besov_norm, derivative_symbol,
                              from_coeffs, lp_project, make_grid, noise_floor, resample,
                              roundoff_filter, spectral_derivative, to_coeffs, wavenumbers,
                              write_field_csv)
from slenderloop.oracle import fd_check


def test_wavenumbers_fft_order():
    k = wavenumbers(8)
    np.testing.assert_array_equal(k, [0, 1, 2, 3, 4, -3, -2, -1])


def test_make_grid_validation():
    g = make_grid(16)
    assert g.max_mode == 8 and g.nodes[1] == 1 / 16
    for bad in (7, 6, 15.5):
        with pytest.raises(ConfigurationError):
            make_grid(bad)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 30), order=st.integers(1, 4))
def test_derivative_of_single_mode_exact(k, order):
    n = 64
    s = np.arange(n) / n
    u = np.sin(2 * np.pi * k * s)
    exact = (2 * np.pi * k) ** order * np.sin(2 * np.pi * k * s + order * np.pi / 2)
    err = np.max(np.abs(spectral_derivative(u, order) - exact))
    # roundoff is amplified by the largest symbol on the grid
    assert err <= 1e-13 * (2 * np.pi * k) ** order + 1e-14 * (np.pi * n) ** order


def test_odd_derivative_kills_nyquist():
    n = 16
    u = np.cos(np.pi * n * np.arange(n) / n)
    assert np.max(np.abs(spectral_derivative(u, 1))) < 1e-12
    assert derivative_symbol(n, 2)[n // 2] != 0


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivative_against_finite_differences(order):
    rep = fd_check(lambda s: np.exp(np.sin(2 * np.pi * s)), 256, order, 1e-6)
    assert rep.passed, rep


def test_round_trip_and_multiplier_shape_check():
    u = np.random.default_rng(1).standard_normal((32, 3))
    np.testing.assert_allclose(from_coeffs(to_coeffs(u)), u, atol=1e-14)
    with pytest.raises(ValueError):
        apply_multiplier(u, np.ones(16))


def test_roundoff_filter_keeps_resolved_content():
    n = 256
    s = np.arange(n) / n
    u = np.exp(np.cos(2 * np.pi * s))
    c = to_coeffs(u)
    kept = roundoff_filter(c)
    assert np.all(kept[np.abs(c) > 1e-13] != 0)
    assert np.count_nonzero(kept) < n
    assert noise_floor(c) < 1e-15


def test_filtered_fourth_derivative_is_quieter():
    n = 512
    s = np.arange(n) / n
    u = np.cos(2 * np.pi * s) + 0.01 * np.sin(6 * np.pi * s)
    exact = (2 * np.pi) ** 4 * np.cos(2 * np.pi * s) + 0.01 * (6 * np.pi) ** 4 * np.sin(6 * np.pi * s)
    raw = np.max(np.abs(spectral_derivative(u, 4) - exact))
    filt = np.max(np.abs(spectral_derivative(u, 4, filter_tol="auto") - exact))
    assert filt <= raw and filt < 1e-8


def test_dyadic_partition_of_unity():
    part = DyadicPartition(256)
    total = part.low + sum(part.blocks[int(j)] for j in part.j_range if j > 0)
    np.testing.assert_allclose(total, 1.0, atol=1e-14)


def test_besov_norm_of_single_mode_scales():
    n = 512
    s = np.arange(n) / n
    vals = []
    for k in (8, 16, 32, 64):
        vals.append(besov_norm(np.cos(2 * np.pi * k * s), 2.0))
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    np.testing.assert_allclose(ratios, 4.0, rtol=1e-10)
    assert besov_norm(np.full(n, 3.0), 5.0) == pytest.approx(3.0)


def test_lp_projections_sum_to_field():
    u = np.random.default_rng(2).standard_normal(128)
    part = DyadicPartition(128)
    low = apply_multiplier(u, part.low)
    rest = sum(lp_project(u, j) for j in part.j_range if j > 0)
    np.testing.assert_allclose(low + rest, u, atol=1e-12)


def test_resample_exact_for_band_limited():
    s = np.arange(32) / 32
    u = np.stack([np.cos(2 * np.pi * 3 * s), np.sin(2 * np.pi * 5 * s)], axis=1)
    fine = resample(u, 96)
    t = np.arange(96) / 96
    np.testing.assert_allclose(fine[:, 0], np.cos(2 * np.pi * 3 * t), atol=1e-13)
    np.testing.assert_allclose(resample(fine, 32), u, atol=1e-13)


def test_write_field_csv(tmp_path):
    u = np.cos(2 * np.pi * np.arange(8) / 8)
    p = tmp_path / "f.csv"
    write_field_csv(p, u)
    rows = p.read_text().splitlines()
    assert rows[0] == "s,value" and len(rows) == 9
    assert float(rows[2].split(",")[1]) == u[1]
    write_field_csv(p, u, coeffs=True)
    rows = p.read_text().splitlines()
    assert rows[0] == "k,re,im"
    assert any(r.startswith("1,0.5") for r in rows)
