import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderloop.errors import ConfigurationError, GeometryError
from slenderloop.geometry import (ClosedCurve, bending_energy, build_frame, circle, curvature,
                                  ellipse, inextensibility_identities, load_curve_csv,
                                  mean_subtract_phi, perturbed_circle, phi_apply, phi_inverse,
                                  r_star_bound, reparameterize_arclength, star_norm,
                                  straight_frame, trefoil, write_curve_csv)
from slenderloop.grid import spectral_derivative


def _rotation(a, b, c):
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    rz = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rx = np.array([[1, 0, 0], [0, cc, -sc], [0, sc, cc]])
    return rz @ ry @ rx


def test_curve_shape_validation():
    with pytest.raises(ConfigurationError):
        ClosedCurve(np.zeros((8, 2)))
    X = circle(16)
    with pytest.raises(ValueError):
        X.points[0, 0] = 1.0


def test_circle_invariants(circle128):
    assert circle128.is_arclength
    assert circle128.length() == pytest.approx(1.0, abs=1e-14)
    assert bending_energy(circle128) == pytest.approx(4 * np.pi ** 2, rel=1e-12)
    np.testing.assert_allclose(curvature(circle128), 2 * np.pi, rtol=1e-11)
    assert star_norm(circle128) == pytest.approx(2 / np.pi, rel=1e-12)


@pytest.mark.parametrize("builder", [
    lambda n: perturbed_circle(n, 3, 1e-2),
    lambda n: perturbed_circle(n, 5, 3e-2, lift=0.1),
    lambda n: trefoil(n),
])
def test_builders_are_unit_speed(builder):
    X = builder(256)
    assert X.arclength_defect() < 1e-10
    assert X.length() == pytest.approx(1.0, abs=1e-12)


def test_reparameterize_preserves_ellipse_shape():
    E = ellipse(256)
    assert not E.is_arclength
    X = reparameterize_arclength(E)
    # constant speed equal to the length; unit speed needs normalize=True
    assert np.max(np.abs(X.speed() - E.length())) < 1e-10
    assert X.length() == pytest.approx(E.length(), rel=1e-12)
    x, y = X.points[:, 0], X.points[:, 1]
    assert np.max(np.abs((x / 0.2) ** 2 + (y / 0.15) ** 2 - 1)) < 1e-10
    assert reparameterize_arclength(E, normalize=True).length() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0, 2 * np.pi), b=st.floats(0, np.pi), c=st.floats(0, 2 * np.pi),
       shift=st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_rigid_motion_invariance(a, b, c, shift):
    X = perturbed_circle(64, 3, 2e-2, lift=0.05)
    Y = X.transformed(_rotation(a, b, c), shift)
    assert star_norm(Y) == pytest.approx(star_norm(X), rel=1e-12)
    assert bending_energy(Y) == pytest.approx(bending_energy(X), rel=1e-10)
    assert r_star_bound(Y) == pytest.approx(r_star_bound(X), rel=1e-10)


def test_bending_energy_is_parameterization_invariant():
    E = ellipse(256)
    assert bending_energy(E) == pytest.approx(bending_energy(reparameterize_arclength(E)), rel=1e-9)


def test_star_norm_detects_near_contact():
    n = 256
    t = 2 * np.pi * np.arange(n) / n
    # flattened loop whose two halves pass within 0.02 of each other
    pts = np.stack([np.sin(t), 0.01 * np.cos(t), np.zeros(n)], axis=1)
    assert star_norm(ClosedCurve(pts)) < 0.1 * star_norm(circle(n))
    with pytest.raises(ConfigurationError):
        star_norm(np.zeros((4, 3)))


@pytest.mark.parametrize("builder", [circle, lambda n: perturbed_circle(n, 3, 1e-2, lift=0.1), trefoil])
def test_frame_is_orthonormal_and_satisfies_frame_equations(builder):
    X = builder(256)
    f = build_frame(X)
    basis = np.stack([f.e_t, f.e_n1, f.e_n2], axis=1)
    gram = np.einsum("nia,nja->nij", basis, basis)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-13)
    k1, k2 = f.kappa1[:, None], f.kappa2[:, None]
    tol = 1e-9 * max(1.0, np.max(np.abs(f.kappa1)) + np.max(np.abs(f.kappa2)))
    assert np.max(np.abs(spectral_derivative(f.e_t, 1) - k1 * f.e_n1 - k2 * f.e_n2)) < tol
    assert np.max(np.abs(spectral_derivative(f.e_n1, 1) + k1 * f.e_t - f.kappa3 * f.e_n2)) < tol
    assert np.max(np.abs(spectral_derivative(f.e_n2, 1) + k2 * f.e_t + f.kappa3 * f.e_n1)) < tol
    assert -np.pi < f.kappa3 <= np.pi


def test_planar_curve_has_no_twist(circle128):
    assert abs(build_frame(circle128).kappa3) < 1e-12


def test_transport_fallback_agrees():
    X = perturbed_circle(128, 3, 2e-2, lift=0.1)
    spectral = build_frame(X)
    transported = build_frame(X, min_reference_sine=1.1)
    assert transported.kappa3 == pytest.approx(spectral.kappa3, abs=1e-8)


def test_frame_needs_arclength():
    with pytest.raises(GeometryError):
        build_frame(ellipse(64))


def test_rotated_frame_is_a_frame(wobbly_frame):
    r = wobbly_frame.rotated(0.7)
    assert np.max(np.abs(np.sum(r.e_n1 * r.e_n2, axis=1))) < 1e-14
    np.testing.assert_allclose(r.kappa1 ** 2 + r.kappa2 ** 2,
                               wobbly_frame.kappa1 ** 2 + wobbly_frame.kappa2 ** 2, rtol=1e-12)


def test_phi_is_an_isometry(wobbly_frame, rng):
    g = rng.standard_normal((128, 3))
    h = phi_apply(wobbly_frame, g)
    np.testing.assert_allclose(np.linalg.norm(h, axis=1), np.linalg.norm(g, axis=1), rtol=1e-13)
    np.testing.assert_allclose(phi_inverse(wobbly_frame, h), g, atol=1e-13)
    batched = phi_apply(wobbly_frame, np.stack([g, 2 * g], axis=1))
    np.testing.assert_allclose(batched[:, 1], 2 * h, atol=1e-13)


def test_straight_frame_phi_swaps_axes(rng):
    g = rng.standard_normal((16, 3))
    np.testing.assert_allclose(phi_apply(straight_frame(16), g), g, atol=0)


def test_mean_subtract_phi(wobbly_frame, rng):
    h = mean_subtract_phi(wobbly_frame, rng.standard_normal((128, 3)))
    assert np.max(np.abs(np.mean(phi_inverse(wobbly_frame, h), axis=0))) < 1e-14


def test_inextensibility_identities():
    assert inextensibility_identities(circle(512))["third"] < 1e-8
    res = inextensibility_identities(perturbed_circle(512, 3, 1e-2))
    assert max(res.values()) < 1e-6
    # the identities are a property of unit speed, not of the shape
    bad = inextensibility_identities(ellipse(512))
    assert bad["first"] > 1e-2


def test_curve_csv_round_trip(tmp_path):
    X = perturbed_circle(64)
    p = tmp_path / "c.csv"
    write_curve_csv(p, X)
    Y = load_curve_csv(p)
    np.testing.assert_array_equal(Y.points, X.points)
    Z = load_curve_csv(p, 128)
    np.testing.assert_allclose(Z.points[::2], X.points, atol=1e-13)
    (tmp_path / "short.csv").write_text("s,x,y,z\n0,1,0,0\n")
    with pytest.raises(ConfigurationError):
        load_curve_csv(tmp_path / "short.csv")
