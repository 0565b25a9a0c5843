"""Straight-cylinder multipliers and the two frequency regimes.

The slender-body map of a straight periodic tube of radius eps acts on the
k-th Fourier mode of a tangential force by m_t(k) and of a normal force by
m_n(k).  Below k ~ 1/(2 pi eps) the symbols grow like |log eps|; above it
they decay like 1/(eps k), so the bending flow is fourth order at long
wavelengths and only third order at short ones.
"""
import numpy as np

from slenderloop import bessel_k, multiplier_normal, multiplier_tangential
from slenderloop.ntd import resolvent_tables

eps = 1e-2
k_split = 1 / (2 * np.pi * eps)
print(f"eps = {eps}, regime split at k = 1/(2 pi eps) = {k_split:.2f}\n")

# symbols across the split
print(f"{'k':>6} {'m_t':>12} {'m_n':>12} {'eps*k*m_t':>12}")
for k in (1, 2, 4, 8, 16, 32, 64, 128, 256):
    mt = multiplier_tangential(eps, k)
    print(f"{k:6d} {mt:12.6f} {multiplier_normal(eps, k):12.6f} {eps * k * mt:12.6f}")
print("eps*k*m_t approaches 1/(8 pi^2) =", f"{1 / (8 * np.pi ** 2):.6f}")

# the small-z closed form is only leading order
z = 2 * np.pi * eps
closed = (2 * bessel_k(0, z) - 1) / (4 * np.pi)
print(f"\nm_t(1) = {multiplier_tangential(eps, 1):.10f}, (2K0(z)-1)/(4pi) = {closed:.10f}, "
      f"gap {(multiplier_tangential(eps, 1) / closed - 1) * 100:.2f}%")

# decay rates of the linear flow: local slope of log(lambda) vs log(k)
t = resolvent_tables(eps, 4096)
k = np.array([2, 8, 512, 4096])
slopes = np.log(t.lambda_t[k] / t.lambda_t[k // 2]) / np.log(2)
print("\nlocal order of the tangential rate at k =", k.tolist(), "->", np.round(slopes, 3).tolist())

# resolvent symbols m1 = 1/(1 + (2 pi k)^2 m_t) and |m2| = 2 pi k m1
print(f"\nm1(1) = {t.m1[1]:.4e}, |m2(1)| = {abs(t.m2[1]):.4e}, |m2(1000)| = {abs(t.m2[1000]):.4e}")
