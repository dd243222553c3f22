"""
Closed-form magnetic-harmonic-oscillator (MHO) kernel sanity checks.

The MHO Hamiltonian H = (1/2)(-Lap + 2 i lam B (x2 d1 - x1 d2)
+ lam^2 ((k1^2+B^2) x1^2 + (k2^2+B^2) x2^2)) has ground energy
E0 = lam f_+ / 2 with f_+ = sqrt(k1^2 + k2^2 + 2 B^2 + 2 f_-) etc.
This script verifies, purely from the closed forms:

  * the semigroup property q_{s+s'} = q_s * q_{s'} (grid convolution),
  * that the ground state is reproduced with rate f_+/2 in the scaled
    time variable,
  * the short-distance log law of the modified Green's function,
    G~(x, y) ~ (1/pi) log(1/|x-y|).
"""

import numpy as np

from maglab.mho_kernels import (
    ground_state,
    heat_kernel,
    mho_params,
    modified_green,
    mu_threshold,
)

p = mho_params(k1=1.0, k2=2.0, B=0.5, lam=30.0)
print("f_+ = %s, f_- = %s" % (p.f_plus, p.f_minus))
print("E0  = lam f_+ / 2 = %.10f  (exact: %.10f)"
      % (np.real(p.E0), 30.0 * np.sqrt(10.0) / 2.0))
print()

# semigroup property on a one-off quadrature grid
L, n = 2.5, 400
z = np.linspace(-L, L, n)
h = z[1] - z[0]
Z1, Z2 = np.meshgrid(z, z, indexing="ij")
x, y = np.array([0.31, -0.22]), np.array([-0.14, 0.37])
s, sp = 0.3, 0.5
kx = heat_kernel(p, x, (Z1, Z2), s)
ky = heat_kernel(p, (Z1, Z2), y, sp)
composed = np.sum(kx * ky) * h ** 2
direct = heat_kernel(p, x, y, s + sp)
print("semigroup defect |q_s * q_s' - q_{s+s'}| / |q_{s+s'}| = %.2e"
      % (abs(composed - direct) / abs(direct)))

# ground-state reproduction: e^{-sH/lam} psi0 = e^{-(f_+/2) s} psi0
psi_y = ground_state(p, (Z1, Z2))
lhs = np.sum(heat_kernel(p, x, (Z1, Z2), s) * psi_y) * h ** 2
rhs = np.exp(-p.f_plus / 2 * s) * ground_state(p, x)
print("ground-state reproduction defect                     = %.2e"
      % (abs(lhs - rhs) / abs(rhs)))
print()

# short-distance log law of the modified Green's function: the additive
# O(1) part cancels in a difference quotient, exposing the 1/pi slope
mu = 0.5 * mu_threshold(p)
y0 = np.array([0.05, -0.03])
print("short-distance law: G~ ~ (1/pi) log(1/r), 1/pi = %.6f" % (1 / np.pi))
for r in (1e-2, 1e-3, 1e-4):
    g1 = modified_green(p, y0 + [r, 0.0], y0, mu).value
    g2 = modified_green(p, y0 + [10 * r, 0.0], y0, mu).value
    print("  r = %.0e:  [G~(r) - G~(10r)] / log(10) = %.6f"
          % (r, (g1 - g2).real / np.log(10.0)))
