#!/usr/bin/env python3
# Walk through the spectral calculus on the Neumann cosine basis:
# transforms, fractional Laplacian powers, seminorms, and the identities
# that make the solver's bookkeeping exact.

import numpy as np

from fracthin import (
    DomainGeometry, SpectralField, build_basis, frac_laplacian,
    gradient, inner_product, seminorm, to_coefficients, to_grid,
)
from fracthin.spectral import random_band_limited

geo = DomainGeometry.interval(np.pi, 32)
basis = build_basis(geo)
print("domain [0, pi], 32 modes, quadrature grid:", geo.quad_points[0])
print("first eigenvalues (k pi / L)^2:", basis.eigenvalues[:5])

# A single eigenfunction round-trips exactly and diagonalizes (-Lap)^s.
c = np.zeros(geo.modes)
c[3] = 1.0
phi3 = SpectralField(basis, c)
lap = frac_laplacian(phi3, 0.5)
print("\n(-Lap)^0.5 phi_3 coefficient:", lap.coefficients[3],
      " expected lambda_3^0.5 =", basis.eigenvalue(3) ** 0.5)

# Parseval: the grid quadrature of u^2 equals the sum of squared coefficients.
rng = np.random.default_rng(0)
u = random_band_limited(basis, rng)
grid = to_grid(u)
quad = np.sum(grid.values**2) * geo.cell_volume
print("\nParseval check: quadrature", quad, " vs sum c^2", np.sum(u.coefficients**2))

# Integration by parts moves fractional powers across the inner product.
v = random_band_limited(basis, rng)
lhs = inner_product(frac_laplacian(u, 0.3), frac_laplacian(v, 0.4))
rhs = inner_product(frac_laplacian(u, 0.7), v)
print("integration by parts residual:", abs(lhs - rhs))

# Seminorm interpolation (a Hoelder inequality in coefficient space).
r0, r, r1 = 0.2, 0.9, 1.6
theta = (r - r0) / (r1 - r0)
print("\nseminorm interpolation: ||u||_r =", seminorm(u, r),
      " <= bound =", seminorm(u, r0) ** (1 - theta) * seminorm(u, r1) ** theta)

# The gradient honors the Neumann condition structurally.
(g,) = gradient(u)
print("max |grad u| on grid:", np.abs(g.values).max())
back = to_coefficients(grid, basis)
print("round-trip error:", np.abs(back.coefficients - u.coefficients).max())
