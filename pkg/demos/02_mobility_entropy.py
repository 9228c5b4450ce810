#!/usr/bin/env python3
# The mobility regularization ladder and its entropies: how epsilon, delta
# and gamma reshape f(u) = u^n, and how the entropy G with G'' = 1/f responds.

import numpy as np

from fracthin import MobilityParams, entropy_G0, entropy_reg, mobility, mobility_prime

z = np.geomspace(1e-4, 1e3, 9)
pure = MobilityParams(n=1.5, s=0.5, d=1)
reg = MobilityParams(n=1.5, epsilon=1e-4, delta=1e-4, gamma=1e-6, s=0.5, d=1)

print("z        f=z^1.5       f_regularized")
for zi, a, b in zip(z, mobility(z, pure), mobility(z, reg)):
    print(f"{zi:9.2e}  {a:12.5e}  {b:12.5e}")
print("\nthe regularized mobility is pinched between gamma and 1/delta + gamma:")
print("  gamma =", reg.gamma, " cap =", 1 / reg.delta + reg.gamma)

# Near zero the epsilon term steepens the degeneracy to ~ z^alpha / epsilon.
z0 = 1e-6
print("\nf'(1e-6) =", mobility_prime(z0, reg),
      " vs alpha z^(alpha-1)/eps =", reg.alpha * z0 ** (reg.alpha - 1) / reg.epsilon)

# The entropy branches; the value at 0 is finite only for n < 2.
for n in (1.0, 1.5, 2.0, 2.5):
    print(f"G0(0) at n={n}:", entropy_G0(0.0, n))

# The regularized entropy stays finite for gamma > 0 and is convex.
zz = np.linspace(0.05, 4.0, 9)
vals = entropy_reg(zz, reg)
print("\nregularized entropy on [0.05, 4]:")
for zi, gi in zip(zz, vals):
    print(f"  G({zi:5.2f}) = {gi:9.5f}")
second = np.diff(vals, 2)
print("convexity (second differences all nonnegative):", bool((second >= -1e-12).all()))
