#!/usr/bin/env python3
# The iteration lemmas as numeric procedures: hypotheses are spot-verified on
# sample grids, and only then is the vanishing/envelope conclusion asserted.

import numpy as np

from fracthin import DecreasingSampler, stampacchia_classic, stampacchia_geometric
from fracthin.inequalities import stampacchia_inhomogeneous


def show(rep):
    print(f"  hypotheses: {rep.hypotheses}")
    print(f"  prediction: {rep.prediction}")
    print(f"  conclusion holds: {rep.conclusion_holds}")


# Classic form: f(y) <= C (y-x)^-alpha f(x)^beta with beta > 1 forces f to
# vanish past a computable point.  The family (1-x)_+^2 vanishes at 1.
func = lambda x: np.clip(1.0 - x, 0.0, None) ** 2
f = DecreasingSampler.geometric(func, 0.0, 3.0, num=64)
C = 0.0
for i, x in enumerate(f.samples):
    for y in f.samples[i + 1:]:
        if func(x) > 0 and func(y) > 0:
            C = max(C, float(func(y)) * (y - x) / float(func(x)) ** 2)
print("classic iteration on (1-x)_+^2 with matched constants:")
rep = stampacchia_classic(f, 0.0, C * 1.01, alpha=1.0, beta=2.0)
show(rep)
print(f"  (true vanishing point of the family: 1.0)")

# Geometric form: f(s+delta) <= eps f(s)^nu along the iteration sequence.
def barrier(x):
    x = np.asarray(x, dtype=float)
    gap = np.clip(1.0 - x, 0.0, None)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(gap > 0, np.exp(-x / np.where(gap > 0, gap, 1.0)), 0.0)

print("\ngeometric iteration on the exponential barrier exp(-s/(1-s)):")
rep = stampacchia_geometric(DecreasingSampler.geometric(barrier, 0.0, 3.0, num=64),
                            eps=0.5, nu=1.2)
show(rep)

# Inhomogeneous form: a forcing term weakens the conclusion to a size
# condition on the interval length; when it fails, the deficit is reported.
K, S_tilde, alpha, beta, R = 10.0, 1.0, 1.0, 1.5, 2.0
expo = alpha / (beta - 1)
fam = lambda x: K * np.clip(R - np.asarray(x, dtype=float), 0.0, None) ** expo
c0 = K / (K + S_tilde) ** beta
print("\ninhomogeneous iteration with a deliberately violated size condition:")
rep = stampacchia_inhomogeneous(DecreasingSampler.geometric(fam, 0.0, R, num=48),
                                R, c0, alpha, beta, S_tilde)
show(rep)
print(f"  reported deficit: {rep.observed.get('size_condition_deficit'):.4g}")
