"""Smooth min- and max-entropies of a two-qubit state as eps grows."""

import numpy as np

from qdecouple.entropies import h_max, h_min, smooth_h_max, smooth_h_min
from qdecouple.states import random_state

rho = random_state(4, seed=7).matrix
print(f"H_min {h_min(rho, (2, 2)):+.4f}   H_max {h_max(rho, (2, 2)):+.4f}")
for eps in np.linspace(0.0, 0.3, 7):
    lo = smooth_h_min(rho, eps, (2, 2))
    hi = smooth_h_max(rho, eps, (2, 2))
    print(f"eps {eps:.2f}: H_min^eps >= {lo.value:+.4f}   H_max^eps <= {hi.value:+.4f}")
