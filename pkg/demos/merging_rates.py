"""One-shot merging rates of a random pure state, their delta dependence and the IID trend."""

from qdecouple.merging import asymptotic_rates, iid_trend, merging_rates
from qdecouple.states import random_pure_tripartite

psi = random_pure_tripartite(2, 2, 2, seed=0)
q_inf, e_inf = asymptotic_rates(psi)
print(f"asymptotic: q = {q_inf:.4f}, e = {e_inf:.4f}")
for delta in (0.0, 1e-4, 1e-2):
    rep = merging_rates(psi, 0.5, delta=delta, d_A1=2)
    print(f"delta {delta:g}: e >= {rep.e_lower:+.3f}, q <= {rep.q_upper:+.3f}")
for row in iid_trend(psi, 0.5, n_max=2):
    print(f"n = {row['n']}: e gap {row['e_gap']:.3f}, q gap {row['q_gap']:.3f}")
