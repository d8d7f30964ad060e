"""How many samples do the finite-sample bounds ask for?

Prints the per-side sample size the bounded two-sample bound needs for a few
thresholds, the d = 2 root eps_bar_n, and the d >= 3 budget calculator.
"""

from wci.bounds import BoundParams, min_samples_2d, min_samples_d3, min_samples_null, solve_eps_bar

D, p = 1.0, 1.0
print("bounded null test, D = 1, p = 1")
for eps in (0.5, 0.25, 0.1):
    for alpha in (0.1, 0.05, 0.01):
        print(f"  eps={eps:<5} alpha={alpha:<5} n >= {min_samples_null(eps, D, p, alpha):>9,d}")

print("\neps_bar_n on the unit square (p = 1)")
for n in (10**3, 10**4, 10**5, 10**6):
    s = solve_eps_bar(n, p)
    print(f"  n={n:>9,d}  eps_bar={s.eps_bar:.5f}  residual={s.residual:.1e}")

print(f"\nsmallest n for the d = 2 budget at eps = 2.5: {min_samples_2d(2.5, p):,d}")
params = BoundParams(p=1.0, d=3, kappa=1.0)
print(f"smallest n for the d = 3 budget at eps = 1, M = 1: {min_samples_d3(1.0, params, 1.0):,d}")
