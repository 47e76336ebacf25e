"""How the two generalization bounds behave across sample size.

Prints the empirical deviation bound and the VC-style bound for a
one-dimensional decision rule, then shows how the empirical bound grows
with projection dimension at fixed n.
"""

from permsig.bounds import BoundSpec, empirical_bound, vapnik_bound

print("one classifier dimension, eta = 0.05")
print(f"{'n':>6} {'empirical':>10} {'vapnik':>10}")
for n in (50, 100, 200, 400, 800, 1600, 3200):
    spec = BoundSpec(n=n, d=1, eta=0.05)
    print(f"{n:>6} {empirical_bound(spec):>10.4f} {vapnik_bound(spec):>10.4f}")

print()
print("growing projection dimension at n = 400")
print(f"{'d':>6} {'empirical':>10}")
for d in (1, 2, 5, 10, 20, 50):
    print(f"{d:>6} {empirical_bound(BoundSpec(n=400, d=d, eta=0.05)):>10.4f}")
