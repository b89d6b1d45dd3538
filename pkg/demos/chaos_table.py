#!/usr/bin/env python
# Exact second-chaos computations for the pure-type kernels L_n(|z|^2) exp(-|z|^2/2)
from gwhf.chaos import (chaos_coefficients, hyperuniformity_verdict, integral_g, q22_variance,
                        two_point_chaos_density)
from gwhf.kernels import make_pure_kernel
from gwhf.polynomials import rational_to_str

# coefficients c_{k,l} of the order-2 chaos term for the first Laguerre kernel
table = chaos_coefficients(2, 1)
for (k, l), c in sorted(table.entries.items()):
    print(f"c[{k},{l}] = {c}")

# g(s) = E[phi(z) phi(w)] with s = |z - w|^2, as an exact polynomial times exp(-2s)
g = two_point_chaos_density(make_pure_kernel(1))
print(f"g(s) = p(s) exp(-{g.rate} s),  p(t) =", g.poly)

# a nonzero integral of g means the uncharged zero count has variance of order R^2
for n in range(1, 6):
    v = hyperuniformity_verdict(n)
    print(f"laguerre:{n}  int g = {rational_to_str(integral_g(two_point_chaos_density(n)))}"
          f"  non-hyperuniform: {v.non_hyperuniform}")

# the finite-R variance of the chaos projection approaches int(g) R^2
for R in (2.0, 4.0, 8.0, 12.0):
    q = q22_variance(1, R)
    print(f"R={R:4.1f}  Var Q22 = {q.analytic:9.4f}   int(g) R^2 = {q.asymptote:9.4f}")
