"""Tour of the truncated operator algebra.

Operators sum_alpha q_alpha d^alpha with deg q_alpha <= |alpha| map each
space of degree-<= d polynomials into itself, so everything below happens
through exact dim x dim matrix restrictions: composition, inversion,
exponentials, logarithms, and the recovery of the unique coefficient table
from a matrix.
"""

import numpy as np

from pospres import (
    DiffOp,
    Poly,
    apply,
    canonical_from_action,
    compose,
    exp_limit_check,
    exp_op,
    format_operator,
    invert,
    log_op,
    matrix_rep,
)

x = Poly.variable(1, 0)

# -- a degree-two operator and its matrix on {1, x, x^2} -------------------

A = DiffOp(1, {(1,): Poly.constant(1, 1.0), (2,): (x * x - 1.0) * 0.5})
print("A = d + (x^2-1)/2 d^2, matrix on quadratics:")
print(matrix_rep(A, 2).entries)

# -- exponential flow: solves u_t = A u on polynomial initial data ---------

T = exp_op(A, 2.0, 2)
print("\nexp(2A) as a coefficient table:")
print(format_operator(T))
p = x * x
print("exp(2A) applied to x^2:", apply(T, p))

# -- the canonical coefficients are recoverable from any matrix ------------

R = canonical_from_action(matrix_rep(A, 2))
print("recovered q_2:", R.coefficient((2,)))

# -- group structure: inverses by coefficient recursion --------------------

G = DiffOp(1, {(0,): 1.0, (1,): 1.0})  # 1 + d
Gi = invert(G, 5)
print("\n(1 + d)^{-1} is the truncated geometric series:")
print(format_operator(Gi))
check = matrix_rep(compose(G, Gi, 5), 5).entries
print("composition with the inverse deviates from identity by",
      np.max(np.abs(check - np.eye(6))))

# -- exp and log are mutually inverse on constant coefficients -------------

H = DiffOp(1, {(2,): 0.5})
flow = exp_op(H, 1.0, 6)
back = log_op(flow, 6)
print("\nlog(exp(d^2/2)) constant parts:",
      [round(back.coefficient((k,)).coeff((0,)), 12) for k in range(7)])

# -- Euler products converge to the exponential -----------------------------

for k in (16, 256, 1024):
    print(f"Euler-product discrepancy at k={k}:",
          exp_limit_check(H, 1.0, 4, k))
