"""Moment-sequence algebra and its measure-level shadows.

Sequences built from finitely atomic measures convolve and multiply
entrywise exactly like the measures do; their moment matrices are positive
semidefinite, and the constant-coefficient operator attached to a sequence
composes like the sequences convolve.
"""

import numpy as np

from pospres import (
    DiscreteMeasure,
    carleman_indicator,
    conv_exp,
    convolve,
    convolve_measures,
    dop_from_seq,
    compose,
    from_measure,
    hadamard,
    is_psd,
    moment_matrix,
)

# -- binomial convolution mirrors measure convolution -----------------------

d1 = from_measure(DiscreteMeasure.dirac((1.0,)), 6)
d2 = from_measure(DiscreteMeasure.dirac((2.0,)), 6)
u = convolve(d1, d2)
print("moments(point 1) * moments(point 2):",
      [u.value((k,)) for k in range(7)], "  (powers of 3)")

mu = DiscreteMeasure([((-0.5,), 1.0), ((1.5,), 0.5)])
nu = DiscreteMeasure([((2.0,), 0.25), ((0.0,), 1.0)])
lhs = convolve(from_measure(mu, 5), from_measure(nu, 5))
rhs = from_measure(convolve_measures(mu, nu), 5)
print("sequence-level vs measure-level convolution gap:",
      max(abs(lhs.value((k,)) - rhs.value((k,))) for k in range(6)))

# -- Hadamard products -------------------------------------------------------

h = hadamard(from_measure(mu, 5), from_measure(nu, 5))
print("Hadamard product entries:", [round(h.value((k,)), 6) for k in range(6)])

# -- operator attachment is a homomorphism -----------------------------------

Ds, Dt = dop_from_seq(d1), dop_from_seq(d2)
Du = dop_from_seq(u)
gap = max(abs(compose(Ds, Dt, 6).coefficient((k,)).coeff((0,))
              - Du.coefficient((k,)).coeff((0,))) for k in range(7))
print("composition vs convolution attachment gap:", gap)

# -- moment matrices certify ----------------------------------------------

pm = from_measure(DiscreteMeasure([((-1.0,), 0.5), ((1.0,), 0.5)]), 4)
M = moment_matrix(pm, 2)
print("\nmoment matrix of the symmetric two-point measure:")
print(M.entries)
print("positive semidefinite:", is_psd(M))

# -- convolution exponential --------------------------------------------------

ce = conv_exp(d2, 0.7)
print("\nconvolution exponential of t*moments(point 2) at t=0.7, entry 0:",
      ce.value((0,)), " (= e^0.7)")

# -- growth heuristic ---------------------------------------------------------

import math

bounded = from_measure(DiscreteMeasure([((-1.0,), 0.5), ((1.0,), 0.5)]), 32)
print("\nbounded even moments:", carleman_indicator(bounded))
from pospres import MomentSeq
factorial = MomentSeq(1, 32, {(k,): float(math.factorial(k)) if k % 2 == 0 else 0.0
                              for k in range(33)})
print("factorial even moments:", carleman_indicator(factorial))
