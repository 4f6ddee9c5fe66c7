"""Eventual positivity: flows that leave the preserver cone and come back.

Two families.  The diagonal flow on quartics scales the k-th coefficient by
exp(t k^3); its moment matrix dips below zero immediately after t = 0 and
recovers at a threshold near 0.0119688.  The drift-diffusion flow on
quadratics has a closed-form threshold curve whose root moves from about
22.66 down to 0.0096 as the drift strength grows from just above 5^{-1/2}
to 100; at or below that boundary the curve never becomes positive.
"""

import numpy as np

from pospres import (
    DiffOp,
    Poly,
    apply,
    drift_curve_rows,
    exp_op,
    find_tau,
    find_tau_drift,
    find_tau_sigma,
    m_min,
    NoThresholdError,
    polynomial_positivity_threshold,
    sigma_curve_rows,
    sigma_example_curve,
)

# -- diagonal family -----------------------------------------------------------

res = find_tau_sigma(tol=1e-7)
print(f"diagonal-family threshold bracket: [{res.tau_lo:.10g}, {res.tau_hi:.10g}]")
for t in (res.tau_lo, res.tau_hi):
    h2, s3 = sigma_example_curve(t)
    print(f"  t={t:.10g}: h2={h2: .3e}  smallest eigenvalue={s3: .3e}")

# -- drift-diffusion family -----------------------------------------------------

for a in (0.44721360, 0.45, 1.0, 10.0, 100.0):
    r = find_tau_drift(a, tol=1e-8)
    print(f"drift a={a:<12g} threshold in [{r.tau_lo:.9g}, {r.tau_hi:.9g}]")
for a in (0.44721359, 5 ** -0.5):
    try:
        find_tau_drift(a)
    except NoThresholdError as exc:
        print(f"drift a={a!r}: {exc}")

# -- sign symmetry ---------------------------------------------------------------

plus, minus = find_tau_drift(1.0, tol=1e-7), find_tau_drift(-1.0, tol=1e-7)
print("threshold symmetric in the drift sign:",
      (plus.tau_lo, plus.tau_hi) == (minus.tau_lo, minus.tau_hi))

# -- per-polynomial recovery time -------------------------------------------------

x = Poly.variable(1, 0)
family = DiffOp(1, {(1,): x, (2,): 3 * x * x, (3,): x ** 3})
p = (x - Poly.constant(1, 1.2)) ** 4
flow = lambda t: apply(exp_op(family, t, 4), p)
r = polynomial_positivity_threshold(flow, t_max=0.3, samples=150)
print(f"\nrecovery time of one quartic under the diagonal flow: "
      f"[{r.tau_lo:.6g}, {r.tau_hi:.6g}]")

# -- CSV curves (the same rows the command line emits) ----------------------------

print("\nfirst rows of the threshold curves:")
for row in sigma_curve_rows(np.linspace(0.001, 0.015, 4)):
    print(" ", row)
for row in drift_curve_rows(0.45, np.linspace(1.0, 8.0, 4)):
    print(" ", row)
