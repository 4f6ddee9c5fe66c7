"""Certifying and refuting positivity preservers on closed sets.

The necessary condition driving everything: if T preserves nonnegativity on
K then at every base point y in K the sequence alpha! q_alpha(y) must be a
truncated moment sequence of a measure supported in K - y.  Sampling can
refute (a negative eigenvalue or a grid witness) or, for operators built
from an explicit measure, certify.
"""

import numpy as np

from pospres import (
    DiffOp,
    DiscreteMeasure,
    KDescriptor,
    Poly,
    build_substitution_preserver,
    check_degree2_pointwise,
    check_preserver_halfline,
    check_preserver_rn,
    dop_from_seq,
    exp_op,
    falsify_on_grid,
    format_kdescriptor,
    from_measure,
    ksharp,
    quadratic_square_trials,
    square_trials,
)

x = Poly.variable(1, 0)
ys = [(y,) for y in np.linspace(-3, 3, 21)]

# -- which shifts stay inside K: the translation-set catalogue ---------------

for K in (KDescriptor.box([(-1.0, 1.0)]),
          KDescriptor.compact_times_halfline([(-1.0, 1.0)]),
          KDescriptor.cone([(1.0, 0.0), (0.0, 1.0)]),
          KDescriptor.lattice_balls(2, 0.25)):
    print(f"{format_kdescriptor(K):24s} -> {format_kdescriptor(ksharp(K))}")

# -- constructive preservers carry their certificate -------------------------

mixture = dop_from_seq(from_measure(DiscreteMeasure([((0.4,), 1.0), ((-1.2,), 0.5)]), 8))
print("\nshift mixture on the full space:", check_preserver_rn(mixture, 3, ys).status)

subst = build_substitution_preserver([x], from_measure(DiscreteMeasure.dirac((1.0,)), 8), 8)
print("substitution preserver f(x) -> f(2x):", check_preserver_rn(subst, 3, ys).status)

# -- the heat flow passes, the backwards heat flow is refuted -----------------

heat = exp_op(DiffOp(1, {(2,): 0.5}), 1.0, 6)
print("\nheat flow:", check_preserver_rn(heat, 3, ys).status)
cold = exp_op(DiffOp(1, {(2,): -0.5}), 0.5, 6)
v = check_preserver_rn(cold, 3, ys)
print("backwards heat flow:", v.status,
      "min eig", v.witnesses[0].min_eigenvalue if v.witnesses else None)

# -- half-line support needs the localized matrix -----------------------------

right = dop_from_seq(from_measure(DiscreteMeasure.dirac((0.5,)), 9))
left = dop_from_seq(from_measure(DiscreteMeasure.dirac((-0.5,)), 9))
half_ys = [(y,) for y in np.linspace(0.0, 3.0, 13)]
print("\nshift right on [0, inf):", check_preserver_halfline(right, 4, half_ys).status)
w = check_preserver_halfline(left, 4, [(0.0,)])
print("shift left on [0, inf):", w.status, "witness kind:", w.witnesses[0].kind)

# -- grid falsification with explicit witnesses -------------------------------

family = DiffOp(1, {(1,): x, (2,): 3.0 * x * x, (3,): x * x * x})
T = exp_op(family, 0.005, 4)
trials = quadratic_square_trials(np.arange(-3, 3.01, 0.25), np.arange(-3, 3.01, 0.25))
grid = [(g,) for g in np.linspace(-5, 5, 401)]
verdict = falsify_on_grid(T, KDescriptor.full(1), trials, grid)
wit = verdict.witnesses[0]
print("\ndiagonal flow below threshold:", verdict.status)
print("  witness trial:", wit.trial)
print("  witness point:", wit.point, "value:", wit.value)

# -- exact pointwise test for degree-two operators ----------------------------

drift = DiffOp(1, {(1,): Poly.constant(1, 10.0), (2,): (x * x - 1.0) * 0.5})
for t in (0.1, 0.5):
    ok, mval, arg = check_degree2_pointwise(exp_op(drift, t, 2))
    print(f"drift flow at t={t}: preserver={ok}, min h={mval:.5f} at x={arg:.4f}")
