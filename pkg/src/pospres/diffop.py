"""Differential operators of truncated order on polynomial spaces.

An operator is a finite table of polynomial coefficients q_alpha acting as
``T p = sum_alpha q_alpha * d^alpha p``.  When every coefficient satisfies
deg q_alpha <= |alpha| the operator maps each space of polynomials of
degree <= d into itself, so it has a well-defined dim x dim matrix
restriction on the graded basis.  Composition, inversion, exponentials and
logarithms are computed through those finite matrix restrictions, which is
exact on the restricted space; the unique coefficient table of a matrix is
recovered by a graded recursion (``canonical_from_action``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .polyalg import (
    BasisMap,
    DimensionMismatchError,
    MultiIndex,
    Poly,
    graded_key,
    iter_multiindices,
    iter_multiindices_leq,
    mi_add,
    mi_binom,
    mi_degree,
    mi_factorial,
    mi_perm,
    mi_sub,
    parse_poly,
    format_poly,
)


class TruncationError(ValueError):
    """The operator's stored coefficient table is too short for the request."""


class DegreeBoundError(ValueError):
    """A coefficient violates deg q_alpha <= |alpha| (operator not degree-preserving)."""


class NotInvertibleError(ValueError):
    """The operator has no inverse on the requested restriction."""


# certificate kinds attached to operators built from representing measures;
# preserver checks use them to upgrade an all-pass verdict to Pass
SHIFT_MIXTURE = "shift-mixture"
SUBSTITUTION = "substitution"


class DiffOp:
    """Finite-order differential operator sum_alpha q_alpha * d^alpha.

    ``max_order`` is the truncation discipline: ``None`` means the table is
    exact (all unstored coefficients are genuinely zero), an integer D means
    coefficients are only known for |alpha| <= D and any request that needs
    more must fail loudly instead of silently truncating.
    """

    __slots__ = ("n", "coeffs", "max_order", "degree_preserving", "certificate")

    def __init__(self, n: int, coeffs: dict | None = None, max_order: int | None = None,
                 allow_degree_excess: bool = False, certificate=None):
        if n < 1:
            raise ValueError("variable count must be >= 1")
        object.__setattr__(self, "n", n)
        clean = {}
        preserving = True
        for alpha, q in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise DimensionMismatchError(f"coefficient index {alpha} has wrong length")
            if not isinstance(q, Poly):
                q = Poly.constant(n, float(q))
            if q.n != n:
                raise DimensionMismatchError("coefficient polynomial has wrong variable count")
            if q.is_zero():
                continue
            if q.degree > mi_degree(alpha):
                preserving = False
                if not allow_degree_excess:
                    raise DegreeBoundError(
                        f"deg q_{alpha} = {q.degree} exceeds |alpha| = {mi_degree(alpha)}")
            if max_order is not None and mi_degree(alpha) > max_order:
                raise TruncationError(
                    f"coefficient index {alpha} beyond stated truncation {max_order}")
            clean[alpha] = q
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "max_order", max_order)
        object.__setattr__(self, "degree_preserving", preserving)
        object.__setattr__(self, "certificate", certificate)

    def __setattr__(self, name, value):
        raise AttributeError("DiffOp is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "DiffOp":
        return cls(n, {(0,) * n: Poly.constant(n, 1.0)})

    @classmethod
    def zero(cls, n: int) -> "DiffOp":
        return cls(n, {})

    @classmethod
    def partial(cls, n: int, alpha: MultiIndex, scale: float = 1.0) -> "DiffOp":
        """scale * d^alpha."""
        return cls(n, {tuple(alpha): Poly.constant(n, scale)})

    @classmethod
    def from_constant_table(cls, values: dict, n: int, max_order: int | None = None,
                            certificate=None) -> "DiffOp":
        """Build a constant-coefficient operator from alpha -> scalar q_alpha."""
        return cls(n, {a: Poly.constant(n, v) for a, v in values.items()},
                   max_order=max_order, certificate=certificate)

    # -- structure ---------------------------------------------------------

    @property
    def q0(self) -> float:
        """The scalar constant term q_0 (kernel criterion: invertible iff q_0 != 0)."""
        q = self.coeffs.get((0,) * self.n)
        return 0.0 if q is None else q.constant_value()

    @property
    def is_invertible(self) -> bool:
        return self.q0 != 0.0

    @property
    def order(self) -> int:
        """Largest |alpha| with a nonzero stored coefficient (-1 for the zero operator)."""
        return max((mi_degree(a) for a in self.coeffs), default=-1)

    def has_constant_coefficients(self, tol: float = 0.0) -> bool:
        """True when every coefficient is scalar.

        With tol > 0, coefficient mass of positive degree up to
        tol * (largest coefficient magnitude) is treated as float noise;
        the default is an exact structural test.
        """
        if tol == 0.0:
            return all(q.degree <= 0 for q in self.coeffs.values())
        scale = max(1.0, max((q.max_abs_coeff() for q in self.coeffs.values()), default=0.0))
        for q in self.coeffs.values():
            for e, c in q.terms.items():
                if sum(e) > 0 and abs(c) > tol * scale:
                    return False
        return True

    def coefficient(self, alpha: MultiIndex) -> Poly:
        return self.coeffs.get(tuple(alpha), Poly.zero(self.n))

    def usable_order(self) -> int | None:
        return self.max_order

    def _require_order(self, needed: int, what: str):
        if self.max_order is not None and self.max_order < needed:
            raise TruncationError(
                f"{what} needs coefficients to order {needed}, "
                f"operator truncated at {self.max_order}")

    def freeze_at(self, y) -> "DiffOp":
        """Constant-coefficient operator with q_alpha replaced by q_alpha(y)."""
        vals = {a: q.eval(y) for a, q in self.coeffs.items()}
        return DiffOp.from_constant_table(vals, self.n, max_order=self.max_order)

    def sorted_coeffs(self):
        return sorted(self.coeffs.items(), key=lambda t: graded_key(t[0]))

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        if self.n != other.n:
            raise DimensionMismatchError("variable counts differ")
        out = dict(self.coeffs)
        for a, q in other.coeffs.items():
            out[a] = out[a] + q if a in out else q
        if self.max_order is None:
            mo = other.max_order
        elif other.max_order is None:
            mo = self.max_order
        else:
            mo = min(self.max_order, other.max_order)
        allow = not (self.degree_preserving and other.degree_preserving)
        return DiffOp(self.n, out, max_order=mo, allow_degree_excess=allow)

    def __mul__(self, scalar: float) -> "DiffOp":
        return DiffOp(self.n, {a: q * scalar for a, q in self.coeffs.items()},
                      max_order=self.max_order,
                      allow_degree_excess=not self.degree_preserving)

    __rmul__ = __mul__

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (other * -1.0)

    def __repr__(self):
        body = "; ".join(f"[{','.join(map(str, a))}]={format_poly(q)}"
                         for a, q in self.sorted_coeffs())
        return f"DiffOp(n={self.n}, max_order={self.max_order}, {body or '0'})"


@dataclass(frozen=True)
class OpMatrix:
    """Matrix restriction of an operator to the graded basis of R[x]_{<=d}.

    Column j holds the coordinates of T(monomial_j).
    """
    basis: BasisMap
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise DimensionMismatchError("matrix shape does not match basis dimension")
        object.__setattr__(self, "entries", m)


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------

def apply(T: DiffOp, p: Poly) -> Poly:
    """Apply T = sum q_alpha d^alpha to p."""
    if T.n != p.n:
        raise DimensionMismatchError("variable counts differ")
    if p.is_zero():
        return p
    T._require_order(int(p.degree), "apply")
    out = Poly.zero(T.n)
    for alpha, q in T.sorted_coeffs():
        if mi_degree(alpha) > p.degree:
            continue
        dp = p.derive(alpha)
        if not dp.is_zero():
            out = out + q * dp
    return out


def matrix_rep(T: DiffOp, d: int) -> OpMatrix:
    """Matrix of T on R[x]_{<=d}; requires a degree-preserving coefficient table."""
    if not T.degree_preserving:
        raise DegreeBoundError("operator does not preserve degree; no matrix restriction")
    T._require_order(d, "matrix_rep")
    basis = BasisMap(T.n, d)
    M = np.zeros((basis.dim, basis.dim))
    for j, alpha in enumerate(basis.indices):
        M[:, j] = basis.poly_to_vec(apply(T, Poly.monomial(T.n, alpha)))
    return OpMatrix(basis, M)


def canonical_from_action(action: OpMatrix, tol: float = 1e-9) -> DiffOp:
    """Recover the unique coefficient table q_alpha from a matrix restriction.

    Graded recursion: T x^alpha = sum_{beta <= alpha} q_beta * alpha!/(alpha-beta)!
    * x^{alpha-beta}, so q_alpha is determined once all strictly lower-degree
    coefficients are known.  Coefficient mass of degree > |alpha| below
    tol * max(1, |M|_inf) is discarded as numerical noise; anything larger
    means the matrix is not the restriction of a degree-preserving operator
    and raises DegreeBoundError.
    """
    basis = action.basis
    n = basis.n
    scale = max(1.0, float(np.max(np.abs(action.entries))))
    coeffs: dict = {}
    for alpha in basis.indices:
        img = basis.vec_to_poly(action.entries[:, basis.index_of(alpha)])
        resid = img
        for beta in iter_multiindices_leq(alpha):
            if beta == alpha or beta not in coeffs:
                continue
            factor = mi_perm(alpha, beta)
            resid = resid - coeffs[beta] * Poly.monomial(n, mi_sub(alpha, beta), float(factor))
        q = resid * (1.0 / mi_factorial(alpha))
        kept, bad = {}, 0.0
        bound = mi_degree(alpha)
        for e, c in q.terms.items():
            if mi_degree(e) > bound:
                bad = max(bad, abs(c))
            else:
                kept[e] = c
        if bad > tol * scale:
            raise DegreeBoundError(
                f"recovered q_{alpha} has degree-{bound}-violating mass {bad:.3e}; "
                "matrix is not the restriction of a degree-preserving operator")
        q = Poly(n, kept)
        if not q.is_zero():
            coeffs[alpha] = q
    return DiffOp(n, coeffs, max_order=basis.d)


def compose(T: DiffOp, S: DiffOp, d: int) -> DiffOp:
    """T after S, computed through the degree-d matrix restrictions."""
    if T.n != S.n:
        raise DimensionMismatchError("variable counts differ")
    mt = matrix_rep(T, d)
    ms = matrix_rep(S, d)
    return canonical_from_action(OpMatrix(mt.basis, mt.entries @ ms.entries))


def _solve_coefficient_recursion(T: DiffOp, d: int) -> DiffOp:
    """Inverse via the coefficient recursion b_0 = 1/a_0, then per-index solves.

    For the composition T o B = 1 the degree-|alpha| equation reads
    ``a_0 b_alpha + sum_{beta>0} a_beta d^beta b_alpha = -(known lower terms)``;
    with constant coefficients the left side is just a_0 b_alpha and the
    recursion is an explicit convolution, otherwise each step is a small
    linear solve on R[x]_{<=|alpha|}.
    """
    n = T.n
    a0 = T.q0
    if T.has_constant_coefficients():
        avals = {a: q.constant_value() for a, q in T.coeffs.items()}
        b: dict = {(0,) * n: 1.0 / a0}
        for alpha in iter_multiindices(n, d):
            if mi_degree(alpha) == 0:
                continue
            acc = 0.0
            for beta in iter_multiindices_leq(alpha):
                if mi_degree(beta) == 0:
                    continue
                a_val = avals.get(beta)
                if a_val is None:
                    continue
                acc += a_val * b.get(mi_sub(alpha, beta), 0.0)
            b[alpha] = -acc / a0
        return DiffOp.from_constant_table(b, n, max_order=d)

    coeffs: dict = {(0,) * n: Poly.constant(n, 1.0 / a0)}
    zero = (0,) * n
    for alpha in iter_multiindices(n, d):
        if alpha == zero:
            continue
        deg = mi_degree(alpha)
        # known contributions from strictly lower-degree b_gamma
        known = Poly.zero(n)
        for gamma in iter_multiindices_leq(alpha):
            if gamma == alpha or gamma not in coeffs:
                continue
            b_gamma = coeffs[gamma]
            shift = mi_sub(alpha, gamma)  # beta - kappa
            kbound = int(max(b_gamma.degree, 0))
            for kappa in iter_multiindices(n, kbound):
                beta = mi_add(kappa, shift)
                a_beta = T.coeffs.get(beta)
                if a_beta is None:
                    continue
                dk = b_gamma.derive(kappa)
                if dk.is_zero():
                    continue
                known = known + a_beta * dk * float(mi_binom(beta, kappa))
        # solve (a_0 + sum_{beta>0} a_beta d^beta) b_alpha = -known on R[x]_{<=deg}
        sub = BasisMap(n, deg)
        L = np.zeros((sub.dim, sub.dim))
        for j, e in enumerate(sub.indices):
            mono = Poly.monomial(n, e)
            img = mono * a0
            for beta, a_beta in T.coeffs.items():
                if mi_degree(beta) == 0:
                    continue
                dm = mono.derive(beta)
                if not dm.is_zero():
                    img = img + a_beta * dm
            L[:, j] = sub.poly_to_vec(img)
        rhs = -sub.poly_to_vec(known)
        try:
            sol = np.linalg.solve(L, rhs)
        except np.linalg.LinAlgError:
            raise NotInvertibleError(
                f"coefficient recursion singular at index {alpha}; "
                "operator is not invertible on this restriction")
        q = sub.vec_to_poly(sol)
        if not q.is_zero():
            coeffs[alpha] = q
    return DiffOp(n, coeffs, max_order=d)


def invert(T: DiffOp, d: int) -> DiffOp:
    """Two-sided inverse of T on R[x]_{<=d} via the coefficient recursion."""
    if T.q0 == 0.0:
        raise NotInvertibleError("q_0 = 0: operator has no inverse")
    T._require_order(d, "invert")
    return _solve_coefficient_recursion(T, d)


def exp_op(A: DiffOp, t: float, d: int) -> DiffOp:
    """exp(tA) on R[x]_{<=d} through the dense matrix exponential.

    Exactness on the restriction: exp(tA) p only involves the degree-d
    matrix for deg p <= d, so within floating accuracy the result is the
    genuine semigroup element restricted to the space.
    """
    M = matrix_rep(A, d)
    E = expm(t * M.entries)
    return canonical_from_action(OpMatrix(M.basis, E))


def log_op(T: DiffOp, d: int) -> DiffOp:
    """Logarithm of a constant-coefficient operator with q_0 > 0.

    In the graded basis (constant monomial first, columns holding images)
    a constant-coefficient operator is triangular with diagonal q_0 and a
    nilpotent strictly-triangular part N, so log is the finite Mercator
    series on N plus log(q_0) * identity.
    """
    if not T.has_constant_coefficients(tol=1e-12):
        raise ValueError("log_op supports only constant-coefficient operators")
    if T.q0 <= 0.0:
        raise ValueError("log_op requires q_0 > 0")
    M = matrix_rep(T, d)
    dim = M.basis.dim
    N = M.entries / T.q0 - np.eye(dim)
    if np.max(np.abs(np.tril(N))) > 1e-12 * max(1.0, np.max(np.abs(M.entries))):
        raise ValueError("matrix restriction is not triangular; not constant-coefficient")
    out = math.log(T.q0) * np.eye(dim)
    term = np.eye(dim)
    for k in range(1, dim):
        term = term @ N
        if not np.any(term):
            break
        out += ((-1.0) ** (k + 1) / k) * term
    return canonical_from_action(OpMatrix(M.basis, out))


def exp_limit_check(A: DiffOp, t: float, d: int, k: int) -> float:
    """Max-norm discrepancy of the Euler products against exp(tA) on R[x]_{<=d}.

    Compares both (1 + tA/k)^k and (1 - tA/k)^{-k} with the matrix
    exponential; the discrepancy decays as k grows.  Convergence
    diagnostic only, not a certificate.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    M = matrix_rep(A, d).entries
    dim = M.shape[0]
    ref = expm(t * M)
    fwd = np.linalg.matrix_power(np.eye(dim) + (t / k) * M, k)
    res_base = np.eye(dim) - (t / k) * M
    try:
        res_inv = np.linalg.inv(res_base)
    except np.linalg.LinAlgError:
        raise NotInvertibleError(f"resolvent 1 - tA/k singular at k={k}")
    bwd = np.linalg.matrix_power(res_inv, k)
    return float(max(np.max(np.abs(fwd - ref)), np.max(np.abs(bwd - ref))))


def build_substitution_preserver(p: list, s, D: int) -> DiffOp:
    """Operator with q_alpha = p^alpha * s_alpha / alpha! for |alpha| <= D.

    ``p`` is a vector of n polynomials and s a truncated sequence; for a
    sequence with a representing measure the result acts as
    f(x) |-> integral f(x + u * p(x)-mixture) and is positivity preserving.
    Coefficient degrees may exceed |alpha|; the result is then flagged as
    not degree-preserving rather than rejected.
    """
    n = p[0].n
    if any(q.n != n for q in p):
        raise DimensionMismatchError("substitution polynomials have mixed variable counts")
    if len(p) != s.n:
        raise DimensionMismatchError("substitution vector length must match sequence arity")
    if s.order < D:
        raise TruncationError(f"sequence truncated at {s.order}, need {D}")
    coeffs = {}
    for alpha in iter_multiindices(n, D):
        s_a = s.value(alpha)
        if s_a == 0.0:
            continue
        q = Poly.constant(n, s_a / mi_factorial(alpha))
        for pi, ai in zip(p, alpha):
            if ai:
                q = q * pi ** ai
        if not q.is_zero():
            coeffs[alpha] = q
    cert = None
    if getattr(s, "measure", None) is not None:
        cert = (SUBSTITUTION, tuple(p), s.measure)
    return DiffOp(n, coeffs, max_order=D, allow_degree_excess=True, certificate=cert)


# ---------------------------------------------------------------------------
# operator file format: one `[a1,...,an] = <poly>` line per coefficient
# ---------------------------------------------------------------------------

def parse_operator(text: str, n: int | None = None) -> DiffOp:
    """Parse the operator file format; `#` starts a comment, missing indices are zero."""
    entries = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line or not line.startswith("["):
            raise ValueError(f"line {ln}: expected `[a1,...,an] = <poly>`")
        head, body = line.split("=", 1)
        head = head.strip()
        if not head.endswith("]"):
            raise ValueError(f"line {ln}: malformed index {head!r}")
        alpha = tuple(int(tok) for tok in head[1:-1].split(","))
        entries.append((ln, alpha, body.strip()))
    if not entries:
        return DiffOp.zero(n or 1)
    arity = len(entries[0][1])
    if n is not None and n != arity:
        raise DimensionMismatchError(f"operator file has arity {arity}, expected {n}")
    coeffs = {}
    for ln, alpha, body in entries:
        if len(alpha) != arity:
            raise ValueError(f"line {ln}: inconsistent index length")
        q = parse_poly(body, arity)
        if alpha in coeffs:
            raise ValueError(f"line {ln}: duplicate index {alpha}")
        if not q.is_zero():
            coeffs[alpha] = q
    return DiffOp(arity, coeffs, max_order=None, allow_degree_excess=True)


def format_operator(T: DiffOp) -> str:
    lines = [f"[{','.join(map(str, a))}] = {format_poly(q)}" for a, q in T.sorted_coeffs()]
    return "\n".join(lines) + ("\n" if lines else "")


def read_operator(path, n: int | None = None) -> DiffOp:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_operator(fh.read(), n)


def write_operator(path, T: DiffOp) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_operator(T))
