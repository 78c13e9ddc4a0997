"""Valid inequalities, membership oracles and the natural convex relaxation.

Polyhedral side: for a weight vector alpha the mixed-binary inequality
``sum_i |alpha_i x_i| <= sqrt(sum_i alpha_i^2 z_i)`` has a submodular
right-hand side in the activation set, so the classic marginal-based cut
families apply; this module generates them, evaluates them on ``|x|``
coefficients directly, and separates over them.

Nonlinear side: the perspective inequality ``sum_i x_i^2 / z_i <= 1``
(under the shared zero-division convention) is exactly the condition for a
point to satisfy every weighted inequality above; ``find_violating_alpha``
turns a perspective violation into an explicit violated weight vector.

Also included: the natural convex relaxation of the support-reduced problem
over conv(Z) with edge rounding, and the lifting of a general convex
quadratic row into indicator-ball form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CARD_EQ,
    CARD_LE,
    DEFAULT_TOL,
    FREE,
    MixedPoint,
    ProblemInstance,
    SolverError,
    Tolerance,
    ZFamily,
    as_vector,
    enumerate_Z,
    safe_div_arr,
)
from .discrete import discrete_objective

SEPARATION_EXACT_GUARD = 16

# a coordinate counts as fractional when it is at least this far from 0/1
FRACTIONAL_EPS = 1e-7


@dataclass(frozen=True)
class CutVector:
    """A weight vector alpha with its cached |alpha|-descending index order."""

    alpha: np.ndarray
    abs_order: np.ndarray = None

    def __post_init__(self):
        alpha = as_vector(self.alpha, "alpha")
        alpha.setflags(write=False)
        order = np.argsort(-np.abs(alpha), kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "abs_order", order)

    @property
    def n(self) -> int:
        return self.alpha.size


def _alpha_of(alpha) -> np.ndarray:
    if isinstance(alpha, CutVector):
        return alpha.alpha
    return as_vector(alpha, "alpha")


@dataclass(frozen=True)
class LinearCut:
    """The inequality  sum_i pi_abs_i |x_i| + sum_i rho_z_i z_i <= rhs.

    Coefficients are stored on |x_i| directly (every cut in this family is
    symmetric under sign flips of x), so evaluation is O(n) instead of
    expanding the 2^n signed forms.
    """

    pi_abs: np.ndarray
    rho_z: np.ndarray
    rhs: float

    def __post_init__(self):
        pi = as_vector(self.pi_abs, "pi_abs")
        if np.any(pi < 0.0):
            raise ValueError("pi_abs coefficients must be nonnegative")
        rz = as_vector(self.rho_z, "rho_z")
        if pi.size != rz.size:
            raise ValueError("pi_abs and rho_z must have equal length")
        pi.setflags(write=False)
        rz.setflags(write=False)
        object.__setattr__(self, "pi_abs", pi)
        object.__setattr__(self, "rho_z", rz)

    def lhs(self, x, z) -> float:
        return float(self.pi_abs @ np.abs(x) + self.rho_z @ np.asarray(z, dtype=float))

    def violation(self, x, z) -> float:
        return self.lhs(x, z) - self.rhs

    def violation_at(self, p: MixedPoint) -> float:
        return self.violation(p.x, p.z)

    def satisfied_by(self, p: MixedPoint, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.violation_at(p) <= tol.feas_abs

    def to_dict(self) -> dict:
        return {"pi_abs": self.pi_abs.tolist(), "rho_z": self.rho_z.tolist(), "rhs": self.rhs}


def _as_index_set(S, n: int) -> np.ndarray:
    idx = sorted({int(i) for i in S})
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"index set out of range for n = {n}")
    return np.array(idx, dtype=int)


def g_value(S, alpha) -> float:
    """Euclidean norm of the alpha entries on S; a submodular set function."""
    a = _alpha_of(alpha)
    idx = _as_index_set(S, a.size)
    return math.sqrt(float(np.sum(a[idx] * a[idx])))


def rho(i: int, S, alpha) -> float:
    """Marginal gain of adding index i to S: g(S + i) - g(S).  Requires i not in S."""
    a = _alpha_of(alpha)
    idx = _as_index_set(S, a.size)
    i = int(i)
    if i < 0 or i >= a.size:
        raise IndexError(f"index {i} out of range")
    if i in set(idx.tolist()):
        raise ValueError(f"index {i} already belongs to S")
    q = float(np.sum(a[idx] * a[idx]))
    return math.sqrt(q + a[i] * a[i]) - math.sqrt(q)


def _marginals(a: np.ndarray, in_S: np.ndarray):
    """Vectors of the marginal quantities used by the cut generators."""
    asq = a * a
    q = float(asq[in_S].sum())
    # rho_i(S - i) for i in S (meaningless elsewhere, masked by callers)
    drop = np.sqrt(np.clip(q - asq, 0.0, None))
    rho_self = math.sqrt(q) - drop
    # rho_i(S) for i not in S
    rho_add = np.sqrt(q + asq) - math.sqrt(q)
    return q, rho_self, rho_add


def submodular_cut_1(S, alpha) -> LinearCut:
    """First submodular cut: marginals rho_i(S - i) inside S, rho_i(empty) outside."""
    a = _alpha_of(alpha)
    n = a.size
    idx = _as_index_set(S, n)
    in_S = np.zeros(n, dtype=bool)
    in_S[idx] = True
    q, rho_self, _ = _marginals(a, in_S)
    rho_empty = np.abs(a)
    rho_z = np.where(in_S, -rho_self, -rho_empty)
    rhs = math.sqrt(q) - float(rho_self[in_S].sum())
    return LinearCut(np.abs(a), rho_z, rhs)


def submodular_cut_2(S, alpha) -> LinearCut:
    """Second submodular cut: marginals rho_i(N - i) inside S, rho_i(S) outside."""
    a = _alpha_of(alpha)
    n = a.size
    idx = _as_index_set(S, n)
    in_S = np.zeros(n, dtype=bool)
    in_S[idx] = True
    asq = a * a
    q, _, rho_add = _marginals(a, in_S)
    full = float(asq.sum())
    rho_last = math.sqrt(full) - np.sqrt(np.clip(full - asq, 0.0, None))
    rho_z = np.where(in_S, -rho_last, -rho_add)
    rhs = math.sqrt(q) - float(rho_last[in_S].sum())
    return LinearCut(np.abs(a), rho_z, rhs)


def base_inequality(S, alpha) -> LinearCut:
    """Base cut with the outside-S activation terms dropped.

    Only valid on the restriction z_i = 0 for all i outside S.
    """
    a = _alpha_of(alpha)
    n = a.size
    idx = _as_index_set(S, n)
    in_S = np.zeros(n, dtype=bool)
    in_S[idx] = True
    q, rho_self, _ = _marginals(a, in_S)
    rho_z = np.where(in_S, -rho_self, 0.0)
    rhs = math.sqrt(q) - float(rho_self[in_S].sum())
    return LinearCut(np.abs(a), rho_z, rhs)


def separate_submodular(p: MixedPoint, alpha, mode: str = "heuristic",
                        tol: Tolerance = DEFAULT_TOL):
    """Most violated submodular cut at p, or None when none is violated.

    heuristic: scans the n+1 nested prefix sets of coordinates ordered by
    z descending (stable, so smallest index wins ties) under both cut
    families.  exact: scans every subset; guarded to n <= 16.  The most
    violated cut is returned; exact ties keep the earliest candidate in
    scan order (subsets ascending as bit patterns, first family first).
    """
    a = _alpha_of(alpha)
    n = a.size
    if p.n != n:
        raise ValueError("dimension mismatch between point and alpha")
    if mode not in ("heuristic", "exact"):
        raise ValueError(f"unknown separation mode {mode!r}")

    if mode == "heuristic":
        order = np.argsort(-p.z, kind="stable")
        best_cut, best_viol = None, 0.0
        for size in range(n + 1):
            S = order[:size]
            for make in (submodular_cut_1, submodular_cut_2):
                cut = make(S, a)
                v = cut.violation_at(p)
                if v > best_viol:
                    best_cut, best_viol = cut, v
        if best_cut is not None and best_viol > tol.feas_abs:
            return best_cut
        return None

    if n > SEPARATION_EXACT_GUARD:
        raise ValueError(f"exact separation is guarded to n <= {SEPARATION_EXACT_GUARD}")
    members = enumerate_Z(ZFamily.free(n)).astype(float)
    asq = a * a
    q = members @ asq
    sq = np.sqrt(q)
    rho_self = sq[:, None] - np.sqrt(np.clip(q[:, None] - members * asq[None, :], 0.0, None))
    rho_add = np.sqrt(q[:, None] + asq[None, :]) - sq[:, None]
    full = float(asq.sum())
    rho_last = math.sqrt(full) - np.sqrt(np.clip(full - asq, 0.0, None))
    lhs_abs = float(np.abs(a * p.x).sum())
    one_minus_z = 1.0 - p.z
    rhs_a = sq - (members * rho_self) @ one_minus_z + ((1.0 - members) * np.abs(a)[None, :]) @ p.z
    rhs_b = sq - (members * rho_last[None, :]) @ one_minus_z + ((1.0 - members) * rho_add) @ p.z
    seq = np.stack([lhs_abs - rhs_a, lhs_abs - rhs_b], axis=1).ravel()
    best = int(np.argmax(seq))
    if seq[best] <= tol.feas_abs:
        return None
    S = np.flatnonzero(members[best // 2] > 0.5)
    cut = submodular_cut_1(S, a) if best % 2 == 0 else submodular_cut_2(S, a)
    if cut.violation_at(p) <= tol.feas_abs:
        return None
    return cut


# ---------------------------------------------------------------------------
# membership oracles


def p0_membership(p: MixedPoint, alpha, zfam: ZFamily, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Membership in the mixed-binary weighted inequality set for this alpha."""
    a = _alpha_of(alpha)
    if p.n != a.size or p.n != zfam.n:
        raise ValueError("dimension mismatch")
    if not zfam.contains(p.z, tol):
        return False
    zround = np.round(p.z)
    lhs = float(np.abs(a * p.x).sum())
    rhs = math.sqrt(float((a * a) @ zround))
    return lhs <= rhs + tol.feas_abs


def c_alpha_membership(p: MixedPoint, alpha, zfam: ZFamily, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Membership in the natural relaxation: z in conv(Z), same inequality."""
    a = _alpha_of(alpha)
    if p.n != a.size or p.n != zfam.n:
        raise ValueError("dimension mismatch")
    if not zfam.conv_contains(p.z, tol):
        return False
    lhs = float(np.abs(a * p.x).sum())
    rhs = math.sqrt(float((a * a) @ p.z))
    return lhs <= rhs + tol.feas_abs


def perspective_sum(x, z) -> float:
    """sum_i x_i^2 / z_i under the shared zero-division convention."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    zero = z == 0.0
    if np.any(zero & (x != 0.0)):
        return math.inf
    live = ~zero
    return float(np.sum(x[live] ** 2 / z[live]))


def perspective_membership(p: MixedPoint, zfam: ZFamily, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Perspective-relaxation membership: z in conv(Z) and sum x_i^2/z_i <= 1."""
    if p.n != zfam.n:
        raise ValueError("dimension mismatch")
    if not zfam.conv_contains(p.z, tol):
        return False
    return perspective_sum(p.x, p.z) <= 1.0 + tol.feas_abs


def find_violating_alpha(p: MixedPoint, tol: Tolerance = DEFAULT_TOL):
    """Weight vector certifying a perspective violation, or None.

    When the perspective sum exceeds 1 the returned alpha = x/z (convention
    safe; a unit vector on the smallest offending index when some z_i = 0
    with x_i != 0) strictly violates the weighted inequality for alpha.
    """
    s = perspective_sum(p.x, p.z)
    if s <= 1.0 + tol.feas_abs:
        return None
    if math.isinf(s):
        i = int(np.flatnonzero((p.z == 0.0) & (p.x != 0.0))[0])
        alpha = np.zeros(p.n)
        alpha[i] = 1.0
        return CutVector(alpha)
    return CutVector(safe_div_arr(p.x, p.z))


def cardinality_cut(zfam: ZFamily) -> LinearCut:
    """One-norm budget cut ||x||_1 <= sqrt(k) for the exactly-k family."""
    if zfam.kind != CARD_EQ:
        raise ValueError("cardinality cut requires the exactly-k family")
    return LinearCut(np.ones(zfam.n), np.zeros(zfam.n), math.sqrt(zfam.k))


# ---------------------------------------------------------------------------
# natural convex relaxation over conv(Z)


@dataclass(frozen=True)
class RelaxationSolution:
    """Relaxation optimum with its edge rounding.

    value is the relaxed optimum over conv(Z); rounded_z is the better of
    the two edge endpoints (or z_bar itself when integral) and
    rounded_value its support-reduced objective.
    """

    z_bar: np.ndarray
    value: float
    rounded_z: np.ndarray
    rounded_value: float
    fractional_count: int


def _fractional_indices(z: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.minimum(z, 1.0 - z) > FRACTIONAL_EPS)


def _phi(z: np.ndarray, c: np.ndarray, asq: np.ndarray) -> float:
    return float(c @ z) - math.sqrt(max(float(asq @ z), 0.0))


def _segment_argmin(z0: np.ndarray, z1: np.ndarray, c: np.ndarray, asq: np.ndarray):
    """Exact minimizer of phi on the segment [z0, z1] (phi is convex there).

    On the segment phi(gamma) = const + gamma * cd - sqrt(sigma + gamma * ds)
    with cd, ds linear coefficients, so the stationary point is closed form.
    """
    d = z1 - z0
    cd = float(c @ d)
    ds = float(asq @ d)
    sigma = max(float(asq @ z0), 0.0)
    candidates = [0.0, 1.0]
    if ds != 0.0 and cd != 0.0:
        s = ds / (2.0 * cd)
        if s > 0.0:
            gamma = (s * s - sigma) / ds
            if 0.0 < gamma < 1.0:
                candidates.append(gamma)
    best_g, best_v = 0.0, math.inf
    for gamma in candidates:
        v = _phi(z0 + gamma * d, c, asq)
        if v < best_v:
            best_g, best_v = gamma, v
    return z0 + best_g * d, best_v


def _relax_free(inst: ProblemInstance):
    """Exact threshold scan for the free-box relaxation.

    Coordinates with c_i <= 0 are fixed to 1.  The rest are ordered by the
    ratio a_i^2 / c_i descending; every prefix and every prefix-plus-one
    fractional stationary point is a candidate, and an optimum always has
    this threshold shape, so the scan is exact with no iteration.
    """
    a, c = inst.a, inst.c
    n = inst.n
    asq = a * a
    fixed = c <= 0.0
    sigma0 = float(asq[fixed].sum())
    cost0 = float(c[fixed].sum())
    pos = np.flatnonzero(~fixed)
    ratios = asq[pos] / c[pos]
    order = pos[np.argsort(-ratios, kind="stable")]

    base = fixed.astype(float)
    best_z = base.copy()
    best_val = cost0 - math.sqrt(sigma0)
    sigma = sigma0
    cost = cost0
    for m in range(order.size + 1):
        if m > 0:
            j = int(order[m - 1])
            sigma += asq[j]
            cost += c[j]
            val = cost - math.sqrt(sigma)
            if val < best_val:
                best_val = val
                best_z = base.copy()
                best_z[order[:m]] = 1.0
        if m < order.size:
            j = int(order[m])
            if asq[j] > 0.0:
                root = asq[j] / (2.0 * c[j])
                t = (root * root - sigma) / asq[j]
                if 0.0 < t < 1.0:
                    val = cost + c[j] * t - root
                    if val < best_val:
                        best_val = val
                        best_z = base.copy()
                        best_z[order[:m]] = 1.0
                        best_z[j] = t
    return best_z, best_val


def _lp_vertex(g: np.ndarray, zfam: ZFamily) -> np.ndarray:
    """Vertex of conv(Z) minimizing the linear function g (stable ties)."""
    n = zfam.n
    v = np.zeros(n)
    order = np.argsort(g, kind="stable")
    if zfam.kind == CARD_EQ:
        v[order[: zfam.k]] = 1.0
    else:
        limit = n if zfam.kind == FREE else zfam.k
        chosen = [int(i) for i in order[:limit] if g[int(i)] < 0.0]
        v[chosen] = 1.0
    return v


def _grad_phi(z: np.ndarray, c: np.ndarray, asq: np.ndarray) -> np.ndarray:
    sigma = float(asq @ z)
    if sigma <= 0.0:
        # steepest improvement is unbounded on coordinates with a_i != 0
        return np.where(asq > 0.0, -math.inf, c)
    return c - asq / (2.0 * math.sqrt(sigma))


def _relax_card(inst: ProblemInstance, tol: Tolerance, max_iter: int):
    """Conditional-gradient solve over the cardinality polytope.

    Iterations use the exact segment minimizer as line search; each round an
    edge candidate built from the current gradient ordering is polished
    exactly, and the linearization gap certifies optimality to solver_rel.
    """
    a, c, zfam = inst.a, inst.c, inst.zfam
    asq = a * a
    k = zfam.k

    def gap_at(z: np.ndarray) -> float:
        g = _grad_phi(z, c, asq)
        v = _lp_vertex(g, zfam)
        finite = np.isfinite(g)
        if not np.all(finite):
            return math.inf
        return float(g @ (z - v))

    # start from the vertex with the largest curvature mass
    start_order = np.argsort(-asq, kind="stable")
    z = np.zeros(zfam.n)
    if zfam.kind == CARD_EQ:
        z[start_order[:k]] = 1.0
    else:
        lead = [int(i) for i in start_order[:k] if asq[int(i)] > 0.0 or c[int(i)] < 0.0]
        z[lead] = 1.0
    best_z = z.copy()
    best_val = _phi(z, c, asq)

    target = tol.solver_rel
    for it in range(1, max_iter + 1):
        g = _grad_phi(z, c, asq)
        v = _lp_vertex(g, zfam)
        z, val = _segment_argmin(z, v, c, asq)
        if val < best_val:
            best_val, best_z = val, z.copy()

        # edge polish from the gradient ordering at the incumbent
        gb = _grad_phi(best_z, c, asq)
        if np.all(np.isfinite(gb)):
            order = np.argsort(gb, kind="stable")
            v1 = _lp_vertex(gb, zfam)
            edge_partners = []
            if zfam.kind == CARD_EQ:
                if zfam.n > k:  # swap the marginal member for the next candidate
                    v2 = np.zeros(zfam.n)
                    v2[order[: k - 1]] = 1.0
                    v2[order[k]] = 1.0
                    edge_partners.append(v2)
            else:
                nnz = int(v1.sum())
                if nnz < k:
                    extra = [int(i) for i in order if v1[int(i)] == 0.0]
                    if extra:
                        v2 = v1.copy()
                        v2[extra[0]] = 1.0
                        edge_partners.append(v2)
                if nnz > 0:
                    weakest = max((int(i) for i in np.flatnonzero(v1 > 0.5)), key=lambda i: (gb[i], -i))
                    v2 = v1.copy()
                    v2[weakest] = 0.0
                    edge_partners.append(v2)
            cval = _phi(v1, c, asq)
            if cval < best_val:
                best_val, best_z = cval, v1.copy()
            for w in edge_partners:
                cand, cval = _segment_argmin(v1, w, c, asq)
                if cval < best_val:
                    best_val, best_z = cval, cand.copy()

        gap = gap_at(best_z)
        if gap <= target * max(1.0, abs(best_val)):
            return best_z, best_val
    raise SolverError(
        f"relaxation solve did not converge within {max_iter} iterations",
        best=best_z, best_value=best_val, gap=gap_at(best_z),
    )


def _round_candidates(z: np.ndarray, zfam: ZFamily) -> list:
    """Feasible binary roundings of z consistent with its edge pattern."""
    frac = _fractional_indices(z)
    base = np.round(z)
    base[frac] = 0.0
    cands = []

    def feasible(v: np.ndarray) -> bool:
        ones = int(v.sum())
        if zfam.kind == CARD_LE:
            return ones <= zfam.k
        if zfam.kind == CARD_EQ:
            return ones == zfam.k
        return True

    if frac.size == 0:
        cands.append(np.round(z))
    elif frac.size == 1:
        lo = base.copy()
        hi = base.copy()
        hi[frac[0]] = 1.0
        cands.extend([lo, hi])
    elif frac.size == 2:
        for keep in (frac[0], frac[1]):
            v = base.copy()
            v[keep] = 1.0
            cands.append(v)
        cands.append(base.copy())
        both = base.copy()
        both[frac] = 1.0
        cands.append(both)
    else:
        # defensive fallback: greedy top rounding by fractional mass
        order = np.argsort(-z, kind="stable")
        if zfam.kind == CARD_EQ:
            v = np.zeros(zfam.n)
            v[order[: zfam.k]] = 1.0
            cands.append(v)
        else:
            limit = zfam.n if zfam.kind == FREE else zfam.k
            v = np.zeros(zfam.n)
            v[[int(i) for i in order[:limit] if z[int(i)] >= 0.5]] = 1.0
            cands.append(v)
    out = [v for v in cands if feasible(v)]
    if not out:
        raise SolverError("edge rounding produced no feasible candidate", best=z)
    # deterministic order: lexicographically smallest first among duplicates
    out.sort(key=lambda v: tuple(v.tolist()))
    dedup = []
    for v in out:
        if not any(np.array_equal(v, w) for w in dedup):
            dedup.append(v)
    return dedup


def solve_relaxation(inst: ProblemInstance, tol: Tolerance = DEFAULT_TOL,
                     max_iter: int = 50_000) -> RelaxationSolution:
    """Minimize c'z - sqrt(sum a_i^2 z_i) over conv(Z), with edge rounding.

    The free-box case is solved by an exact threshold scan (at most one
    fractional coordinate by construction).  Cardinality families use
    conditional-gradient iterations with exact line search, edge
    identification and a linearization-gap stopping rule at solver_rel;
    exhausting max_iter raises SolverError carrying the best iterate.
    """
    asq = inst.a * inst.a
    if inst.zfam.kind == FREE:
        z_bar, value = _relax_free(inst)
    else:
        z_bar, value = _relax_card(inst, tol, max_iter)
    frac = _fractional_indices(z_bar)
    best_round, best_round_val = None, math.inf
    for cand in _round_candidates(z_bar, inst.zfam):
        v = discrete_objective(cand, inst.a, inst.c)
        if v < best_round_val:
            best_round, best_round_val = cand, v
    return RelaxationSolution(
        z_bar=z_bar,
        value=value,
        rounded_z=best_round,
        rounded_value=best_round_val,
        fractional_count=int(frac.size),
    )


# ---------------------------------------------------------------------------
# lifting of a general convex quadratic row


@dataclass(frozen=True)
class LiftedSystem:
    """Coefficients of the lifted indicator-ball reformulation.

    One extra coordinate (index 0, activation fixed to one) absorbs the
    residual quadratic; original coordinate i is rescaled by scale[i].
    """

    scale: np.ndarray        # sqrt(D_ii / budget) per original coordinate
    residual: np.ndarray     # residual PSD matrix divided by the budget
    dim: int                 # lifted dimension n + 1

    @property
    def fixed_activation_index(self) -> int:
        return 0


def _psd_pivot_check(M: np.ndarray, shift: float):
    """Cholesky-style factorization allowing pivots down to -shift.

    Raises ValueError naming the first offending pivot when the matrix is
    not positive semidefinite within the shift allowance.
    """
    n = M.shape[0]
    L = np.zeros_like(M)
    col_tol = math.sqrt(shift) * (1.0 + math.sqrt(max(float(np.abs(np.diag(M)).max()), 1.0)))
    for j in range(n):
        pivot = M[j, j] - float(L[j, :j] @ L[j, :j])
        if pivot < -shift:
            raise ValueError(
                f"matrix is not positive semidefinite within shift {shift:g}: "
                f"pivot {j} evaluates to {pivot:.6e}"
            )
        L[j, j] = math.sqrt(max(pivot, 0.0))
        for i in range(j + 1, n):
            val = M[i, j] - float(L[i, :j] @ L[j, :j])
            if L[j, j] > 0.0:
                L[i, j] = val / L[j, j]
            elif abs(val) > col_tol:
                raise ValueError(
                    f"matrix is not positive semidefinite within shift {shift:g}: "
                    f"zero pivot {j} with nonzero column entry {val:.6e}"
                )
            else:
                L[i, j] = 0.0
    return L


def quad_reformulate(Sigma, b: float, D) -> LiftedSystem:
    """Lift the row y' Sigma y <= b into indicator-ball form.

    D is the positive diagonal part (given as a vector of diagonal entries
    or a diagonal matrix); Sigma - diag(D) must be positive semidefinite
    within a 1e-10 shift, checked by symmetric factorization that names the
    offending pivot on failure.
    """
    Sigma = np.array(Sigma, dtype=float, copy=True)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ValueError("Sigma must be a square matrix")
    if not np.all(np.isfinite(Sigma)):
        raise ValueError("Sigma must be finite")
    if not np.allclose(Sigma, Sigma.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(Sigma).max()))):
        raise ValueError("Sigma must be symmetric")
    if not b > 0.0:
        raise ValueError("budget b must be positive")
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        if not np.array_equal(D, np.diag(np.diag(D))):
            raise ValueError("D must be diagonal")
        D = np.diag(D).copy()
    if D.shape != (Sigma.shape[0],):
        raise ValueError("D must match the dimension of Sigma")
    if np.any(D <= 0.0):
        raise ValueError("D must have strictly positive diagonal entries")
    R = Sigma - np.diag(D)
    _psd_pivot_check(R, shift=1e-10)
    return LiftedSystem(scale=np.sqrt(D / b), residual=R / b, dim=Sigma.shape[0] + 1)
