"""Exact solvers for linear objectives over the indicator-ball set.

For a fixed activation pattern the continuous part has a closed form
(value ``sum_{i in S} c_i - sqrt(sum_{i in S} a_i^2)``), so exact solving
reduces to a search over activation patterns.  The search is brute force in
general and a sort in the zero-activation-cost, exactly-k case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CARD_EQ, ProblemInstance, ZFamily, as_vector, enumerate_Z


@dataclass(frozen=True)
class SupportSolution:
    """Closed-form optimum with activations fixed to the index set S."""

    S: tuple
    value: float
    x_opt: np.ndarray


@dataclass(frozen=True)
class DiscreteSolution:
    """A feasible (x, z) pair together with its objective value."""

    z_opt: np.ndarray
    x_opt: np.ndarray
    value: float


def support_value(S, inst: ProblemInstance) -> SupportSolution:
    """Optimal value and minimizer of the fixed-support subproblem.

    The continuous minimizer is the negatively scaled unit vector along the
    restriction of a to S; when that restriction vanishes, x = 0 is the
    canonical minimizer.  The empty support has value 0.
    """
    idx = tuple(sorted({int(i) for i in S}))
    n = inst.n
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"support index out of range for n = {n}")
    sel = np.array(idx, dtype=int)
    a_s = inst.a[sel]
    gnorm = math.sqrt(float(np.sum(a_s * a_s)))
    value = float(np.sum(inst.c[sel])) - gnorm
    x = np.zeros(n)
    if gnorm > 0.0:
        x[sel] = -a_s / gnorm
    return SupportSolution(S=idx, value=value, x_opt=x)


def discrete_objective(z, a, c) -> float:
    """Objective of the support-reduced problem, c'z - sqrt(sum a_i^2 z_i)."""
    z = np.asarray(z, dtype=float)
    return float(c @ z) - math.sqrt(float((a * a) @ z))


def solve_discrete_bruteforce(inst: ProblemInstance) -> DiscreteSolution:
    """Globally optimal (x, z) by scanning every activation pattern.

    Exact and deterministic: ties are broken toward the lexicographically
    smallest z (enumeration rows are lexicographic, first minimum wins).
    Guarded to n <= 24 through the enumeration guard.
    """
    members = enumerate_Z(inst.zfam).astype(float)
    values = members @ inst.c - np.sqrt(members @ (inst.a * inst.a))
    row = int(np.argmin(values))
    support = tuple(int(i) for i in np.flatnonzero(members[row] > 0.5))
    sol = support_value(support, inst)
    z = np.zeros(inst.n)
    if support:
        z[list(support)] = 1.0
    return DiscreteSolution(z_opt=z, x_opt=sol.x_opt, value=sol.value)


def solve_discrete_sort(a, k: int) -> DiscreteSolution:
    """Sorting solver for the zero-z-cost, exactly-k cardinality case.

    Activates the k largest squared entries of a (smallest index wins ties).
    """
    a = as_vector(a, "a")
    n = a.size
    if not 1 <= int(k) <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    k = int(k)
    order = np.argsort(-(a * a), kind="stable")
    support = tuple(sorted(int(i) for i in order[:k]))
    inst = ProblemInstance(a, np.zeros(n), ZFamily(CARD_EQ, n, k))
    sol = support_value(support, inst)
    z = np.zeros(n)
    z[list(support)] = 1.0
    return DiscreteSolution(z_opt=z, x_opt=sol.x_opt, value=sol.value)
