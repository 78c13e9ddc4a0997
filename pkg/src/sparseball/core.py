"""Domain types and feasibility predicates for the indicator-sparse unit ball.

The central object is the pair set ``{(x, z) : ||x||_2^2 <= 1,
x o (1 - z) = 0, z in Z}`` where ``o`` is the entrywise product and Z is a
binary activation family over {0,1}^n.  Three families are supported: the
free box, at-most-k and exactly-k cardinality.

All types are immutable after construction and every operation is pure, so
everything here is safe to call concurrently.  Ties in sorts and argmins are
always broken toward the smallest index so results are reproducible.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FREE = "free"
CARD_LE = "card_le"
CARD_EQ = "card_eq"
_KINDS = (FREE, CARD_LE, CARD_EQ)

# enumeration of an activation family is an oracle for small n only
ENUMERATION_GUARD = 24


class SolverError(RuntimeError):
    """An iterative solver exhausted its iteration budget.

    Carries the best iterate found so far and a gap estimate so callers can
    still inspect partial progress.
    """

    def __init__(self, message: str, best=None, best_value=None, gap=None):
        super().__init__(message)
        self.best = best
        self.best_value = best_value
        self.gap = gap


def safe_div(num: float, den: float) -> float:
    """Division under the package-wide zero-denominator convention.

    0/0 = 0 and a/0 = +-inf by the sign of a.  The perspective membership
    test and the dual closed forms all rely on this exact convention, so it
    lives here as the single shared helper.
    """
    if den == 0.0:
        if num == 0.0:
            return 0.0
        return math.inf if num > 0.0 else -math.inf
    return num / den


def safe_div_arr(num, den) -> np.ndarray:
    """Vectorized :func:`safe_div`."""
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    out = np.zeros(num.shape)
    nz = den != 0.0
    out[nz] = num[nz] / den[nz]
    zm = ~nz
    out[zm] = np.where(num[zm] > 0.0, math.inf, np.where(num[zm] < 0.0, -math.inf, 0.0))
    return out


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Copy input into a finite 1-D float array or raise ValueError."""
    arr = np.array(v, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    return arr


@dataclass(frozen=True)
class Tolerance:
    """Shared numeric tolerances.

    feas_abs is the absolute slack for feasibility predicates, solver_rel
    the relative tolerance of iterative solvers, and oracle_abs the looser
    slack used when comparing against grid/enumeration oracles.
    """

    feas_abs: float = 1e-9
    solver_rel: float = 1e-6
    oracle_abs: float = 1e-4

    def __post_init__(self):
        for name in ("feas_abs", "solver_rel", "oracle_abs"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class ZFamily:
    """A family of admissible binary activation patterns z in {0,1}^n."""

    kind: str
    n: int
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {_KINDS}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError("n must be a positive integer")
        if self.kind == FREE:
            if self.k is not None:
                raise ValueError("k only applies to cardinality families")
        else:
            if not (isinstance(self.k, int) and 1 <= self.k <= self.n):
                raise ValueError(f"cardinality families need 1 <= k <= n, got k={self.k}, n={self.n}")

    @classmethod
    def free(cls, n: int) -> "ZFamily":
        return cls(FREE, n)

    @classmethod
    def card_le(cls, n: int, k: int) -> "ZFamily":
        return cls(CARD_LE, n, k)

    @classmethod
    def card_eq(cls, n: int, k: int) -> "ZFamily":
        return cls(CARD_EQ, n, k)

    def member_count(self) -> int:
        """Exact number of members of the family."""
        if self.kind == FREE:
            return 2 ** self.n
        if self.kind == CARD_LE:
            return sum(math.comb(self.n, j) for j in range(self.k + 1))
        return math.comb(self.n, self.k)

    def contains(self, z, tol: Tolerance = DEFAULT_TOL) -> bool:
        """Binary membership: entries 0/1 within feas_abs plus the cardinality row."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"dimension mismatch: expected length {self.n}")
        zround = np.round(z)
        if np.any(np.abs(z - zround) > tol.feas_abs):
            return False
        ones = int(zround.sum())
        if self.kind == CARD_LE:
            return ones <= self.k
        if self.kind == CARD_EQ:
            return ones == self.k
        return True

    def conv_contains(self, z, tol: Tolerance = DEFAULT_TOL) -> bool:
        """Membership in the convex hull of the family (unit box plus budget row)."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"dimension mismatch: expected length {self.n}")
        if np.any(z < -tol.feas_abs) or np.any(z > 1.0 + tol.feas_abs):
            return False
        total = float(z.sum())
        if self.kind == CARD_LE:
            return total <= self.k + tol.feas_abs
        if self.kind == CARD_EQ:
            return abs(total - self.k) <= tol.feas_abs
        return True


@dataclass(frozen=True)
class MixedPoint:
    """A candidate pair (x, z).

    z entries are clamped to [0, 1] at construction; non-finite input is
    rejected.  Arrays are frozen read-only so points can be shared freely.
    """

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = as_vector(self.x, "x")
        z = as_vector(self.z, "z")
        if x.shape != z.shape:
            raise ValueError("x and z must have equal length")
        z = np.clip(z, 0.0, 1.0)
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class ProblemInstance:
    """Linear costs (a on the continuous part, c on the activations)."""

    a: np.ndarray
    c: np.ndarray
    zfam: ZFamily

    def __post_init__(self):
        a = as_vector(self.a, "a")
        c = as_vector(self.c, "c")
        if a.size != self.zfam.n or c.size != self.zfam.n:
            raise ValueError("a and c must have length zfam.n")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.zfam.n


def is_in_X(p: MixedPoint, zfam: ZFamily, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Tolerance-aware membership in the indicator-ball set.

    Requires the squared norm of x at most 1, binary z belonging to the
    family, and the complementarity x_i (1 - z_i) = 0, each within feas_abs.
    """
    if p.n != zfam.n:
        raise ValueError("dimension mismatch between point and family")
    if float(p.x @ p.x) > 1.0 + tol.feas_abs:
        return False
    if not zfam.contains(p.z, tol):
        return False
    return bool(np.all(np.abs(p.x * (1.0 - p.z)) <= tol.feas_abs))


def satisfies_bigM(p: MixedPoint, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Check the big-M linearization |x_i| <= z_i within feas_abs."""
    return bool(np.all(np.abs(p.x) <= p.z + tol.feas_abs))


def enumerate_Z(zfam: ZFamily) -> np.ndarray:
    """All members of the family as an (m, n) 0/1 matrix, rows lexicographic.

    Guarded to n <= 24.  Intended as an enumeration oracle for brute-force
    solving and tests; cost is proportional to the member count.
    """
    n = zfam.n
    if n > ENUMERATION_GUARD:
        raise ValueError(f"enumeration is guarded to n <= {ENUMERATION_GUARD}, got n = {n}")
    if zfam.kind == FREE:
        # counting order over n-bit integers equals lexicographic vector order
        shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
        total = 2 ** n
        out = np.empty((total, n), dtype=np.int8)
        chunk = 1 << 18
        for start in range(0, total, chunk):
            stop = min(start + chunk, total)
            ids = np.arange(start, stop, dtype=np.uint64)[:, None]
            out[start:stop] = ((ids >> shifts) & np.uint64(1)).astype(np.int8)
        return out
    sizes = range(zfam.k + 1) if zfam.kind == CARD_LE else (zfam.k,)
    rows = []
    for size in sizes:
        for support in itertools.combinations(range(n), size):
            row = [0] * n
            for i in support:
                row[i] = 1
            rows.append(tuple(row))
    rows.sort()
    return np.array(rows, dtype=np.int8)


# ---------------------------------------------------------------------------
# instance file format


def _reject_constant(token: str):
    raise ValueError(f"non-finite value {token!r} is not allowed in instance files")


def loads_strict(text: str):
    """json.loads that rejects NaN/Infinity tokens."""
    return json.loads(text, parse_constant=_reject_constant)


def parse_problem_instance(obj: dict) -> ProblemInstance:
    """Build a ProblemInstance from its JSON object form."""
    try:
        n = int(obj["n"])
        a = obj["a"]
        c = obj["c"]
        fam = obj["zfam"]
        kind = fam["kind"]
        k = fam.get("k")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed problem instance: missing field ({exc})") from exc
    zfam = ZFamily(kind, n, int(k) if k is not None else None)
    a = as_vector(a, "a")
    c = as_vector(c, "c")
    if a.size != n or c.size != n:
        raise ValueError("a and c must have length n")
    return ProblemInstance(a, c, zfam)


def problem_instance_to_dict(inst: ProblemInstance) -> dict:
    fam: dict = {"kind": inst.zfam.kind}
    if inst.zfam.k is not None:
        fam["k"] = inst.zfam.k
    return {"n": inst.n, "a": inst.a.tolist(), "c": inst.c.tolist(), "zfam": fam}


def load_problem_instance(path) -> ProblemInstance:
    return parse_problem_instance(loads_strict(Path(path).read_text()))
