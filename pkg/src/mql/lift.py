"""Coefficient tables on canonical indices: the lift, its inverse, and the two
recurrences cutting out the Maass space.

Tables store NORMALIZED coefficients.  Writing A for the raw coefficient of a
lattice point of norm K, the stored value is a = A / sqrt(K), so that the lift
of a source form with sign epsilon reads

    a(K, u, n) = sum_{t=0..u} sum_{d | n} (-epsilon)**t  C(K / (2**(t+1) d**2)),

a purely rational combination of the source symbols.  In this normalization
the dyadic recurrence becomes

    a(K, u, n) = (-3 eps / 2) a(K/2, u-1, n) - (1/2) a(K/4, u-2, n)

and the odd recurrence loses its divisor weights:

    a(K, u, n) = sum_{d | n} a(K/d**2, u, 1).

Presentation layers (the Hecke engine in particular) multiply by sqrt(K) to
recover raw coefficients.  Entries at invalid indices, or with u < 0, read as
zero; lookups beyond the table bound raise instead of zero-filling, since a
silent truncation would corrupt eigenvalue extraction downstream.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .formal import (
    Assignment,
    FormalCoefficient,
    combine,
    evaluate,
    formal_from_json_obj,
    formal_to_json_obj,
    reduce_eigen2,
)
from .quaternion import CanonicalIndex, is_valid_index

__all__ = [
    "CoefficientTable",
    "MaassCheckReport",
    "SourceForm",
    "TableBoundsError",
    "build_lift_table",
    "check_maass",
    "dyadic_depth",
    "lift_coefficient",
    "maass_table_from_generators",
    "random_maass_table",
    "source_coefficient",
    "table_from_json_dict",
    "table_to_json_dict",
    "valid_indices",
]


class TableBoundsError(LookupError):
    """A lookup needed an index beyond the table bound."""


@dataclass(frozen=True)
class SourceForm:
    """A source form: its sign at the even place and, for the numeric backend,
    the coefficient values {M: c(-M)}.  ``values=None`` selects the formal
    backend, where coefficients stay symbols."""

    epsilon: int
    values: Optional[dict] = None

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError(f"epsilon must be +-1, got {self.epsilon}")

    @property
    def is_formal(self) -> bool:
        return self.values is None


@dataclass
class CoefficientTable:
    """Normalized coefficients keyed by canonical index.

    ``backend`` is "formal" (FormalCoefficient values) or "numeric" (floats or
    exact rationals).
    """

    epsilon: int
    k_max: int
    entries: dict
    backend: str

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError(f"epsilon must be +-1, got {self.epsilon}")
        if self.backend not in ("formal", "numeric"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def _zero(self):
        return FormalCoefficient.zero() if self.backend == "formal" else Fraction(0)

    def indices(self):
        return sorted(self.entries)

    def value_at(self, K: int, u: int, n: int):
        """Entry at (K, u, n); zero at invalid indices or negative u, error
        beyond the bound."""
        if u < 0 or not is_valid_index(K, u, n):
            return self._zero()
        if K > self.k_max:
            raise TableBoundsError(
                f"index ({K},{u},{n}) exceeds table bound K_max={self.k_max}"
            )
        return self.entries.get(CanonicalIndex(K, u, n), self._zero())


def valid_indices(k_max: int) -> list:
    """All valid indices with K <= k_max, sorted by (K, u, n)."""
    out = []
    for K in range(2, k_max + 1, 2):
        u = 0
        rem = K
        while True:
            n = 1
            while n * n <= rem:
                if rem % (n * n) == 0 and (rem // (n * n)) % 4 == 2:
                    out.append(CanonicalIndex(K, u, n))
                n += 2
            if rem % 2:
                break
            rem //= 2
            u += 1
    out.sort()
    return out


def lift_coefficient(index, epsilon: int) -> FormalCoefficient:
    """The normalized lifted coefficient at a valid index, as a symbol sum."""
    K, u, n = index
    if not is_valid_index(K, u, n):
        raise ValueError(f"invalid index {(K, u, n)}")
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +-1, got {epsilon}")
    terms = []
    for t in range(u + 1):
        sign = Fraction((-epsilon) ** t)
        for d in range(1, n + 1, 2):
            if n % d:
                continue
            den = (1 << (t + 1)) * d * d
            if K % den:
                raise ArithmeticError(f"non-integral symbol index at {(K, u, n)}")
            terms.append((K // den, sign))
    return FormalCoefficient(terms)


def build_lift_table(source: SourceForm, k_max: int) -> CoefficientTable:
    """Lift a source form to a table over all valid indices with K <= k_max."""
    entries = {}
    assignment = None if source.is_formal else Assignment(source.values, source.epsilon)
    for idx in valid_indices(k_max):
        expr = lift_coefficient(idx, source.epsilon)
        entries[idx] = expr if assignment is None else evaluate(expr, assignment)
    backend = "formal" if assignment is None else "numeric"
    return CoefficientTable(source.epsilon, k_max, entries, backend)


def dyadic_depth(N: int) -> int:
    """Write N = 4**a * b with 4 not dividing b; return 2a for b = 1, 3 mod 4
    and 2a + 1 for b = 2 mod 4."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    a = 0
    while N % 4 == 0:
        N //= 4
        a += 1
    return 2 * a + (1 if N % 4 == 2 else 0)


def _vscale(s, v):
    if isinstance(v, FormalCoefficient):
        return v.scale(s)
    return Fraction(s) * v if isinstance(v, (int, Fraction)) else float(s) * v


def source_coefficient(table: CoefficientTable, N: int):
    """Recover the N-th source coefficient from a Maass-space table.

    Returns a(2N, u, 1) + epsilon * a(N, u-1, 1) with u the dyadic depth of N;
    on a formal lifted table this is exactly the symbol C(N).
    """
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if 2 * N > table.k_max:
        raise TableBoundsError(f"need K = {2 * N} but table bound is {table.k_max}")
    u = dyadic_depth(N)
    v1 = table.value_at(2 * N, u, 1)
    v2 = table.value_at(N, u - 1, 1)
    if table.backend == "formal":
        return combine(v1, v2, 1, table.epsilon)
    return v1 + _vscale(table.epsilon, v2)


def _odd_divisors(n: int):
    return [d for d in range(1, n + 1, 2) if n % d == 0]


def _rel_err(lhs, rhs) -> float:
    diff = abs(float(lhs - rhs))
    scale = max(1.0, abs(float(lhs)), abs(float(rhs)))
    return diff / scale


@dataclass
class MaassCheckReport:
    """Outcome of the recurrence checks on a table."""

    passed: bool
    epsilon: int
    indices_checked: int
    max_rel_err: float
    dyadic_failures: list
    divisor_sum_failures: list

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "epsilon": self.epsilon,
            "indices_checked": self.indices_checked,
            "max_rel_err": self.max_rel_err,
            "dyadic_failures": [list(i) for i in self.dyadic_failures],
            "divisor_sum_failures": [list(i) for i in self.divisor_sum_failures],
        }


def check_maass(table: CoefficientTable, tolerance: float = 1e-8) -> MaassCheckReport:
    """Check both Maass-space recurrences at every index of the table.

    Formal backend: the odd divisor-sum recurrence must hold exactly as
    written, the dyadic recurrence exactly after the eigenform-at-2 reduction.
    Numeric backend: both are checked to the relative tolerance.  All indices
    a check refers to are below the checked index, so nothing can leave the
    table bound here.
    """
    eps = table.epsilon
    formal = table.backend == "formal"
    dyadic_failures = []
    divisor_failures = []
    max_err = 0.0
    checked = 0
    for idx in table.indices():
        K, u, n = idx
        lhs = table.entries[idx]
        if n > 1:
            rhs = table._zero()
            for d in _odd_divisors(n):
                rhs = rhs + table.value_at(K // (d * d), u, 1)
            checked += 1
            if formal:
                if lhs != rhs:
                    divisor_failures.append(idx)
            else:
                err = _rel_err(lhs, rhs)
                max_err = max(max_err, err)
                if err > tolerance:
                    divisor_failures.append(idx)
        if u >= 1:
            rhs = _vscale(Fraction(-3 * eps, 2), table.value_at(K // 2, u - 1, n))
            if u >= 2:
                rhs = rhs + _vscale(Fraction(-1, 2), table.value_at(K // 4, u - 2, n))
            checked += 1
            if formal:
                if reduce_eigen2(lhs, eps) != reduce_eigen2(rhs, eps):
                    dyadic_failures.append(idx)
            else:
                err = _rel_err(lhs, rhs)
                max_err = max(max_err, err)
                if err > tolerance:
                    dyadic_failures.append(idx)
    passed = not dyadic_failures and not divisor_failures
    return MaassCheckReport(
        passed, eps, checked, max_err, dyadic_failures, divisor_failures
    )


def maass_table_from_generators(epsilon: int, generators: dict, k_max: int) -> CoefficientTable:
    """Extend free values a(m, 0, 1), m = 2 mod 4, to a full Maass-space table.

    Both recurrences reduce every valid index to these generators: depth u
    comes down by the dyadic recurrence, odd content by the divisor sum.
    Missing generators count as zero.  The result passes check_maass by
    construction.
    """
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +-1, got {epsilon}")
    entries = {}

    def at(K, u, n):
        if u < 0 or not is_valid_index(K, u, n):
            return Fraction(0)
        return entries[CanonicalIndex(K, u, n)]

    for idx in valid_indices(k_max):
        K, u, n = idx
        if n > 1:
            val = sum((at(K // (d * d), u, 1) for d in _odd_divisors(n)), Fraction(0))
        elif u >= 1:
            val = Fraction(-3 * epsilon, 2) * at(K // 2, u - 1, 1) - Fraction(1, 2) * at(
                K // 4, u - 2, 1
            )
        else:
            val = Fraction(generators.get(K, 0))
        entries[idx] = val
    return CoefficientTable(epsilon, k_max, entries, "numeric")


def random_maass_table(epsilon: int, seed: int, k_max: int) -> CoefficientTable:
    """A Maass-space table with independent random rational generators.

    Deterministic for a fixed seed; the generator at each m = 2 mod 4 is drawn
    in ascending m.
    """
    rng = random.Random(seed)
    gens = {
        m: Fraction(rng.randint(-999, 999), rng.randint(1, 24))
        for m in range(2, k_max + 1, 4)
    }
    return maass_table_from_generators(epsilon, gens, k_max)


def table_to_json_dict(table: CoefficientTable) -> dict:
    """JSON form: metadata plus the entry array sorted by (K, u, n)."""
    rows = []
    for idx in table.indices():
        v = table.entries[idx]
        if table.backend == "formal":
            value = formal_to_json_obj(v)
        else:
            value = float(v)
        rows.append({"K": idx.K, "u": idx.u, "n": idx.n, "value": value})
    return {
        "epsilon": table.epsilon,
        "k_max": table.k_max,
        "backend": table.backend,
        "entries": rows,
    }


def table_from_json_dict(obj: dict) -> CoefficientTable:
    backend = obj["backend"]
    entries = {}
    for row in obj["entries"]:
        idx = CanonicalIndex(int(row["K"]), int(row["u"]), int(row["n"]))
        if not is_valid_index(*idx):
            raise ValueError(f"invalid index {tuple(idx)} in table file")
        value = row["value"]
        entries[idx] = (
            formal_from_json_obj(value) if backend == "formal" else float(value)
        )
    return CoefficientTable(int(obj["epsilon"]), int(obj["k_max"]), entries, backend)
