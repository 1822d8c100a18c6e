"""Exact rational linear combinations of source-form coefficient symbols.

The symbol C(M), M >= 1, stands for the source form's Fourier coefficient at
-M.  A :class:`FormalCoefficient` is a finite sum  sum_M q_M * C(M)  with
rational q_M, kept in canonical form (zero terms dropped), which makes
equality decidable and all identities in the lift layer exact.

Evaluation substitutes floats for the symbols; the reduction
``C(2M) -> (-epsilon/2) C(M)`` expresses that the source form is a Hecke
eigenform at the even place and rewrites any combination into odd symbols
only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "Assignment",
    "FormalCoefficient",
    "UnassignedSymbolError",
    "combine",
    "evaluate",
    "formal_from_json_obj",
    "formal_to_json_obj",
    "reduce_eigen2",
]


class UnassignedSymbolError(KeyError):
    """An evaluation met a symbol with no assigned value."""


class FormalCoefficient:
    """A sparse rational combination of symbols C(M)."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for m, q in items:
            m = int(m)
            if m < 1:
                raise ValueError(f"symbol index must be >= 1, got {m}")
            acc[m] = acc.get(m, Fraction(0)) + Fraction(q)
        self._terms = {m: q for m, q in acc.items() if q}

    @classmethod
    def zero(cls) -> "FormalCoefficient":
        return cls()

    @classmethod
    def symbol(cls, m: int) -> "FormalCoefficient":
        return cls(((m, Fraction(1)),))

    def items(self):
        """Terms as (M, coefficient) pairs in ascending M."""
        return tuple(sorted(self._terms.items()))

    def coefficient(self, m: int) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def max_symbol(self) -> int:
        return max(self._terms) if self._terms else 0

    def __add__(self, other):
        acc = dict(self._terms)
        for m, q in other._terms.items():
            acc[m] = acc.get(m, Fraction(0)) + q
        return FormalCoefficient(acc)

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, s) -> "FormalCoefficient":
        s = Fraction(s)
        if not s:
            return FormalCoefficient()
        return FormalCoefficient({m: q * s for m, q in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, FormalCoefficient) and self._terms == other._terms

    def __hash__(self):
        return hash(self.items())

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, q in self.items():
            if q == 1:
                body = f"C({m})"
            elif q == -1:
                body = f"-C({m})"
            else:
                body = f"{q}*C({m})"
            parts.append(body if not parts or body.startswith("-") else "+" + body)
        return "".join(parts)


@dataclass(frozen=True)
class Assignment:
    """Float values for symbols, together with the even-place sign."""

    values: dict
    epsilon: int = 1

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError(f"epsilon must be +-1, got {self.epsilon}")


def combine(a: FormalCoefficient, b: FormalCoefficient, s, t) -> FormalCoefficient:
    """The exact combination s*a + t*b."""
    return a.scale(Fraction(s)) + b.scale(Fraction(t))


def evaluate(x: FormalCoefficient, assignment: Assignment) -> float:
    """Substitute the assignment into x; rationals convert at the final step."""
    total = 0.0
    for m, q in x.items():
        try:
            v = assignment.values[m]
        except KeyError:
            raise UnassignedSymbolError(f"unassigned symbol {m}") from None
        total += float(q) * v
    return total


def reduce_eigen2(x: FormalCoefficient, epsilon: int) -> FormalCoefficient:
    """Rewrite C(2M) -> (-epsilon/2) C(M) until only odd symbols remain."""
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +-1, got {epsilon}")
    acc = {}
    for m, q in x.items():
        while m % 2 == 0:
            m //= 2
            q *= Fraction(-epsilon, 2)
        acc[m] = acc.get(m, Fraction(0)) + q
    return FormalCoefficient(acc)


def formal_to_json_obj(x: FormalCoefficient) -> dict:
    """Sorted JSON object {"M": "p/q", ...}."""
    return {str(m): str(q) for m, q in x.items()}


def formal_from_json_obj(obj: dict) -> FormalCoefficient:
    return FormalCoefficient({int(m): Fraction(q) for m, q in obj.items()})
