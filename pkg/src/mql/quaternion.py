"""Exact arithmetic in the Hurwitz quaternion order and its dual lattice.

Quaternions are stored in doubled coordinates: ``HurwitzQuaternion(a, b, c, d)``
represents (a + b*i + c*j + d*k)/2 with i**2 = j**2 = k**2 = -1 and ij = -ji = k.
The Hurwitz order is exactly the set of points whose doubled coordinates share
one parity, so membership tests, products and exact divisions all stay in plain
integer arithmetic.

The dual lattice of the order under the pairing Re = tr/2 is the two-sided
ideal generated by 1 + i; concretely it is the set of integral quaternions of
even reduced norm.  Every nonzero dual-lattice element splits uniquely as

    (1 + i)**u * n * beta0

with n an odd positive integer and beta0 primitive (norm 2 mod 4, coordinate
gcd 1).  The triple (K, u, n) with K the reduced norm is the canonical index
that coefficient tables elsewhere in the package are keyed by.

This module also supplies the combinatorial layer behind the Hecke operators:
enumeration of elements by reduced norm, the 24-element unit group, canonical
representatives of the norm-p unit classes, and divisibility counts of the
products of those representatives with a primitive element.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple, Optional

__all__ = [
    "CanonicalIndex",
    "DivisibilityCounts",
    "HurwitzQuaternion",
    "UNIFORMIZER",
    "decompose",
    "divisibility_counts",
    "elements_of_norm",
    "exact_divide",
    "is_valid_index",
    "parse_quaternion",
    "representative",
    "three_squares",
    "unit_class_reps",
    "units",
]


class HurwitzQuaternion:
    """A quaternion of the Hurwitz order in doubled coordinates."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int, _check: bool = True):
        if _check:
            p = a & 1
            if (b & 1) != p or (c & 1) != p or (d & 1) != p:
                raise ValueError(
                    f"doubled coordinates must share one parity: {(a, b, c, d)}"
                )
        self.a = a
        self.b = b
        self.c = c
        self.d = d

    @classmethod
    def from_integral(cls, x: int, y: int, z: int, w: int) -> "HurwitzQuaternion":
        """The element x + y*i + z*j + w*k with integer coordinates."""
        return cls(2 * x, 2 * y, 2 * z, 2 * w, _check=False)

    @property
    def dc(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other):
        return (
            isinstance(other, HurwitzQuaternion)
            and self.a == other.a
            and self.b == other.b
            and self.c == other.c
            and self.d == other.d
        )

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        return self.dc < other.dc

    def __repr__(self):
        return f"HurwitzQuaternion({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self):
        parts = []
        for v, unit in zip(self.dc, ("", "i", "j", "k")):
            if v == 0:
                continue
            q = Fraction(v, 2)
            mag = abs(q)
            if unit and mag == 1:
                body = unit
            elif unit:
                body = f"{mag}{unit}"
            else:
                body = str(mag)
            parts.append(("-" if q < 0 else "+") + body)
        if not parts:
            return "0"
        head = parts[0].lstrip("+")
        return head + "".join(parts[1:])

    def __add__(self, other):
        return HurwitzQuaternion(
            self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d,
            _check=False,
        )

    def __sub__(self, other):
        return HurwitzQuaternion(
            self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d,
            _check=False,
        )

    def __neg__(self):
        return HurwitzQuaternion(-self.a, -self.b, -self.c, -self.d, _check=False)

    def __mul__(self, other):
        # Doubled coordinates of the product are half of the raw convolution;
        # the halves are exact whenever both factors have valid parity.
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        return HurwitzQuaternion(
            (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2) // 2,
            (a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2) // 2,
            (a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2) // 2,
            (a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2) // 2,
            _check=False,
        )

    def conjugate(self) -> "HurwitzQuaternion":
        return HurwitzQuaternion(self.a, -self.b, -self.c, -self.d, _check=False)

    def norm(self) -> int:
        """Reduced norm; a non-negative integer on the order."""
        return (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d) // 4

    def trace(self) -> int:
        """Reduced trace x + conj(x); equals the first doubled coordinate."""
        return self.a

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def scale(self, k: int) -> "HurwitzQuaternion":
        return HurwitzQuaternion(self.a * k, self.b * k, self.c * k, self.d * k, _check=False)

    def divide_scalar(self, s: int) -> Optional["HurwitzQuaternion"]:
        """self / s when the quotient stays in the order, else None."""
        if s == 0:
            raise ZeroDivisionError("scalar divisor must be nonzero")
        s = abs(s)
        if any(v % s for v in self.dc):
            return None
        q = (self.a // s, self.b // s, self.c // s, self.d // s)
        p = q[0] & 1
        if (q[1] & 1) != p or (q[2] & 1) != p or (q[3] & 1) != p:
            return None
        return HurwitzQuaternion(*q, _check=False)

    def integer_coords(self) -> Optional[tuple]:
        """(x, y, z, w) when all coordinates are integers, else None."""
        if (self.a | self.b | self.c | self.d) & 1:
            return None
        return (self.a // 2, self.b // 2, self.c // 2, self.d // 2)

    def in_dual_lattice(self) -> bool:
        """Integral coordinates with even coordinate sum (= even reduced norm)."""
        return self.integer_coords() is not None and self.norm() % 2 == 0

    def is_primitive(self) -> bool:
        """Nonzero dual-lattice element with norm 2 mod 4 and coordinate gcd 1."""
        ints = self.integer_coords()
        if ints is None or self.is_zero():
            return False
        return self.norm() % 4 == 2 and gcd(*ints) == 1


#: 1 + i, the even-place uniformizer; the dual lattice is its two-sided ideal.
UNIFORMIZER = HurwitzQuaternion(2, 2, 0, 0, _check=False)

_UNIFORMIZER_CONJ = HurwitzQuaternion(2, -2, 0, 0, _check=False)


class CanonicalIndex(NamedTuple):
    """The invariants (K, u, n) of a dual-lattice element."""

    K: int
    u: int
    n: int


class DivisibilityCounts(NamedTuple):
    """Counts of norm-p class representatives alpha with p | conj(alpha)*beta
    (``left``) respectively p | beta*alpha (``right``)."""

    left: int
    right: int


def is_valid_index(K: int, u: int, n: int) -> bool:
    """True when (K, u, n) indexes an actual dual-lattice element.

    The criterion is that the cofactor m = K / (2**u * n**2) is an integer
    congruent to 2 mod 4; equivalently a representative of the index exists.
    """
    if K < 1 or u < 0 or n < 1 or n % 2 == 0:
        return False
    den = (1 << u) * n * n
    if K % den:
        return False
    return (K // den) % 4 == 2


def index_cofactor(K: int, u: int, n: int) -> int:
    """The integer m = K / (2**u * n**2) of a valid index."""
    if not is_valid_index(K, u, n):
        raise ValueError(f"invalid index {(K, u, n)}")
    return K // ((1 << u) * n * n)


@lru_cache(maxsize=None)
def elements_of_norm(m: int) -> tuple:
    """All order elements of reduced norm m, sorted by doubled coordinates."""
    if m < 1:
        raise ValueError("norm must be positive")
    target = 4 * m
    out = []
    amax = isqrt(target)
    for a in range(-amax, amax + 1):
        ra = target - a * a
        bmax = isqrt(ra)
        for b in range(-bmax, bmax + 1):
            if (b - a) & 1:
                continue
            rb = ra - b * b
            cmax = isqrt(rb)
            for c in range(-cmax, cmax + 1):
                if (c - a) & 1:
                    continue
                rc = rb - c * c
                d = isqrt(rc)
                if d * d != rc or (d - a) & 1:
                    continue
                out.append(HurwitzQuaternion(a, b, c, d, _check=False))
                if d:
                    out.append(HurwitzQuaternion(a, b, c, -d, _check=False))
    out.sort()
    return tuple(out)


def units() -> tuple:
    """The 24 units of the order, as a fixed ordered tuple."""
    return elements_of_norm(1)


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=None)
def unit_class_reps(p: int) -> tuple:
    """Canonical representatives of the norm-p elements modulo right unit
    multiplication.

    There are exactly p + 1 classes of 24 elements each; the representative of
    a class is its smallest member in doubled-coordinate order, and the tuple
    is sorted, so the output is deterministic.
    """
    if not _is_odd_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    us = units()
    reps = []
    seen = set()
    for e in elements_of_norm(p):
        if e in seen:
            continue
        orbit = {e * u for u in us}
        if len(orbit) != 24:
            raise ArithmeticError(f"unit class of {e!r} has size {len(orbit)}")
        seen.update(orbit)
        reps.append(e)
    if len(reps) != p + 1:
        raise ArithmeticError(f"expected {p + 1} classes at {p}, found {len(reps)}")
    return tuple(reps)


def decompose(q: HurwitzQuaternion):
    """Split a nonzero dual-lattice element as uniformizer**u * n * beta0.

    Returns ``(CanonicalIndex(K, u, n), beta0)``: K is the reduced norm of q,
    n the largest odd integer dividing all coordinates, u the number of left
    divisions by (1 - i)/2 needed to bring the norm to 2 mod 4, and beta0 the
    primitive part.  The factorization is exact and unique.
    """
    ints = q.integer_coords()
    if ints is None or q.is_zero() or q.norm() % 2:
        raise ValueError(f"not a nonzero dual-lattice element: {q!r}")
    K = q.norm()
    n = gcd(*ints)
    while n % 2 == 0:
        n //= 2
    beta = q.divide_scalar(n)
    u = 0
    while beta.norm() % 4 == 0:
        beta = (_UNIFORMIZER_CONJ * beta).divide_scalar(2)
        if beta is None:
            raise ArithmeticError(f"uniformizer division left the order at {q!r}")
        u += 1
    if not beta.is_primitive():
        raise ArithmeticError(f"decomposition of {q!r} did not reach a primitive part")
    return CanonicalIndex(K, u, n), beta


@lru_cache(maxsize=None)
def three_squares(m: int) -> tuple:
    """Deterministic (x, y, z) with x >= y >= z >= 0, x^2+y^2+z^2 = m and not
    all of x, y, z odd; smallest (z, y, x) first."""
    if m < 0:
        raise ValueError("m must be non-negative")
    for z in range(isqrt(m // 3) + 1):
        rz = m - z * z
        for y in range(z, isqrt(rz // 2) + 1):
            r = rz - y * y
            x = isqrt(r)
            if x * x == r and x >= y and not (x & 1 and y & 1 and z & 1):
                return (x, y, z)
    raise ValueError(f"{m} has no admissible three-square representation")


def representative(index) -> HurwitzQuaternion:
    """A dual-lattice element whose canonical decomposition equals ``index``.

    The primitive part is assembled as x + y*i + z*j + k from the deterministic
    three-square representation of the cofactor minus one, then the uniformizer
    power and the odd content are multiplied back on.
    """
    K, u, n = index
    if not is_valid_index(K, u, n):
        raise ValueError(f"no representative exists for index {(K, u, n)}")
    m = K // ((1 << u) * n * n)
    x, y, z = three_squares(m - 1)
    beta = HurwitzQuaternion(2 * x, 2 * y, 2 * z, 2, _check=False)
    for _ in range(u):
        beta = UNIFORMIZER * beta
    return beta.scale(n)


def exact_divide(x: HurwitzQuaternion, by, side: str = "left"):
    """Divide x by ``by`` exactly or not at all.

    ``by`` may be an integer scalar or a quaternion.  For a quaternion divisor
    q the result is q**-1 * x (side "left") or x * q**-1 (side "right"),
    computed through the conjugate; None is returned whenever the quotient
    leaves the order.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if isinstance(by, HurwitzQuaternion):
        if by.is_zero():
            raise ZeroDivisionError("quaternion divisor must be nonzero")
        prod = by.conjugate() * x if side == "left" else x * by.conjugate()
        return prod.divide_scalar(by.norm())
    return x.divide_scalar(by)


def divisibility_counts(beta: HurwitzQuaternion, p: int) -> DivisibilityCounts:
    """Count norm-p unit classes whose product with a primitive beta is
    divisible by p.

    ``left`` counts classes alpha with p | conj(alpha) * beta and ``right``
    those with p | beta * alpha.  Both predicates are constant on right unit
    classes, so the counts do not depend on the chosen representatives; each
    equals 1 exactly when p divides the norm of beta, else 0.  The square p^2
    never divides such a product; that is enforced here and a violation raises,
    since it would be a genuine arithmetic bug.
    """
    if not _is_odd_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    if not beta.is_primitive():
        raise ValueError(f"beta must be primitive, got {beta!r}")
    reps = unit_class_reps(p)
    left = sum(1 for al in reps if (al.conjugate() * beta).divide_scalar(p) is not None)
    right = sum(1 for al in reps if (beta * al).divide_scalar(p) is not None)
    # p^2 | alpha*beta forces p^4 | nu(alpha*beta) = p*nu(beta), so the product
    # sweep is only reachable when p^3 divides nu(beta).
    if beta.norm() % (p ** 3) == 0:
        psq = p * p
        for al in elements_of_norm(p):
            if (al * beta).divide_scalar(psq) is not None or (
                beta * al
            ).divide_scalar(psq) is not None:
                raise ArithmeticError(
                    f"p^2 divides a norm-{p} product with {beta!r}"
                )
    return DivisibilityCounts(left, right)


_TERM_RE = re.compile(r"([+-]?)(\d+(?:/\d+)?)?(ij|i|j|k)?$")
_AXES = {"": 0, "i": 1, "j": 2, "ij": 3, "k": 3}


def parse_quaternion(text: str) -> HurwitzQuaternion:
    """Parse "a+bi+cj+dk" (also accepting "ij" for k and halves like "1/2i"),
    or a comma-separated 4-tuple of rational coordinates."""
    s = text.replace(" ", "").strip("()")
    if not s:
        raise ValueError("empty quaternion literal")
    coords = [Fraction(0)] * 4
    if "," in s:
        pieces = s.split(",")
        if len(pieces) != 4:
            raise ValueError(f"expected 4 components in {text!r}")
        for i, piece in enumerate(pieces):
            try:
                coords[i] = Fraction(piece)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"bad component {piece!r} in {text!r}") from None
    else:
        tokens = re.findall(r"[+-]?[^+-]+", s)
        if "".join(tokens) != s:
            raise ValueError(f"bad quaternion literal {text!r}")
        for tok in tokens:
            m = _TERM_RE.fullmatch(tok)
            if not m or (m.group(2) is None and not m.group(3)):
                raise ValueError(f"bad term {tok!r} in {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            mag = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            coords[_AXES[m.group(3) or ""]] += sign * mag
    doubled = []
    for q in coords:
        dq = 2 * q
        if dq.denominator != 1:
            raise ValueError(f"{text!r} is not in the order (coordinates must be halves)")
        doubled.append(int(dq))
    p = doubled[0] & 1
    if any((v & 1) != p for v in doubled[1:]):
        raise ValueError(f"{text!r} is not in the order (mixed parity)")
    return HurwitzQuaternion(*doubled, _check=False)
