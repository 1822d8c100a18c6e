"""Hecke double-coset operators on coefficient tables.

The operator action is computed literally by class enumeration: a canonical
representative beta of the requested index is produced, the finitely many
quaternion products the coset decomposition prescribes are formed, each
product is canonically decomposed, and the table is read at the resulting
indices.  Everything happens in raw (un-normalized) coefficient space
A = sqrt(K) * a, in floating point: the eigenvalue identities carry sqrt(p)
and sqrt(2) factors that have no place in the rational layer.

T2 is the coset of diag(1+i, 1) at the even place; H2, H3, H4 are the three
nontrivial generators at an odd prime p.  Writing A for the raw coefficient
at a dual-lattice point and letting alpha run over the p+1 norm-p unit
classes, the actions are

    T2:  2 ( A(beta w^-1) + A(beta w) ),                w = 1 + i
    H2:  p ( sum A(beta conj(alpha)^-1) + sum A(conj(alpha) beta) )
    H4:  p ( sum A(alpha^-1 beta)       + sum A(beta alpha) )
    H3:  p^2 A(beta/p) + p^2 A(p beta) + p sum_{a1,a2} A(a1^-1 beta a2)

with A read as zero off the dual lattice.  The central generators act
trivially and are not materialized.

Lookups that would pass the table bound raise TableBoundsError rather than
zero-fill; a truncation here would silently corrupt every ratio computed
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .formal import FormalCoefficient
from .lift import CoefficientTable, TableBoundsError, check_maass, valid_indices
from .quaternion import (
    UNIFORMIZER,
    CanonicalIndex,
    HurwitzQuaternion,
    _is_odd_prime,
    decompose,
    exact_divide,
    is_valid_index,
    representative,
    unit_class_reps,
)

__all__ = [
    "AdjointReport",
    "EigenReport",
    "HeckeOperator",
    "InconsistentRatiosError",
    "NoUsableIndexError",
    "StabilityReport",
    "adjoint_matrix_identities",
    "apply",
    "extract_lambda",
    "h3_sum_identity_residual",
    "hecke_image_table",
    "stability_check",
    "verify_eigen_relations",
]

KINDS = ("T2", "H2", "H3", "H4")


class NoUsableIndexError(ValueError):
    """No base index with a usable nonzero coefficient was found."""


class InconsistentRatiosError(ValueError):
    """Ratio estimates disagreed beyond tolerance."""


@dataclass(frozen=True)
class HeckeOperator:
    """One generator of the local Hecke algebra: kind T2 at the even place,
    H2/H3/H4 at an odd prime."""

    kind: str
    prime: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "T2":
            if self.prime != 2:
                raise ValueError("T2 requires prime 2")
        elif not _is_odd_prime(self.prime):
            raise ValueError(f"{self.kind} requires an odd prime, got {self.prime}")

    @property
    def norm_growth(self) -> int:
        """Factor by which the operator can enlarge the norm of an index."""
        if self.kind == "T2":
            return 2
        return self.prime * self.prime if self.kind == "H3" else self.prime


def _as_float(v) -> float:
    if isinstance(v, FormalCoefficient):
        raise TypeError("Hecke application needs a numeric table")
    return float(v)


def _raw(table: CoefficientTable, idx: CanonicalIndex) -> float:
    """Un-normalized coefficient sqrt(K) * a at a valid in-bounds index."""
    return _as_float(table.value_at(*idx)) * math.sqrt(idx.K)


def _raw_at_point(table: CoefficientTable, q: Optional[HurwitzQuaternion]) -> float:
    """Un-normalized coefficient at a lattice point; zero off the dual lattice.

    An exact division can land in the order yet outside the dual lattice (odd
    norm); the coefficient function vanishes there.
    """
    if q is None or not q.in_dual_lattice():
        return 0.0
    idx, _ = decompose(q)
    return _raw(table, idx)


def apply(op: HeckeOperator, table: CoefficientTable, index, beta=None) -> float:
    """The raw coefficient of the operator image at the given index.

    A canonical representative of the index is used unless ``beta`` (any
    representative of the same index) is supplied; the output is a function of
    the index alone.
    """
    idx = CanonicalIndex(*index)
    if not is_valid_index(*idx):
        raise ValueError(f"invalid index {tuple(idx)}")
    if idx.K > table.k_max:
        raise TableBoundsError(
            f"index {tuple(idx)} exceeds table bound K_max={table.k_max}"
        )
    if beta is not None and decompose(beta)[0] != idx:
        raise ValueError(f"beta {beta!r} does not represent index {tuple(idx)}")
    return _apply_impl(op, table, idx, beta)


def _apply_impl(op, table, idx, beta):
    if beta is None:
        beta = representative(idx)
    if op.kind == "T2":
        return 2.0 * (
            _raw_at_point(table, exact_divide(beta, UNIFORMIZER, "right"))
            + _raw_at_point(table, beta * UNIFORMIZER)
        )
    p = op.prime
    reps = unit_class_reps(p)
    if op.kind == "H2":
        s1 = sum(_raw_at_point(table, (beta * al).divide_scalar(p)) for al in reps)
        s2 = sum(_raw_at_point(table, al.conjugate() * beta) for al in reps)
        return p * (s1 + s2)
    if op.kind == "H4":
        s1 = sum(
            _raw_at_point(table, (al.conjugate() * beta).divide_scalar(p)) for al in reps
        )
        s2 = sum(_raw_at_point(table, beta * al) for al in reps)
        return p * (s1 + s2)
    # H3
    total = p * p * _raw_at_point(table, beta.divide_scalar(p))
    total += p * p * _raw_at_point(table, beta.scale(p))
    middle = 0.0
    for a1 in reps:
        a1c = a1.conjugate()
        for a2 in reps:
            middle += _raw_at_point(table, ((a1c * beta) * a2).divide_scalar(p))
    return total + p * middle


def hecke_image_table(op: HeckeOperator, table: CoefficientTable) -> CoefficientTable:
    """The operator image as a normalized numeric table.

    The image bound is table.k_max divided by the norm growth of the operator,
    so that every lookup the action needs stays inside the source table.
    """
    img_k_max = table.k_max // op.norm_growth
    entries = {}
    for idx in valid_indices(img_k_max):
        entries[idx] = apply(op, table, idx) / math.sqrt(idx.K)
    return CoefficientTable(table.epsilon, img_k_max, entries, "numeric")


def _usable_bases(table, growth, floor_frac=1e-9):
    """Indices whose raw coefficient is usably far from zero and whose operator
    closure stays in bounds, in canonical order."""
    cands = [i for i in table.indices() if i.K * growth <= table.k_max]
    if not cands:
        return []
    raws = {i: _raw(table, i) for i in cands}
    scale = max(abs(v) for v in raws.values())
    cutoff = floor_frac * max(1.0, scale)
    return [(i, raws[i]) for i in cands if abs(raws[i]) > cutoff]


def extract_lambda(
    table: CoefficientTable, p: int, tolerance: float = 1e-9, min_bases: int = 3
) -> float:
    """The odd-prime eigenvalue read off the table along the p-power ladder.

    At a base index (K, 0, 1) with nonzero coefficient the estimate is
    (A(pK,0,1) + A(K/p,0,1)) / A(K,0,1), the second term dropping when p does
    not divide K.  Estimates from at least ``min_bases`` bases must agree
    within the tolerance.
    """
    usable = [
        (i, v)
        for i, v in _usable_bases(table, p)
        if i.u == 0 and i.n == 1
    ]
    if len(usable) < min_bases:
        raise NoUsableIndexError(f"no usable index for prime {p}")
    ests = []
    for idx, denom in usable[: max(min_bases, 8)]:
        K = idx.K
        num = _raw(table, CanonicalIndex(p * K, 0, 1))
        if K % p == 0:
            num += _raw(table, CanonicalIndex(K // p, 0, 1))
        ests.append(num / denom)
    spread = max(ests) - min(ests)
    if spread > tolerance * max(1.0, max(abs(e) for e in ests)):
        raise InconsistentRatiosError(
            f"inconsistent eigenvalue estimates at prime {p}: spread {spread:.3e}"
        )
    return ests[0]


@dataclass
class EigenReport:
    """Eigenvalue diagnostics for one prime."""

    prime: int
    mu: dict
    lambda_p: Optional[float]
    relations: dict
    indices_checked: int
    max_rel_err: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime,
            "kind": ",".join(sorted(self.mu)),
            "mu": dict(sorted(self.mu.items())),
            "lambda_p": self.lambda_p,
            "relations": dict(sorted(self.relations.items())),
            "indices_checked": self.indices_checked,
            "max_rel_err": self.max_rel_err,
            "pass": self.passed,
        }


def _fit_ratio(values):
    """First ratio plus the worst relative spread across the rest."""
    mu = values[0]
    scale = max(1.0, max(abs(v) for v in values))
    err = max(abs(v - mu) for v in values) / scale
    return mu, err


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def verify_eigen_relations(
    table: CoefficientTable,
    primes,
    tolerance: float = 1e-8,
    min_indices: int = 10,
) -> list:
    """Fit operator eigenvalues as output/input ratios and check the relations
    mu2 = mu4 = p(p+1) lambda_p and mu3 = p^2 lambda_p^2 + p^3 + p at each odd
    prime, and the scalar -3 sqrt(2) epsilon at the even place.

    On a non-eigen table the ratios fail to be constant and the report flags
    it rather than raising.
    """
    reports = []
    for p in sorted(primes):
        if p == 2:
            usable = _usable_bases(table, 2)
            if len(usable) < min_indices:
                raise NoUsableIndexError("not enough usable indices at prime 2")
            sel = usable[: max(min_indices, 12)]
            op = HeckeOperator("T2", 2)
            ratios = [apply(op, table, i) / v for i, v in sel]
            mu, err = _fit_ratio(ratios)
            expected = -3.0 * math.sqrt(2.0) * table.epsilon
            relations = {
                "constant": err <= tolerance,
                "t2_scalar": _rel(mu, expected) <= tolerance,
            }
            reports.append(
                EigenReport(
                    2, {"T2": mu}, None, relations, len(sel), err, all(relations.values())
                )
            )
            continue
        usable = _usable_bases(table, p * p)
        if len(usable) < min_indices:
            raise NoUsableIndexError(
                f"only {len(usable)} usable indices at prime {p}, need {min_indices}"
            )
        sel = usable[: max(min_indices, 12)]
        mu = {}
        max_err = 0.0
        for kind in ("H2", "H3", "H4"):
            op = HeckeOperator(kind, p)
            ratios = [apply(op, table, i) / v for i, v in sel]
            mu[kind], err = _fit_ratio(ratios)
            max_err = max(max_err, err)
        relations = {"constant": max_err <= tolerance}
        lam = None
        try:
            lam = extract_lambda(table, p, tolerance=max(tolerance, 1e-9))
        except (NoUsableIndexError, InconsistentRatiosError):
            relations["lambda_extracted"] = False
        if lam is not None:
            relations["lambda_extracted"] = True
            relations["mu2_eq_mu4"] = _rel(mu["H2"], mu["H4"]) <= tolerance
            relations["mu2_scaling"] = _rel(mu["H2"], p * (p + 1) * lam) <= tolerance
            relations["mu3_formula"] = (
                _rel(mu["H3"], p * p * lam * lam + p ** 3 + p) <= tolerance
            )
        reports.append(
            EigenReport(
                p, mu, lam, relations, len(sel), max_err, all(relations.values())
            )
        )
    return reports


def h3_sum_identity_residual(
    table: CoefficientTable, p: int, m: int, l: int, k0: int = 2
) -> float:
    """Relative residual of the H3 shift identity at the index (p**m k0, 0, p**l):

        H3 F(p^m k0, 0, p^l) = sum_{i=0..l} p^i H3 F(p^(m-2i) k0, 0, 1)

    which expresses that the operator image still satisfies the odd divisor-sum
    recurrence along the p-power tower.  Requires m >= 2l and in-bounds data.
    """
    if m < 2 * l:
        raise ValueError("need m >= 2l for every referenced index to exist")
    op = HeckeOperator("H3", p)
    lhs = apply(op, table, (p ** m * k0, 0, p ** l))
    rhs = sum(
        (p ** i) * apply(op, table, (p ** (m - 2 * i) * k0, 0, 1)) for i in range(l + 1)
    )
    return _rel(lhs, rhs)


@dataclass
class StabilityReport:
    """Whether an operator image lands back in the Maass space."""

    prime: int
    kind: str
    image_k_max: int
    maass: object
    shift_checks: list = field(default_factory=list)
    passed: bool = False

    def to_json_dict(self) -> dict:
        worst_shift = max((r["rel_err"] for r in self.shift_checks), default=0.0)
        return {
            "prime": self.prime,
            "kind": self.kind,
            "indices_checked": self.maass.indices_checked,
            "max_rel_err": max(self.maass.max_rel_err, worst_shift),
            "pass": self.passed,
            "image_k_max": self.image_k_max,
            "maass": self.maass.to_json_dict(),
            "shift_checks": self.shift_checks,
        }


def stability_check(
    op: HeckeOperator, table: CoefficientTable, tolerance: float = 1e-8
) -> StabilityReport:
    """Recompute the operator image and verify it satisfies both recurrences;
    for H3 also run the shift identity at every in-bounds p-power shape.

    The input table is expected to pass check_maass already.
    """
    image = hecke_image_table(op, table)
    maass = check_maass(image, tolerance)
    shifts = []
    if op.kind == "H3":
        p = op.prime
        for l in (1, 2):
            m = 2 * l
            while (p ** (m + 2)) * 2 <= table.k_max:
                res = h3_sum_identity_residual(table, p, m, l)
                shifts.append({"m": m, "l": l, "rel_err": res})
                m += 1
    passed = maass.passed and all(r["rel_err"] <= tolerance for r in shifts)
    return StabilityReport(op.prime, op.kind, image.k_max, maass, shifts, passed)


def _mat_mul(A, B, zero):
    rows, inner, cols = len(A), len(B), len(B[0])
    out = [[zero for _ in range(cols)] for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            s = zero
            for k in range(inner):
                s = s + A[i][k] * B[k][j]
            out[i][j] = s
    return out


def _diag(values, zero):
    n = len(values)
    return [[values[i] if i == j else zero for j in range(n)] for i in range(n)]


@dataclass
class AdjointReport:
    checks: list
    passed: bool

    def to_json_dict(self) -> dict:
        return {"pass": self.passed, "checks": self.checks}


def adjoint_matrix_identities(odd_primes=(3, 5)) -> AdjointReport:
    """Exact adjoint identities of the double-coset generator matrices.

    At an odd prime, with w the 4x4 antidiagonal permutation and z = p*I, the
    conjugated inverses swap the outer generators and fix the middle one:
    w z h4^-1 w = h2,  w z h3^-1 w = h3,  w z h2^-1 w = h4, verified both as
    exact rational matrix equalities and in the inverse-free integral form
    w z = h_adj w h.  At the even place the 2x2 quaternionic analogue
    w z g^-1 w = g with z = diag(w2, w2), g = diag(w2, 1) is verified in the
    inverse-free form over doubled coordinates.
    """
    checks = []
    for p in odd_primes:
        zero = Fraction(0)
        one = Fraction(1)
        pf = Fraction(p)
        w = [[one if i + j == 3 else zero for j in range(4)] for i in range(4)]
        z = _diag([pf] * 4, zero)
        h = {
            2: _diag([pf, pf, pf, one], zero),
            3: _diag([pf, pf, one, one], zero),
            4: _diag([pf, one, one, one], zero),
        }
        hinv = {
            k: _diag([one / mat[i][i] for i in range(4)], zero) for k, mat in h.items()
        }
        for a, b in ((2, 4), (3, 3), (4, 2)):
            lhs = _mat_mul(_mat_mul(_mat_mul(w, z, zero), hinv[b], zero), w, zero)
            direct = lhs == h[a]
            integral = _mat_mul(w, z, zero) == _mat_mul(
                _mat_mul(h[a], w, zero), h[b], zero
            )
            checks.append(
                {
                    "prime": p,
                    "kind": f"adjoint h{b}->h{a}",
                    "pass": bool(direct and integral),
                }
            )
    qzero = HurwitzQuaternion(0, 0, 0, 0, _check=False)
    qone = HurwitzQuaternion(2, 0, 0, 0, _check=False)
    wq = [[qzero, qone], [qone, qzero]]
    zq = _diag([UNIFORMIZER, UNIFORMIZER], qzero)
    gq = _diag([UNIFORMIZER, qone], qzero)
    integral2 = _mat_mul(wq, zq, qzero) == _mat_mul(
        _mat_mul(gq, wq, qzero), gq, qzero
    )
    checks.append({"prime": 2, "kind": "adjoint T2->T2", "pass": bool(integral2)})
    return AdjointReport(checks, all(c["pass"] for c in checks))
