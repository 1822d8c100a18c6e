"""Per-prime spectral data: Satake parameters, local component descriptors,
synthetic eigenform generation, and the temperedness bound check.

A Hecke eigenvalue lambda_p determines the four unramified character values

    chi_{1,2}(p) = p^(1/2)  (lambda_p +- sqrt(lambda_p^2 - 4)) / 2
    chi_{3,4}(p) = p^(-1/2) (lambda_p +- sqrt(lambda_p^2 - 4)) / 2

whose complex moduli are p^(+-1/2) whenever |lambda_p| <= 2.  Reading |.| as
the complex modulus and taking log base p, the largest exponent is then 1/2
exactly, which exceeds the cuspidal temperedness bound 1/2 - 1/17: every lift
violates the naive Ramanujan bound.  (The absolute-value notation for these
exponents is ambiguous in the source material; the complex-modulus reading is
the one consistent with the cancellation alpha+ + alpha- = 0 and is recorded
in every report this module emits.)

Synthetic eigenforms provide computable stand-ins for genuine Hecke
eigenforms: starting from c(-1) = 1 the coefficients are generated by

    c(-2N) = -(epsilon/2) c(-N)
    c(-pN) = p^(-1/2) lambda_p c(-N) - p^(-1) c(-N/p)      (p odd)

with c(-N/p) read as zero when p does not divide N.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .formal import FormalCoefficient, reduce_eigen2
from .lift import CoefficientTable, SourceForm, source_coefficient

__all__ = [
    "LocalDescriptor",
    "MODULUS_READING_NOTE",
    "MissingLambdaError",
    "RAMANUJAN_BOUND",
    "SatakeParams",
    "SyntheticEigenform",
    "ramanujan_violation_check",
    "satake_from_lambda",
    "satake_csv_rows",
    "sigma_descriptor",
    "synth_eigenform",
    "verify_cn_relations",
]

#: Cuspidal temperedness bound for the 4-dimensional group: 1/2 - 1/(4^2 + 1).
RAMANUJAN_BOUND = 0.5 - 1.0 / 17.0

MODULUS_READING_NOTE = (
    "character moduli are complex absolute values; exponents are logarithms base p"
)


class MissingLambdaError(KeyError):
    """A required odd-prime eigenvalue was not supplied."""


@dataclass(frozen=True)
class SatakeParams:
    """The four unramified character values attached to one odd prime."""

    prime: int
    lambda_p: float
    chi: tuple

    def invariant_residuals(self) -> dict:
        """Deviations of the defining multiplicative relations from zero."""
        c1, c2, c3, c4 = self.chi
        p = self.prime
        return {
            "chi1*chi2 - p": abs(c1 * c2 - p),
            "chi3*chi4 - 1/p": abs(c3 * c4 - 1.0 / p),
            "chi1/chi3 - p": abs(c1 / c3 - p),
            "chi2/chi4 - p": abs(c2 / c4 - p),
            "chi1*chi4 - 1": abs(c1 * c4 - 1.0),
            "chi2*chi3 - 1": abs(c2 * c3 - 1.0),
        }


def satake_from_lambda(p: int, lambda_p: float) -> SatakeParams:
    """Satake parameters of the lift at an odd prime with eigenvalue lambda_p.

    The square root is taken in the complex plane, so |lambda_p| < 2 lands on
    the unit circle times p^(+-1/2).
    """
    s = cmath.sqrt(complex(lambda_p * lambda_p - 4.0))
    r_plus = (lambda_p + s) / 2.0
    r_minus = (lambda_p - s) / 2.0
    sq = math.sqrt(p)
    return SatakeParams(
        p, float(lambda_p), (sq * r_plus, sq * r_minus, r_plus / sq, r_minus / sq)
    )


def ramanujan_violation_check(params: SatakeParams) -> dict:
    """Exponent report for one prime: log-base-p moduli of the four characters,
    whether their maximum exceeds the temperedness bound, and the cancellation
    alpha+ + alpha- of the unit-circle factors."""
    logp = math.log(params.prime)
    exponents = [math.log(abs(ch)) / logp for ch in params.chi]
    max_abs = max(abs(v) for v in exponents)
    alpha_plus = exponents[0] - 0.5
    alpha_minus = exponents[1] - 0.5
    return {
        "prime": params.prime,
        "lambda_p": params.lambda_p,
        "exponents": exponents,
        "max_abs_exponent": max_abs,
        "bound": RAMANUJAN_BOUND,
        "violated": max_abs > RAMANUJAN_BOUND,
        "alpha_sum": alpha_plus + alpha_minus,
        "note": MODULUS_READING_NOTE,
    }


@dataclass(frozen=True)
class LocalDescriptor:
    """Shape of the local component attached to one place: unramified
    principal series at odd primes, a twisted Steinberg at the even place,
    principal series at the archimedean place."""

    place: object  # odd prime, 2, or the string "inf"
    shape: str
    value: complex

    def to_json_dict(self) -> dict:
        return {
            "place": self.place,
            "shape": self.shape,
            "value": [self.value.real, self.value.imag],
        }


def sigma_descriptor(place, lambda_p=None, epsilon=None, r=None) -> LocalDescriptor:
    """Local component descriptor for one place.

    Odd prime: unramified principal series with character value
    (lambda_p + sqrt(lambda_p^2 - 4)) / 2.  Even place: twisted Steinberg with
    character value -epsilon.  Archimedean place ("inf"): principal series
    with parameter s = i r / 2.
    """
    if place == "inf":
        if r is None:
            raise ValueError("archimedean place needs r")
        return LocalDescriptor("inf", "archimedean-principal-series", complex(0, r / 2.0))
    if place == 2:
        if epsilon not in (1, -1):
            raise ValueError("even place needs epsilon = +-1")
        return LocalDescriptor(2, "twisted-steinberg", complex(-epsilon, 0))
    if not isinstance(place, int) or place < 3 or place % 2 == 0:
        raise ValueError(f"place must be an odd prime, 2 or 'inf', got {place!r}")
    if lambda_p is None:
        raise ValueError("odd place needs lambda_p")
    value = (lambda_p + cmath.sqrt(complex(lambda_p * lambda_p - 4.0))) / 2.0
    return LocalDescriptor(place, "unramified-principal-series", value)


@dataclass(frozen=True)
class SyntheticEigenform:
    """Coefficients generated from c(-1) = 1 by the eigenform recursions."""

    epsilon: int
    lambdas: dict
    n_max: int
    coefficients: dict

    def source_form(self) -> SourceForm:
        return SourceForm(self.epsilon, dict(self.coefficients))


def _smallest_odd_prime_factor(n: int) -> int:
    p = 3
    while p * p <= n:
        if n % p == 0:
            return p
        p += 2
    return n


def synth_eigenform(epsilon: int, lambdas: dict, n_max: int) -> SyntheticEigenform:
    """Generate c(-N) for N <= n_max from the multiplicative recursions.

    Deterministic; raises MissingLambdaError when a needed odd prime has no
    supplied eigenvalue.
    """
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +-1, got {epsilon}")
    c = {1: 1.0}
    for N in range(2, n_max + 1):
        if N % 2 == 0:
            c[N] = -0.5 * epsilon * c[N // 2]
            continue
        p = _smallest_odd_prime_factor(N)
        if p not in lambdas:
            raise MissingLambdaError(f"missing lambda for prime {p}")
        lam = lambdas[p]
        deeper = c[N // (p * p)] if N % (p * p) == 0 else 0.0
        c[N] = lam / math.sqrt(p) * c[N // p] - deeper / p
    return SyntheticEigenform(epsilon, dict(lambdas), n_max, c)


def _doubling_residual(table, c, N):
    """Residual of c(-2N) = -(epsilon/2) c(-N); exact on formal and rational
    backends."""
    lhs = c[2 * N]
    rhs = c[N]
    eps = table.epsilon
    if isinstance(lhs, FormalCoefficient):
        left = reduce_eigen2(lhs, eps)
        right = reduce_eigen2(rhs.scale(Fraction(-eps, 2)), eps)
        return 0.0 if left == right else float("inf")
    diff = lhs - Fraction(-eps, 2) * rhs if isinstance(lhs, Fraction) else lhs + 0.5 * eps * rhs
    return abs(float(diff)) / max(1.0, abs(float(lhs)), abs(float(rhs)))


def verify_cn_relations(
    table: CoefficientTable, lambdas: Optional[dict] = None, tolerance: float = 1e-8
) -> dict:
    """Check the recursions of the extracted source coefficients.

    The doubling relation c(-2N) = -(epsilon/2) c(-N) must hold on any table
    in the Maass space (exactly on formal and rational backends).  When odd
    eigenvalues are supplied the Hecke relation
    sqrt(p) c(-pN) + c(-N/p)/sqrt(p) = lambda_p c(-N) is checked as well.
    """
    n_max = table.k_max // 2
    c = {N: source_coefficient(table, N) for N in range(1, n_max + 1)}
    doubling_failures = []
    max_err = 0.0
    for N in range(1, n_max // 2 + 1):
        err = _doubling_residual(table, c, N)
        max_err = max(max_err, err)
        if err > tolerance:
            doubling_failures.append(N)
    report = {
        "doubling": {
            "checked": n_max // 2,
            "failures": doubling_failures,
            "max_rel_err": max_err if max_err != float("inf") else 1.0,
        },
        "note": MODULUS_READING_NOTE,
    }
    hecke = {}
    if lambdas and table.backend == "numeric":
        for p in sorted(lambdas):
            if p == 2:
                continue
            lam = lambdas[p]
            failures = []
            worst = 0.0
            checked = 0
            sq = math.sqrt(p)
            for N in range(1, n_max // p + 1):
                lhs = sq * float(c[p * N])
                if N % p == 0:
                    lhs += float(c[N // p]) / sq
                rhs = lam * float(c[N])
                err = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
                worst = max(worst, err)
                checked += 1
                if err > tolerance:
                    failures.append(N)
            hecke[str(p)] = {
                "checked": checked,
                "failures": failures,
                "max_rel_err": worst,
            }
    report["hecke"] = hecke
    report["pass"] = not doubling_failures and all(
        not v["failures"] for v in hecke.values()
    )
    return report


def satake_csv_rows(reports) -> list:
    """CSV rows (header first) for a sequence of violation reports."""
    header = [
        "p",
        "lambda",
        "re_chi1",
        "im_chi1",
        "re_chi2",
        "im_chi2",
        "re_chi3",
        "im_chi3",
        "re_chi4",
        "im_chi4",
        "violated",
    ]
    rows = [header]
    for rep, params in reports:
        row = [str(params.prime), repr(params.lambda_p)]
        for ch in params.chi:
            row.extend([repr(ch.real), repr(ch.imag)])
        row.append("true" if rep["violated"] else "false")
        rows.append(row)
    return rows
