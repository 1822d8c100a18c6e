"""Ring laws, evaluation and the even-symbol reduction of the formal layer."""

import random
from fractions import Fraction

import pytest

from mql.formal import (
    Assignment,
    FormalCoefficient,
    UnassignedSymbolError,
    combine,
    evaluate,
    formal_from_json_obj,
    formal_to_json_obj,
    reduce_eigen2,
)

C = FormalCoefficient.symbol


def random_formal(rng):
    return FormalCoefficient(
        {rng.randint(1, 30): Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(rng.randint(0, 4))}
    )


def test_combine_examples():
    assert combine(C(1), C(1), 1, 1) == C(1).scale(2)
    assert combine(C(2), C(2), 1, -1) == FormalCoefficient.zero()
    half = Fraction(1, 2)
    assert combine(C(9) + C(1), C(9) - C(1), half, half) == C(9)


def test_zero_terms_dropped():
    x = FormalCoefficient({1: Fraction(0), 2: Fraction(3)})
    assert x.items() == ((2, Fraction(3)),)
    assert (x - x).is_zero()


def test_module_laws_random():
    rng = random.Random(10)
    for _ in range(10_000):
        a, b, c = random_formal(rng), random_formal(rng), random_formal(rng)
        s = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        assert (a + b).scale(s) == a.scale(s) + b.scale(s)
        assert a.scale(s) + a.scale(1 - s) == a


def test_evaluate_examples():
    assert evaluate(C(1).scale(2), Assignment({1: 0.5})) == pytest.approx(1.0)
    assert evaluate(C(2) - C(1), Assignment({1: 1.0, 2: -0.5})) == pytest.approx(-1.5)
    assert evaluate(FormalCoefficient.zero(), Assignment({})) == 0.0


def test_evaluate_is_homomorphism():
    rng = random.Random(11)
    values = {m: rng.uniform(-3, 3) for m in range(1, 31)}
    asg = Assignment(values)
    for _ in range(500):
        a, b = random_formal(rng), random_formal(rng)
        s = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        t = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        lhs = evaluate(combine(a, b, s, t), asg)
        rhs = float(s) * evaluate(a, asg) + float(t) * evaluate(b, asg)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_evaluate_missing_symbol():
    with pytest.raises(UnassignedSymbolError, match="unassigned symbol 7"):
        evaluate(C(7), Assignment({1: 1.0}))


def test_reduce_examples():
    assert reduce_eigen2(C(2), 1) == C(1).scale(Fraction(-1, 2))
    assert reduce_eigen2(C(4), 1) == C(1).scale(Fraction(1, 4))
    assert reduce_eigen2(C(3), 1) == C(3)
    assert reduce_eigen2(C(3), -1) == C(3)
    assert reduce_eigen2(C(2), -1) == C(1).scale(Fraction(1, 2))


def test_reduce_idempotent_and_odd_only():
    rng = random.Random(12)
    for eps in (1, -1):
        for _ in range(500):
            x = random_formal(rng)
            r = reduce_eigen2(x, eps)
            assert reduce_eigen2(r, eps) == r
            assert all(m % 2 == 1 for m, _ in r.items())


def test_reduce_is_linear():
    rng = random.Random(13)
    for _ in range(200):
        a, b = random_formal(rng), random_formal(rng)
        assert reduce_eigen2(a + b, 1) == reduce_eigen2(a, 1) + reduce_eigen2(b, 1)


def test_json_roundtrip_and_sorted_keys():
    x = FormalCoefficient({9: Fraction(1), 1: Fraction(-1, 2), 4: Fraction(7, 3)})
    obj = formal_to_json_obj(x)
    assert list(obj) == ["1", "4", "9"]
    assert obj["1"] == "-1/2"
    assert formal_from_json_obj(obj) == x


def test_symbol_index_validation():
    with pytest.raises(ValueError):
        FormalCoefficient({0: Fraction(1)})
    with pytest.raises(ValueError):
        Assignment({}, epsilon=0)
