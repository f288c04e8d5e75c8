"""Residue counts, densities, singular series, factorization, solubility."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from circlelab.expsums import complete_sum, complete_sum_crt
from circlelab.forms import QuadraticForm, eval_cubic, eval_quadratic
from circlelab.localdens import (
    a_of_q,
    count_mod,
    count_mod_primitive,
    hensel_stable,
    local_density,
    q_factorization,
    qp_solubility_search,
    singular_series_truncated,
)
from circlelab.util import CapExceededError

from conftest import make_pair


def brute_count_mod(pair, q):
    n = pair.n
    cnt = 0
    for y in itertools.product(range(q), repeat=n):
        if eval_cubic(pair.cubic, y) % q == 0 and eval_quadratic(pair.quadric, y) % q == 0:
            cnt += 1
    return cnt


# ------------------------------------------------------------- counts mod q

def test_count_mod_q1(pair_line):
    assert count_mod(pair_line, 1) == 1


def test_count_mod_example(pair_n3):
    assert count_mod(pair_n3, 2) == 2
    assert count_mod(pair_n3, 2) == brute_count_mod(pair_n3, 2)


def test_count_mod_multiplicative_spot(pair_n3):
    assert count_mod(pair_n3, 6) == count_mod(pair_n3, 2) * count_mod(pair_n3, 3)


def test_count_mod_multiplicative_random():
    rng = random.Random(59)
    for _ in range(20):
        n = rng.randint(1, 3)
        pair = make_pair(
            n,
            {tuple(sorted(rng.randint(1, n) for _ in range(3))): rng.randint(-4, 4)},
            {tuple(sorted(rng.randint(1, n) for _ in range(2))): rng.randint(-4, 4)},
        )
        while True:
            r, s = rng.randint(2, 8), rng.randint(2, 8)
            if math.gcd(r, s) == 1:
                break
        assert count_mod(pair, r * s) == count_mod(pair, r) * count_mod(pair, s)


def test_count_mod_matches_brute(pair_n3):
    for q in (3, 4, 5):
        assert count_mod(pair_n3, q) == brute_count_mod(pair_n3, q)


def test_count_mod_cap(pair_n3):
    with pytest.raises(CapExceededError):
        count_mod(pair_n3, 10**4, cap=10**6)


# ------------------------------------------------------------ local density

def test_local_density_example(pair_n3):
    # N(2) = 2 and p^{k(n-2)} = 2 for n = 3, k = 1
    assert local_density(pair_n3, 2, 1) == Fraction(1)
    assert local_density(pair_n3, 2, 0) == Fraction(1)


def test_local_density_n1_normalization(pair_n1):
    # N(5) = 1 (only x = 0) and the n = 1 normalization is p^{k(n-2)} = 1/5
    assert local_density(pair_n1, 5, 1) == Fraction(5)


# -------------------------------------------------------------- stabilization

def test_hensel_designated_fixture(pair_hensel7):
    rep = hensel_stable(pair_hensel7, 7, 2)
    assert rep.stable and rep.level == 1
    assert rep.primitive_densities[0] == rep.primitive_densities[1] == Fraction(6, 7)
    # the full-count density keeps absorbing imprimitive vectors
    assert rep.densities[0] != rep.densities[1]


def test_hensel_degenerate_not_stable():
    # both forms divisible by p: counts balloon and never settle
    pair = make_pair(2, {(1, 1, 1): 7}, {(1, 1): 7, (2, 2): 7})
    rep = hensel_stable(pair, 7, 2)
    assert not rep.stable


def test_hensel_n1_report(pair_n1):
    # N(5^k) = 5^{floor(k/2)}: x must be divisible by 5^{ceil(k/2)}
    assert count_mod(pair_n1, 5) == 1
    assert count_mod(pair_n1, 25) == 5
    assert count_mod(pair_n1, 125) == 5
    rep = hensel_stable(pair_n1, 5, 3)
    assert not rep.stable


def test_hensel_partial_on_cap(pair_n3):
    rep = hensel_stable(pair_n3, 7, 9, cap=10**5)
    assert rep.partial and rep.reached < 9


# ---------------------------------------------------------- singular series

def test_series_r1(pair_line):
    assert singular_series_truncated(pair_line, 1).value == 1.0


def test_series_r2_hand_case(pair_n1):
    # q = 2 admissible pairs (1,1), (1,2), (2,1); S = 2, 0, 0 so the q = 2
    # term is 2^{-1} * 2 = 1 and S(2) = 2 (hand enumeration oracle)
    res = singular_series_truncated(pair_n1, 2)
    assert res.value == pytest.approx(2.0, abs=1e-12)
    assert res.terms[1] == (2, pytest.approx(1.0, abs=1e-12))


def test_series_p_part_matches_density(pair_n3):
    # sum_{e <= k} p^{-en} sum*_a S(a, p^e) telescopes to delta_p(k) exactly;
    # this ties the complete-sum route to the residue-count route
    for p, k in ((2, 2), (3, 2), (5, 1)):
        acc = 1.0
        for e in range(1, k + 1):
            q = p**e
            term = 0j
            for a3 in range(1, q + 1):
                for a2 in range(1, q + 1):
                    if math.gcd(q, math.gcd(a3, a2)) != 1:
                        continue
                    term += complete_sum(pair_n3, q, a3, a2, [0, 0, 0])
            acc += term.real / q**3
        assert acc == pytest.approx(float(local_density(pair_n3, p, k)), abs=1e-8)


def test_series_crt_agreement(pair_line):
    # the q-terms computed through either complete-sum route agree
    for q in range(2, 7):
        direct = 0j
        crt = 0j
        for a3 in range(1, q + 1):
            for a2 in range(1, q + 1):
                if math.gcd(q, math.gcd(a3, a2)) != 1:
                    continue
                direct += complete_sum(pair_line, q, a3, a2, [0, 0])
                crt += complete_sum_crt(pair_line, q, a3, a2, [0, 0])
        assert abs(direct - crt) <= 1e-8 * q**2


def test_series_euler_consistency_report(pair_hensel7, capsys):
    # side-by-side comparison of S(R) and the product of local densities;
    # report-only, the two truncations differ by composite cross terms
    series = singular_series_truncated(pair_hensel7, 7)
    prod = 1.0
    for p, k in ((2, 2), (3, 1), (5, 1), (7, 1)):
        prod *= float(local_density(pair_hensel7, p, k))
    print(f"S(7) = {series.value:.6f} vs product of local densities = {prod:.6f}")
    assert series.value > 0 and prod > 0


def test_series_budget(pair_n3):
    with pytest.raises(CapExceededError):
        singular_series_truncated(pair_n3, 500, cap=10**6)


# ------------------------------------------------------------------- A(q)

def test_a_of_q_basics(pair_n3):
    assert a_of_q(pair_n3, 1) == 1.0
    for p in (3, 5):
        bound = (p * p - 1) * p**3
        assert a_of_q(pair_n3, p) <= bound
    # brute-force oracle at q = 3
    brute = 0.0
    for a3 in range(1, 4):
        for a2 in range(1, 4):
            if math.gcd(3, math.gcd(a3, a2)) == 1:
                brute += abs(complete_sum(pair_n3, 3, a3, a2, [0, 0, 0]))
    assert a_of_q(pair_n3, 3) == pytest.approx(brute, rel=1e-12)


# ----------------------------------------------------------- q factorization

def test_q_factorization_examples():
    ones = QuadraticForm(3, {(1, 1): 1, (2, 2): 1, (3, 3): 1})
    assert q_factorization(8, 8, ones) == (8, 1, 1)
    assert q_factorization(12, 1, ones) == (1, 12, 1)
    assert q_factorization(27, 1, ones) == (1, 1, 27)


def test_q_factorization_requires_diagonal():
    skew = QuadraticForm(2, {(1, 2): 1})
    with pytest.raises(ValueError, match="diagonal"):
        q_factorization(4, 1, skew)
    degenerate = QuadraticForm(2, {(2, 2): 1})  # d_1 = 0
    with pytest.raises(ValueError, match="nonzero"):
        q_factorization(4, 1, degenerate)


def _is_cubefree(x):
    return all(e < 3 for _, e in _factor(x))


def _is_cubefull(x):
    return all(e >= 3 for _, e in _factor(x))


def _factor(x):
    from circlelab.util import factorize

    return factorize(x) if x > 1 else []


def test_q_factorization_random_structure():
    rng = random.Random(61)
    quad = QuadraticForm(3, {(1, 1): 2, (2, 2): 6, (3, 3): 1})
    for _ in range(100):
        q = rng.randint(1, 4000)
        a3 = rng.randint(0, 4000)
        q0, q1, q2 = q_factorization(q, a3, quad)
        assert q0 * q1 * q2 == q
        assert _is_cubefree(q1)
        assert _is_cubefull(q2)
        for p, e in _factor(q0):
            v = 0
            for d in (4, 12):  # 2 d_i for d_i in (2, 6)
                t, vp = d, 0
                while t % p == 0:
                    t //= p
                    vp += 1
                v = max(v, vp)
            assert a3 % p ** (1 + v) == 0


# ------------------------------------------------------------- Qp solubility

def test_solubility_smooth_certificate(pair_smooth5):
    rep = qp_solubility_search(pair_smooth5, 5, 3)
    assert rep.verdict == "smooth_liftable"
    assert rep.level == 3
    x = rep.point
    assert eval_cubic(pair_smooth5.cubic, x) % 5**3 == 0
    assert eval_quadratic(pair_smooth5.quadric, x) % 5**3 == 0
    assert any(v % 5 for v in x)


def test_solubility_only_singular(pair_n1):
    rep = qp_solubility_search(pair_n1, 7, 2)
    assert rep.verdict == "only_singular"
    assert rep.solutions_mod_p == 1  # just the zero residue


def test_solubility_none_found_on_partial_scan(pair_n3):
    # a cap too small for even the first chunk leaves the scan inconclusive
    rep = qp_solubility_search(pair_n3, 5, 1, cap=10)
    assert rep.verdict == "none_found"
    assert rep.partial


def test_primitive_counts(pair_hensel7):
    n_all, n_prim = count_mod(pair_hensel7, 7), count_mod_primitive(pair_hensel7, 7, 1)
    assert n_all == n_prim + 1  # zero vector is the only imprimitive solution
