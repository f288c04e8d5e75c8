"""Dirichlet cutoffs, simultaneous approximation, major-arc dissection."""

import math
import random
from fractions import Fraction

import pytest

from circlelab.arcs import (
    floor_power,
    major_arc_centers,
    major_arc_measure,
    major_arc_test,
    major_arcs_disjoint,
    q3q2,
    simultaneous_approx,
    verify_approx,
)


def oracle_approx(alpha3, alpha2, Q3, Q2):
    """Independent exact scan: smallest q whose nearest fractions qualify."""
    a3f = Fraction(alpha3) - math.floor(alpha3)
    a2f = Fraction(alpha2) - math.floor(alpha2)
    if a3f == 0:
        a3f = Fraction(1)
    if a2f == 0:
        a2f = Fraction(1)
    for q in range(1, Q3 * Q2 + 1):
        ok = True
        for alpha, cutoff in ((a3f, Q3), (a2f, Q2)):
            d = alpha * q
            a = round(d)
            dist = abs(d - a)
            if dist > Fraction(1, cutoff):
                ok = False
                break
        if ok:
            return q
    raise AssertionError("oracle found no q: pigeonhole violated")


def test_q3q2_examples():
    assert q3q2(1) == (1, 1)
    assert q3q2(100) == (464, 4)
    assert q3q2(8) == (16, 2)  # 8^{4/3} and 8^{1/3} are exact


def test_floor_power_boundary_exactness():
    # perfect powers must not be lost to float rounding
    for base in (8, 27, 64, 125, 1000):
        assert floor_power(base, 1, 3) == round(base ** (1 / 3))
    assert floor_power(128, 1, 7) == 2
    assert floor_power(127.999, 1, 7) == 1


def test_simultaneous_approx_exact_rationals():
    ap = simultaneous_approx(1 / 3, 1 / 2, 6, 6)
    assert (ap.q, ap.a3, ap.a2) == (6, 2, 3)
    assert ap.theta3 == 0.0 and ap.theta2 == 0.0


def test_simultaneous_approx_zero():
    ap = simultaneous_approx(0.0, 0.0, 6, 6)
    assert (ap.q, ap.a3, ap.a2) == (1, 1, 1)
    assert ap.theta3 == 0.0 and ap.theta2 == 0.0
    assert verify_approx(0.0, 0.0, 6, 6, ap)


def test_simultaneous_approx_vs_oracle():
    rng = random.Random(43)
    Q3, Q2 = 464, 4
    for _ in range(25):
        a3, a2 = rng.random(), rng.random()
        ap = simultaneous_approx(a3, a2, Q3, Q2)
        assert verify_approx(a3, a2, Q3, Q2, ap)
        assert ap.q == oracle_approx(a3, a2, Q3, Q2)


def test_simultaneous_approx_hard_constraints():
    rng = random.Random(47)
    for P in (16.0, 37.5):
        Q3, Q2 = q3q2(P)
        for _ in range(200):
            a3, a2 = rng.random(), rng.random()
            ap = simultaneous_approx(a3, a2, Q3, Q2)
            assert ap.q <= Q3 * Q2
            assert math.gcd(ap.q, math.gcd(ap.a3, ap.a2)) == 1
            assert verify_approx(a3, a2, Q3, Q2, ap)


def test_major_arc_constructed_inside():
    # delta large enough that q = 2 arcs exist: P^delta = 100^0.3 ~ 3.98
    P, delta = 100.0, 0.3
    alpha3 = 0.5 + 0.5 * P ** (-3 + delta)
    ok, witness = major_arc_test(alpha3, 0.5, P, delta)
    assert ok and witness == (2, 1, 1)


def test_major_arc_q1_only_at_small_delta():
    # at delta = 1/7 and P = 100 only q = 1 arcs exist, so 1/2 is deep minor
    P, delta = 100.0, 1.0 / 7.0
    alpha3 = 0.5 + 0.5 * P ** (-3 + delta)
    ok, witness = major_arc_test(alpha3, 0.5, P, delta)
    assert not ok and witness is None
    # but a point hugging an integer is inside the q = 1 arc
    ok, witness = major_arc_test(
        1.0 - 0.5 * P ** (-3 + delta), 0.3 * P ** (-2 + delta), P, delta
    )
    assert ok and witness == (1, 1, 1)


def test_major_arc_outside_every_box():
    # distance 2 P^{-3+delta} from every a/q with q <= P^delta
    P, delta = 100.0, 1.0 / 7.0
    ok, _ = major_arc_test(2.0 * P ** (-3 + delta), 0.5, P, delta)
    assert not ok


def test_major_arc_tiny_p():
    ok, witness = major_arc_test(0.999999, 0.999999, 1.5, 0.2)
    assert ok and witness[0] == 1


def test_major_member_within_pigeonhole_ranges():
    # each major arc is contained in the corresponding Dirichlet range
    rng = random.Random(53)
    P, delta = 50.0, 1.0 / 7.0
    Q3, Q2 = q3q2(P)
    for _ in range(50):
        q, a3, a2 = 1, 1, 1
        alpha3 = a3 / q + rng.uniform(-1, 1) * P ** (-3 + delta)
        alpha2 = a2 / q + rng.uniform(-1, 1) * P ** (-2 + delta)
        ok, witness = major_arc_test(alpha3, alpha2, P, delta)
        assert ok
        wq, wa3, wa2 = witness
        assert abs(alpha3 - wa3 / wq) % 1.0 <= 1 / (wq * Q3) or (
            1 - abs(alpha3 - wa3 / wq) % 1.0
        ) <= 1 / (wq * Q3)


def test_major_arc_measure_values():
    # only q = 1 contributes at these parameters: 4 P^{-5+2 delta}
    assert major_arc_measure(100.0, 1.0 / 7.0) == pytest.approx(
        4 * 100.0 ** (-5 + 2.0 / 7.0)
    )
    assert major_arc_measure(100.0, 0.01) == pytest.approx(4 * 100.0 ** (-5 + 0.02))


def test_major_arc_measure_monotone_in_delta():
    values = [major_arc_measure(100.0, d) for d in (0.05, 0.15, 0.25, 0.32)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_major_arcs_disjoint():
    for P in (50.0, 100.0, 200.0):
        assert major_arcs_disjoint(P, 1.0 / 7.0)
    # sanity of the overlap detector itself: widths outside the legal delta
    # range make (2,1,1) and (2,1,2) collide in the alpha2 coordinate
    assert not major_arcs_disjoint(3.0, 0.9)


def test_major_arc_centers_coprime():
    for q, a3, a2 in major_arc_centers(200.0, 1.0 / 7.0):
        assert math.gcd(q, math.gcd(a3, a2)) == 1


def test_delta_validation():
    with pytest.raises(ValueError):
        major_arc_test(0.1, 0.1, 10.0, 0.5)
