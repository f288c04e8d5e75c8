"""Two-dimensional rational approximation and major/minor arc dissection.

For a cutoff pair Q3 = [P^{4/3}], Q2 = [P^{1/3}] the pigeonhole principle
guarantees, for any (alpha3, alpha2), a modulus q <= Q3 Q2 and numerators
with gcd(q, gcd(a3, a2)) = 1 such that |alpha_i - a_i/q| <= 1/(q Q_i).
The search here is an exhaustive upward scan over q, which returns the
smallest qualifying modulus; the defining inequalities are verified in
exact rational arithmetic (floats are rationals, so nothing is lost).

Major arcs are the boxes |alpha_i - a_i/q| <= P^{-i+delta} around rationals
with q <= P^delta; everything is taken mod 1 with a_i normalized to [1, q]
and theta measured as the wrapped (torus) difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .expsums import RationalApprox
from .util import jordan_totient2

__all__ = [
    "q3q2",
    "simultaneous_approx",
    "verify_approx",
    "major_arc_test",
    "major_arc_measure",
    "major_arc_centers",
    "major_arcs_disjoint",
    "DEFAULT_DELTA",
]

DEFAULT_DELTA = 1.0 / 7.0


def floor_power(P: float, num: int, den: int) -> int:
    """Exact floor(P^(num/den)) for real P >= 1 (P read as an exact rational)."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    frac_p = Fraction(P)
    k = int(P ** (num / den))
    # fix up float error at perfect-power boundaries: k <= P^(num/den) < k+1
    while Fraction(k + 1) ** den <= frac_p**num:
        k += 1
    while k >= 1 and Fraction(k) ** den > frac_p**num:
        k -= 1
    return max(k, 0)


def q3q2(P: float) -> tuple[int, int]:
    """Dirichlet cutoffs (floor(P^{4/3}), floor(P^{1/3}))."""
    return floor_power(P, 4, 3), floor_power(P, 1, 3)


def _delta_cutoff(P: float, delta: float) -> int:
    """floor(P^delta), exact when delta is (close to) a small rational."""
    frac = Fraction(delta).limit_denominator(64)
    if abs(float(frac) - delta) < 1e-12:
        return floor_power(P, frac.numerator, frac.denominator)
    return int(P**delta)


def _normalize_unit(alpha: float) -> float:
    """Representative of alpha mod 1 in (0, 1]."""
    a = alpha - math.floor(alpha)
    return 1.0 if a == 0.0 else a


def _nearest_numerator(q: int, alpha: float) -> int:
    """a in [1, q] with a/q nearest to alpha mod 1."""
    a = math.floor(q * alpha + 0.5)
    return (a - 1) % q + 1


def _torus_theta(alpha: float, a: int, q: int) -> float:
    """alpha - a/q wrapped into [-1/2, 1/2)."""
    d = alpha - a / q
    return (d + 0.5) % 1.0 - 0.5


def _exact_torus_bound(alpha: float, a: int, q: int, bound: Fraction) -> bool:
    """Exact check that the wrapped distance |alpha - a/q| is <= bound."""
    d = Fraction(alpha) - Fraction(a, q)
    d -= round(d)
    return abs(d) <= bound


def simultaneous_approx(alpha3: float, alpha2: float, Q3: int, Q2: int) -> RationalApprox:
    """Smallest q <= Q3 Q2 with |alpha_i - a_i/q| <= 1/(q Q_i) and coprime data.

    Existence is a pigeonhole guarantee; failure of the scan indicates a bug,
    not bad input.
    """
    if Q3 < 1 or Q2 < 1:
        raise ValueError("cutoffs must be positive integers")
    alpha3 = _normalize_unit(alpha3)
    alpha2 = _normalize_unit(alpha2)
    for q in range(1, Q3 * Q2 + 1):
        a3 = _nearest_numerator(q, alpha3)
        a2 = _nearest_numerator(q, alpha2)
        # cheap float screen with slack, then exact verification
        if abs(_torus_theta(alpha3, a3, q)) > 1.0 / (q * Q3) + 1e-12:
            continue
        if abs(_torus_theta(alpha2, a2, q)) > 1.0 / (q * Q2) + 1e-12:
            continue
        if not _exact_torus_bound(alpha3, a3, q, Fraction(1, q * Q3)):
            continue
        if not _exact_torus_bound(alpha2, a2, q, Fraction(1, q * Q2)):
            continue
        approx = RationalApprox(
            q, a3, a2, _torus_theta(alpha3, a3, q), _torus_theta(alpha2, a2, q)
        )
        assert math.gcd(q, math.gcd(a3, a2)) == 1, "reduced fraction expected at minimal q"
        return approx
    raise AssertionError(
        "pigeonhole guarantee violated; simultaneous approximation scan is buggy"
    )


def verify_approx(
    alpha3: float, alpha2: float, Q3: int, Q2: int, approx: RationalApprox
) -> bool:
    """Exact check of the three defining constraints of the approximation."""
    if approx.q > Q3 * Q2:
        return False
    if math.gcd(approx.q, math.gcd(approx.a3, approx.a2)) != 1:
        return False
    a3_ok = _exact_torus_bound(
        _normalize_unit(alpha3), approx.a3, approx.q, Fraction(1, approx.q * Q3)
    )
    a2_ok = _exact_torus_bound(
        _normalize_unit(alpha2), approx.a2, approx.q, Fraction(1, approx.q * Q2)
    )
    return a3_ok and a2_ok


def major_arc_test(
    alpha3: float, alpha2: float, P: float, delta: float = DEFAULT_DELTA
) -> tuple[bool, tuple[int, int, int] | None]:
    """Membership of (alpha3, alpha2) mod 1 in the union of major arcs.

    Scans all moduli q <= P^delta; for each q only the nearest numerators can
    qualify since the arc half-widths are below 1/(2q).  Returns the witness
    (q, a3, a2) of the first (smallest-q) containing arc.
    """
    if not (0 < delta < 1.0 / 3.0):
        raise ValueError(f"delta must lie in (0, 1/3), got {delta}")
    alpha3 = _normalize_unit(alpha3)
    alpha2 = _normalize_unit(alpha2)
    qmax = _delta_cutoff(P, delta)
    for q in range(1, qmax + 1):
        a3 = _nearest_numerator(q, alpha3)
        a2 = _nearest_numerator(q, alpha2)
        if math.gcd(q, math.gcd(a3, a2)) != 1:
            continue
        if abs(_torus_theta(alpha3, a3, q)) <= P ** (-3 + delta) and abs(
            _torus_theta(alpha2, a2, q)
        ) <= P ** (-2 + delta):
            return True, (q, a3, a2)
    return False, None


def major_arc_measure(P: float, delta: float = DEFAULT_DELTA) -> float:
    """Total area of the major arc boxes, ignoring overlap.

    Each coprime pair contributes a (2 P^{-3+delta}) x (2 P^{-2+delta}) box;
    the number of coprime numerator pairs mod q is the Jordan totient J_2(q).
    """
    qmax = _delta_cutoff(P, delta)
    pairs = sum(jordan_totient2(q) for q in range(1, qmax + 1))
    return pairs * 4.0 * P ** (-5 + 2 * delta)


def major_arc_centers(P: float, delta: float = DEFAULT_DELTA) -> list[tuple[int, int, int]]:
    """All (q, a3, a2) with q <= P^delta and gcd(q, gcd(a3, a2)) = 1."""
    qmax = _delta_cutoff(P, delta)
    out = []
    for q in range(1, qmax + 1):
        for a3 in range(1, q + 1):
            for a2 in range(1, q + 1):
                if math.gcd(q, math.gcd(a3, a2)) == 1:
                    out.append((q, a3, a2))
    return out


def major_arcs_disjoint(P: float, delta: float = DEFAULT_DELTA) -> bool:
    """Exact pairwise-disjointness check of the major arc boxes mod 1."""
    centers = major_arc_centers(P, delta)
    # Box half-widths are P^{-i+delta}; center distances are exact rationals.
    h3 = Fraction(2 * P ** (-3 + delta))
    h2 = Fraction(2 * P ** (-2 + delta))
    for idx, (q, a3, a2) in enumerate(centers):
        for (qq, b3, b2) in centers[idx + 1 :]:
            d3 = Fraction(a3, q) - Fraction(b3, qq)
            d3 -= round(d3)
            d2 = Fraction(a2, q) - Fraction(b2, qq)
            d2 -= round(d2)
            if d3 == 0 and d2 == 0:
                continue  # same center mod 1, identical arc
            if abs(d3) <= h3 and abs(d2) <= h2:
                return False
    return True
