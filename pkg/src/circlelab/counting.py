"""Enumeration of integer solutions of C = Q = 0 and the weighted count.

Enumeration is exact (Python integers, no overflow) and yields points in
lexicographic order so outputs are reproducible and diffable.  When the
quadric is diagonal with d_n != 0 the last coordinate is solved by an
integer square root instead of scanned, which removes one dimension from
the scan; the fallback is a plain box scan.

The weighted count N(P) = sum over solutions of omega(x/P) needs only the
integer points of the box circumscribing P times the support ball.  Sums
are accumulated with math.fsum per first-coordinate slab and combined in
slab order, so results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .forms import FormPair, eval_cubic, eval_quadratic
from .util import parallel_map
from .weightfn import Weight, omega

__all__ = [
    "enumerate_solutions",
    "count_box",
    "count_weighted",
    "growth_fit",
    "fit_log_power",
    "GrowthFit",
    "weight_box",
]

Box = Sequence[tuple[int, int]]


def _check_box(n: int, box: Box) -> list[tuple[int, int]]:
    if len(box) != n:
        raise ValueError(f"box has {len(box)} ranges, expected {n}")
    out = []
    for lo, hi in box:
        lo, hi = int(lo), int(hi)
        out.append((lo, hi))
    return out


def _isqrt_exact(t: int) -> int | None:
    """Integer square root of t when t is a perfect square, else None."""
    if t < 0:
        return None
    r = math.isqrt(t)
    return r if r * r == t else None


def _prefix_products(ranges: list[range]) -> Iterator[tuple[int, ...]]:
    if not ranges:
        yield ()
        return
    import itertools

    yield from itertools.product(*ranges)


def enumerate_solutions(pair: FormPair, box: Box) -> Iterator[tuple[int, ...]]:
    """Yield every integer point of the box with C(x) = Q(x) = 0, once, in
    lexicographic order."""
    n = pair.n
    box = _check_box(n, box)
    ranges = [range(lo, hi + 1) for lo, hi in box]
    diag = pair.quadric.diagonal()
    fast = pair.quadric.is_diagonal and n >= 1 and diag[-1] != 0

    if not fast:
        for x in _prefix_products(ranges):
            if eval_quadratic(pair.quadric, x) == 0 and eval_cubic(pair.cubic, x) == 0:
                yield x
        return

    dn = diag[-1]
    lo_n, hi_n = box[-1]
    for prefix in _prefix_products(ranges[:-1]):
        s = sum(d * v * v for d, v in zip(diag[:-1], prefix))
        # solve d_n * t^2 = -s over the integers
        if (-s) % dn:
            continue
        t2 = (-s) // dn
        r = _isqrt_exact(t2)
        if r is None:
            continue
        candidates = (0,) if r == 0 else (-r, r)
        for xn in candidates:
            if lo_n <= xn <= hi_n:
                x = prefix + (xn,)
                if eval_cubic(pair.cubic, x) == 0:
                    yield x


def count_box(pair: FormPair, box: Box) -> int:
    return sum(1 for _ in enumerate_solutions(pair, box))


def weight_box(weight: Weight, P: float) -> list[tuple[int, int]]:
    """Integer box circumscribing P times the support ball of the weight."""
    out = []
    for lo, hi in weight.support_box():
        out.append((math.ceil(lo * P), math.floor(hi * P)))
    return out


def count_weighted(pair: FormPair, P: float, weight: Weight, threads: int = 1) -> float:
    """N(P) = sum of omega(x/P) over integer solutions of C = Q = 0."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    if weight.n != pair.n:
        raise ValueError("weight dimension does not match the form pair")
    box = weight_box(weight, P)
    if any(lo > hi for lo, hi in box):
        return 0.0
    lo0, hi0 = box[0]
    slabs = [(x0, x0) for x0 in range(lo0, hi0 + 1)]

    def work(slab: tuple[int, int]) -> float:
        sub = [slab] + list(box[1:])
        return math.fsum(
            omega(weight, [v / P for v in x]) for x in enumerate_solutions(pair, sub)
        )

    return math.fsum(parallel_map(work, slabs, threads))


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual: float


def fit_log_power(p_values: Sequence[float], counts: Sequence[float]) -> GrowthFit:
    """Least-squares slope of log(count) against log(P)."""
    if len(p_values) != len(counts):
        raise ValueError("P list and count list differ in length")
    if len(p_values) < 3:
        raise ValueError("need at least 3 values of P for a growth fit")
    if any(c <= 0 for c in counts):
        raise ValueError("insufficient nonzero counts for a growth fit")
    xs = [math.log(p) for p in p_values]
    ys = [math.log(c) for c in counts]
    k = len(xs)
    mx = math.fsum(xs) / k
    my = math.fsum(ys) / k
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("P values must not all coincide")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    resid = math.sqrt(
        math.fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys)) / k
    )
    return GrowthFit(slope, intercept, resid)


def growth_fit(
    pair: FormPair, weight: Weight, p_values: Sequence[float], threads: int = 1
) -> GrowthFit:
    """Fit the growth exponent of the weighted count over an ascending P grid."""
    counts = [count_weighted(pair, P, weight, threads=threads) for P in p_values]
    return fit_log_power(p_values, counts)
