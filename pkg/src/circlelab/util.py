"""Small shared helpers: budget errors, factorization, deterministic reductions."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
U = TypeVar("U")

DEFAULT_CAP = 10**8


class CapExceededError(RuntimeError):
    """Raised when a scan or sum would exceed the configured work budget."""


def check_cap(work: int, cap: int, what: str) -> None:
    if work > cap:
        raise CapExceededError(f"{what}: {work} elements exceeds cap {cap}")


def factorize(q: int) -> list[tuple[int, int]]:
    """Prime factorization of q >= 1 by trial division, as (p, e) pairs."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    out = []
    p = 2
    while p * p <= q:
        if q % p == 0:
            e = 0
            while q % p == 0:
                q //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if q > 1:
        out.append((q, 1))
    return out


def jordan_totient2(q: int) -> int:
    """J_2(q) = number of pairs (a,b) mod q with gcd(q, gcd(a,b)) = 1."""
    out = q * q
    for p, _ in factorize(q):
        out = out // (p * p) * (p * p - 1)
    return out


def next_pow2(x: float) -> int:
    n = 1
    while n < x:
        n *= 2
    return n


def chunk_ranges(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    """Split [lo, hi) into consecutive half-open chunks of at most `size`."""
    if size <= 0:
        raise ValueError("chunk size must be positive")
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def parallel_map(fn: Callable[[T], U], items: Sequence[T], threads: int = 1) -> list[U]:
    """Map fn over items, optionally on a thread pool.

    The chunking of work is decided by the caller and never depends on the
    thread count, so results (a list in item order) are identical for any
    `threads` value.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fsum_complex(values: Iterable[complex]) -> complex:
    """Correctly rounded complex sum (fsum on real and imaginary parts)."""
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
