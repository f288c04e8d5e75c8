"""Vectorized scans over residue vectors mod q and over lattice boxes.

The residue grid {0, ..., q-1}^n is traversed in chunks of flat indices;
each chunk is decoded into coordinate arrays and the two forms are reduced
mod q with intermediate reductions so that all products stay far below the
int64 limit (safe for q up to ~10^6, well beyond the design range).

All consumers aggregate chunk results with order-independent integer
operations (histograms, counts), so the outputs are exactly deterministic
regardless of chunking or thread count.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .forms import FormPair
from .util import CapExceededError, DEFAULT_CAP, chunk_ranges, parallel_map

__all__ = [
    "residue_chunks",
    "eval_forms_mod",
    "eval_forms_float",
    "phase_histogram",
    "joint_histogram",
    "count_solutions_mod",
]

CHUNK = 1 << 18


def eval_forms_float(
    pair: FormPair, axes: Sequence[np.ndarray], exact_int: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """(C, Q) on broadcastable coordinate arrays.

    With exact_int the inputs must be integer arrays small enough that the
    accumulated values stay below 2^62 (the caller guards this); otherwise
    plain float64 evaluation.
    """
    shape = np.broadcast_shapes(*[np.shape(a) for a in axes])
    dtype = np.int64 if exact_int else float
    cvals = np.zeros(shape, dtype=dtype)
    for (i, j, k), coeff in pair.cubic.monomials.items():
        cvals = cvals + coeff * (axes[i - 1] * axes[j - 1] * axes[k - 1])
    qvals = np.zeros(shape, dtype=dtype)
    for (i, j), coeff in pair.quadric.monomials.items():
        qvals = qvals + coeff * (axes[i - 1] * axes[j - 1])
    return cvals, qvals


def _decode(flat: np.ndarray, q: int, n: int) -> list[np.ndarray]:
    """Coordinate arrays (values in [0, q)) for flat indices in [0, q^n)."""
    return [(flat // q**j) % q for j in range(n)]


def residue_chunks(q: int, n: int, cap: int = DEFAULT_CAP) -> Iterator[list[np.ndarray]]:
    total = q**n
    if total > cap:
        raise CapExceededError(f"residue grid q^n = {q}^{n} = {total} exceeds cap {cap}")
    for lo, hi in chunk_ranges(0, total, CHUNK):
        flat = np.arange(lo, hi, dtype=np.int64)
        yield _decode(flat, q, n)


def eval_forms_mod(pair: FormPair, q: int, coords: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """(C mod q, Q mod q) on coordinate arrays with entries in [0, q)."""
    cvals = np.zeros_like(coords[0])
    for (i, j, k), coeff in pair.cubic.monomials.items():
        term = (coords[i - 1] * coords[j - 1]) % q
        term = (term * coords[k - 1]) % q
        cvals = (cvals + (coeff % q) * term) % q
    qvals = np.zeros_like(coords[0])
    for (i, j), coeff in pair.quadric.monomials.items():
        term = (coords[i - 1] * coords[j - 1]) % q
        qvals = (qvals + (coeff % q) * term) % q
    return cvals, qvals


def _linear_mod(m: Sequence[int], q: int, coords: Sequence[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(coords[0])
    for mi, yi in zip(m, coords):
        out = (out + (mi % q) * yi) % q
    return out


def phase_histogram(
    pair: FormPair,
    q: int,
    a3: int,
    a2: int,
    m: Sequence[int],
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> np.ndarray:
    """Histogram over t in [0, q) of a3 C(y) + a2 Q(y) + m.y mod q, y mod q."""
    n = pair.n
    total = q**n
    if total > cap:
        raise CapExceededError(f"complete sum q^n = {q}^{n} = {total} exceeds cap {cap}")
    ranges = chunk_ranges(0, total, CHUNK)

    def work(rng: tuple[int, int]) -> np.ndarray:
        lo, hi = rng
        coords = _decode(np.arange(lo, hi, dtype=np.int64), q, n)
        c, qq = eval_forms_mod(pair, q, coords)
        t = ((a3 % q) * c + (a2 % q) * qq + _linear_mod(m, q, coords)) % q
        return np.bincount(t, minlength=q)

    parts = parallel_map(work, ranges, threads)
    return np.sum(parts, axis=0) if parts else np.zeros(q, dtype=np.int64)


def joint_histogram(
    pair: FormPair, q: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> np.ndarray:
    """q x q histogram of (C(y) mod q, Q(y) mod q) over all y mod q."""
    n = pair.n
    total = q**n
    if total > cap:
        raise CapExceededError(f"residue grid q^n = {q}^{n} = {total} exceeds cap {cap}")
    ranges = chunk_ranges(0, total, CHUNK)

    def work(rng: tuple[int, int]) -> np.ndarray:
        lo, hi = rng
        coords = _decode(np.arange(lo, hi, dtype=np.int64), q, n)
        c, qq = eval_forms_mod(pair, q, coords)
        return np.bincount(c * q + qq, minlength=q * q)

    parts = parallel_map(work, ranges, threads)
    flat = np.sum(parts, axis=0) if parts else np.zeros(q * q, dtype=np.int64)
    return flat.reshape(q, q)


def count_solutions_mod(
    pair: FormPair,
    q: int,
    p: int | None = None,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> tuple[int, int]:
    """(all, primitive) counts of y mod q with C(y) = Q(y) = 0 mod q.

    Primitive means some coordinate of y is a unit mod p; pass p when q is a
    power of p, otherwise the primitive count is reported as 0.
    """
    n = pair.n
    total = q**n
    if total > cap:
        raise CapExceededError(f"residue grid q^n = {q}^{n} = {total} exceeds cap {cap}")
    ranges = chunk_ranges(0, total, CHUNK)

    def work(rng: tuple[int, int]) -> tuple[int, int]:
        lo, hi = rng
        coords = _decode(np.arange(lo, hi, dtype=np.int64), q, n)
        c, qq = eval_forms_mod(pair, q, coords)
        sol = (c == 0) & (qq == 0)
        n_all = int(np.count_nonzero(sol))
        n_prim = 0
        if p is not None:
            divis = np.ones_like(sol)
            for y in coords:
                divis &= y % p == 0
            n_prim = int(np.count_nonzero(sol & ~divis))
        return n_all, n_prim

    parts = parallel_map(work, ranges, threads)
    return sum(a for a, _ in parts), sum(b for _, b in parts)
