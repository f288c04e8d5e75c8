"""Solution counts mod q, p-adic densities, and the truncated singular series.

Densities are normalized by p^{k(n-2)} (two equations in n variables):
delta_p(k) = N(p^k) / p^{k(n-2)} for the full count N.  The full count
always picks up extra mass from vectors divisible by p, so the quantity
that actually stabilizes under smooth reduction is the primitive density
delta*_p(k) = N*(p^k) / p^{k(n-2)}, where N* counts solutions with some
unit coordinate: every smooth primitive solution mod p lifts to exactly
p^{n-2} solutions mod p^{k+1}, making delta* constant from k = 1 on.
Both are reported; stabilization is judged on the primitive density.

The truncated singular series is

    S(R) = sum_{q <= R} q^{-n} sum*_{a mod q} S(a, q),

with the inner sum over pairs (a3, a2) coprime to q as a pair; its p-part
partial sums reproduce delta_p(k) exactly, which the tests exploit as a
cross-check between complete sums and residue counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .forms import (
    FormPair,
    QuadraticForm,
    eval_cubic,
    eval_quadratic,
    gradient_cubic,
    gradient_quadratic,
)
from .gridsum import count_solutions_mod, eval_forms_mod, joint_histogram, residue_chunks
from .util import CapExceededError, DEFAULT_CAP, factorize

__all__ = [
    "count_mod",
    "count_mod_primitive",
    "local_density",
    "hensel_stable",
    "HenselReport",
    "singular_series_truncated",
    "SeriesResult",
    "a_of_q",
    "q_factorization",
    "qp_solubility_search",
    "SolubilityReport",
    "DensityReport",
    "density_report",
]


def count_mod(pair: FormPair, q: int, cap: int = DEFAULT_CAP, threads: int = 1) -> int:
    """Number of residue vectors y mod q with C(y) = Q(y) = 0 mod q."""
    if q == 1:
        return 1
    n_all, _ = count_solutions_mod(pair, q, cap=cap, threads=threads)
    return n_all


def count_mod_primitive(
    pair: FormPair, p: int, k: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> int:
    """Solutions mod p^k with at least one coordinate a unit mod p."""
    _, n_prim = count_solutions_mod(pair, p**k, p=p, cap=cap, threads=threads)
    return n_prim


def local_density(
    pair: FormPair, p: int, k: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> Fraction:
    """delta_p(k) = N(p^k) / p^{k(n-2)} as an exact rational."""
    if k == 0:
        return Fraction(1)
    count = count_mod(pair, p**k, cap=cap, threads=threads)
    return Fraction(count, 1) / Fraction(p) ** (k * (pair.n - 2))


@dataclass(frozen=True)
class HenselReport:
    p: int
    kmax: int
    reached: int
    stable: bool
    level: int | None
    densities: tuple[Fraction, ...]
    primitive_densities: tuple[Fraction, ...]
    partial: bool


def hensel_stable(
    pair: FormPair, p: int, kmax: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> HenselReport:
    """Track delta_p(k) and delta*_p(k) for k = 1..kmax and flag stabilization.

    stable is True when the primitive density is constant from some level
    k* < reached onward; the full density is reported alongside but never
    stabilizes at finite level (imprimitive vectors keep feeding it).
    If the cap cuts the scan short the report is marked partial.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    dens: list[Fraction] = []
    prim: list[Fraction] = []
    reached = 0
    partial = False
    for k in range(1, kmax + 1):
        try:
            n_all, n_prim = count_solutions_mod(pair, p**k, p=p, cap=cap, threads=threads)
        except CapExceededError:
            partial = True
            break
        scale = Fraction(p) ** (k * (pair.n - 2))
        dens.append(Fraction(n_all) / scale)
        prim.append(Fraction(n_prim) / scale)
        reached = k
    level = None
    stable = False
    # a zero primitive density is vacuously constant but certifies nothing
    if reached >= 2 and prim[reached - 1] > 0:
        k_star = reached
        while k_star > 1 and prim[k_star - 2] == prim[reached - 1]:
            k_star -= 1
        if k_star < reached:
            stable = True
            level = k_star
    return HenselReport(
        p, kmax, reached, stable, level, tuple(dens), tuple(prim), partial
    )


def _coprime_pair_mask(q: int) -> np.ndarray:
    """q x q boolean mask of (a3, a2) indices coprime to q as a pair."""
    g = np.gcd.outer(np.arange(q), np.arange(q))
    return np.gcd(g, q) == 1


def _complete_sums_all_a(
    pair: FormPair, q: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> np.ndarray:
    """S(a, q) for all numerator pairs a mod q, via a 2-D DFT of the joint
    histogram of (C mod q, Q mod q)."""
    hist = joint_histogram(pair, q, cap=cap, threads=threads)
    # sum_{c,r} H[c,r] e_q(a3 c + a2 r) for all (a3, a2)
    return q * q * np.fft.ifft2(hist)


@dataclass(frozen=True)
class SeriesResult:
    R: int
    value: float
    terms: tuple[tuple[int, float], ...]
    imag_residual: float


def singular_series_truncated(
    pair: FormPair, R: float, cap: int = DEFAULT_CAP, threads: int = 1
) -> SeriesResult:
    """S(R) with its per-q term trace; asserts the imaginary part is noise."""
    n = pair.n
    total_work = sum(q**n for q in range(1, int(R) + 1))
    if total_work > cap:
        raise CapExceededError(
            f"singular series up to R={R} needs {total_work} residue evaluations"
        )
    terms = []
    real_acc = 0.0
    imag_acc = 0.0
    for q in range(1, int(R) + 1):
        if q == 1:
            terms.append((1, 1.0))
            real_acc += 1.0
            continue
        sums = _complete_sums_all_a(pair, q, cap=cap, threads=threads)
        masked = sums[_coprime_pair_mask(q)]
        term = complex(masked.sum()) / q**n
        real_acc += term.real
        imag_acc += term.imag
        terms.append((q, term.real))
    imag_residual = abs(imag_acc)
    assert imag_residual < 1e-9, f"singular series picked up imaginary mass {imag_acc}"
    return SeriesResult(int(R), real_acc, tuple(terms), imag_residual)


def a_of_q(pair: FormPair, q: int, cap: int = DEFAULT_CAP, threads: int = 1) -> float:
    """A(q) = sum over coprime pairs a of |S(a, q)|."""
    if q == 1:
        return 1.0
    sums = _complete_sums_all_a(pair, q, cap=cap, threads=threads)
    return float(np.abs(sums[_coprime_pair_mask(q)]).sum())


def q_factorization(q: int, a3: int, quadric: QuadraticForm) -> tuple[int, int, int]:
    """Split q = q0 q1 q2 by the interaction of a3 with the quadric's diagonal.

    For each prime p let p^v be the largest power dividing any of
    2 d_1, ..., 2 d_{n-1}.  Primes p^e || q with p^{1+v} | a3 go to q0; of
    the rest, cube-full parts (e >= 3) go to q2 and the cube-free remainder
    is q1.  Requires a diagonal quadric with nonzero d_1..d_{n-1}.
    """
    if not quadric.is_diagonal:
        raise ValueError("q factorization requires a diagonal quadratic form")
    diag = quadric.diagonal()[: quadric.n - 1]
    if any(d == 0 for d in diag):
        raise ValueError("diagonal coefficients d_1..d_{n-1} must be nonzero")
    q0 = q1 = q2 = 1
    for p, e in factorize(q):
        v = 0
        for d in diag:
            t = 2 * abs(d)
            vp = 0
            while t % p == 0:
                t //= p
                vp += 1
            v = max(v, vp)
        if a3 % p ** (1 + v) == 0:
            q0 *= p**e
        elif e >= 3:
            q2 *= p**e
        else:
            q1 *= p**e
    return q0, q1, q2


@dataclass(frozen=True)
class SolubilityReport:
    verdict: str  # smooth_liftable | only_singular | none_found
    p: int
    level: int
    point: tuple[int, ...] | None
    solutions_mod_p: int
    partial: bool


def _jacobian_rank2_mod_p(pair: FormPair, x: Sequence[int], p: int) -> bool:
    gc = gradient_cubic(pair.cubic, x)
    gq = gradient_quadratic(pair.quadric, x)
    n = pair.n
    for i in range(n):
        for j in range(i + 1, n):
            if (gc[i] * gq[j] - gc[j] * gq[i]) % p:
                return True
    return False


def _solve_mod_p(rows: list[list[int]], rhs: list[int], p: int, n: int) -> list[int]:
    """One solution of a consistent linear system mod p (free variables 0)."""
    m = [[r % p for r in row] + [b % p] for row, b in zip(rows, rhs)]
    nrow = len(m)
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, nrow) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(v * inv) % p for v in m[r]]
        for i in range(nrow):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
        if r == nrow:
            break
    for i in range(r, nrow):
        if m[i][n] % p:
            raise ArithmeticError("inconsistent lift system; rank-2 certificate wrong")
    x = [0] * n
    for i, c in enumerate(piv_cols):
        x[c] = m[i][n] % p
    return x


def _hensel_lift(pair: FormPair, x: Sequence[int], p: int, kmax: int) -> tuple[int, ...]:
    """Lift a smooth solution mod p to a solution mod p^kmax (Newton steps)."""
    x = [int(v) % p for v in x]
    for k in range(1, kmax):
        pk = p**k
        fc = eval_cubic(pair.cubic, x)
        fq = eval_quadratic(pair.quadric, x)
        assert fc % pk == 0 and fq % pk == 0
        rows = [gradient_cubic(pair.cubic, x), gradient_quadratic(pair.quadric, x)]
        rhs = [(-(fc // pk)) % p, (-(fq // pk)) % p]
        delta = _solve_mod_p(rows, rhs, p, pair.n)
        x = [(xi + pk * di) % (pk * p) for xi, di in zip(x, delta)]
    return tuple(x)


def qp_solubility_search(
    pair: FormPair, p: int, kmax: int, cap: int = DEFAULT_CAP, threads: int = 1
) -> SolubilityReport:
    """Search for a certificate of a Q_p point on C = Q = 0.

    Scans residue vectors mod p; a solution whose Jacobian has rank 2 mod p
    is a smooth point, Hensel-lifted to mod p^kmax and returned as a
    certificate.  If the full scan finds solutions but none smooth (the zero
    vector always solves, with rank-0 Jacobian) the verdict is only_singular.
    none_found is only reachable on a capped, partial scan and is never a
    proof of insolubility.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    n = pair.n
    n_solutions = 0
    smooth_point = None
    partial = False
    try:
        for coords in residue_chunks(p, n, cap=cap):
            cvals, qvals = eval_forms_mod(pair, p, coords)
            sol = (cvals == 0) & (qvals == 0)
            n_solutions += int(np.count_nonzero(sol))
            if smooth_point is None and sol.any():
                for idx in np.flatnonzero(sol):
                    x = tuple(int(c[idx]) for c in coords)
                    if any(x) and _jacobian_rank2_mod_p(pair, x, p):
                        smooth_point = x
                        break
    except CapExceededError:
        partial = True
    if smooth_point is not None:
        lifted = _hensel_lift(pair, smooth_point, p, kmax)
        return SolubilityReport("smooth_liftable", p, kmax, lifted, n_solutions, partial)
    if n_solutions > 0:
        return SolubilityReport("only_singular", p, 1, None, n_solutions, partial)
    return SolubilityReport("none_found", p, 1, None, 0, partial)


@dataclass(frozen=True)
class DensityReport:
    """Bundle of local data: per-prime densities, stabilization, series trace."""

    primes: tuple[int, ...]
    hensel: tuple[HenselReport, ...]
    series: SeriesResult
    a_values: tuple[tuple[int, float], ...] = field(default_factory=tuple)


def density_report(
    pair: FormPair,
    primes: Sequence[int],
    kmax: int,
    R: int,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> DensityReport:
    hensel = tuple(hensel_stable(pair, p, kmax, cap=cap, threads=threads) for p in primes)
    series = singular_series_truncated(pair, R, cap=cap, threads=threads)
    a_vals = tuple((q, a_of_q(pair, q, cap=cap, threads=threads)) for q in range(1, R + 1))
    return DensityReport(tuple(primes), hensel, series, a_vals)
