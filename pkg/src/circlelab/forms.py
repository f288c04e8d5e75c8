"""Exact integer cubic and quadratic forms.

A cubic form is stored sparsely as a map from ordered index triples
(i <= j <= k, 1-based) to integer coefficients, so that

    C(x) = sum over triples of coeff * x_i x_j x_k.

The associated symmetric tensor c_ijk assigns coeff / multiplicity to every
permutation of the triple, where the multiplicity is 1, 3 or 6; hence
6 * c_ijk is always an integer and all derived objects (bilinear forms,
gradients, Gram matrix) stay in exact integer arithmetic.  Rank and
signature of the quadric are computed over the rationals, never in floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "CubicForm",
    "QuadraticForm",
    "FormPair",
    "Signature",
    "eval_cubic",
    "eval_quadratic",
    "bilinear_forms",
    "gradient_cubic",
    "gradient_quadratic",
    "rank_quadratic",
    "signature_quadratic",
    "smooth_point_test",
    "hypothesis_report",
    "h_parameter",
    "cubic_singular_points_mod_p",
]


def _triple_multiplicity(i: int, j: int, k: int) -> int:
    if i == j == k:
        return 1
    if i == j or j == k or i == k:
        return 3
    return 6


@dataclass(frozen=True)
class CubicForm:
    """Sparse integer cubic form in n variables."""

    n: int
    monomials: Mapping[tuple[int, int, int], int]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        clean = {}
        for key, coeff in self.monomials.items():
            i, j, k = key
            if not (1 <= i <= j <= k <= self.n):
                raise ValueError(f"cubic index triple {key} not ordered within [1, {self.n}]")
            if int(coeff) != coeff:
                raise ValueError(f"cubic coefficient for {key} must be an integer")
            if coeff:
                clean[(int(i), int(j), int(k))] = int(coeff)
        object.__setattr__(self, "monomials", clean)

    def evaluate(self, x: Sequence) -> object:
        return eval_cubic(self, x)

    def coefficient_norm(self) -> int:
        """Sum of absolute coefficients, a crude size measure."""
        return sum(abs(c) for c in self.monomials.values())


@dataclass(frozen=True)
class QuadraticForm:
    """Sparse integer quadratic form in n variables."""

    n: int
    monomials: Mapping[tuple[int, int], int]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        clean = {}
        for key, coeff in self.monomials.items():
            i, j = key
            if not (1 <= i <= j <= self.n):
                raise ValueError(f"quadric index pair {key} not ordered within [1, {self.n}]")
            if int(coeff) != coeff:
                raise ValueError(f"quadric coefficient for {key} must be an integer")
            if coeff:
                clean[(int(i), int(j))] = int(coeff)
        object.__setattr__(self, "monomials", clean)

    def gram(self) -> list[list[int]]:
        """Integer Gram matrix G with x^T G x = 2 Q(x)."""
        g = [[0] * self.n for _ in range(self.n)]
        for (i, j), coeff in self.monomials.items():
            if i == j:
                g[i - 1][i - 1] = 2 * coeff
            else:
                g[i - 1][j - 1] = coeff
                g[j - 1][i - 1] = coeff
        return g

    @property
    def is_diagonal(self) -> bool:
        return all(i == j for (i, j) in self.monomials)

    def diagonal(self) -> list[int]:
        """Coefficients d_i of x_i^2 (valid view for any form)."""
        return [self.monomials.get((i, i), 0) for i in range(1, self.n + 1)]

    def evaluate(self, x: Sequence) -> object:
        return eval_quadratic(self, x)

    def coefficient_norm(self) -> int:
        return sum(abs(c) for c in self.monomials.values())


@dataclass(frozen=True)
class Signature:
    """Inertia indices (r positive, s negative) of a quadratic form."""

    r: int
    s: int

    @property
    def rank(self) -> int:
        return self.r + self.s


@dataclass(frozen=True)
class FormPair:
    """A cubic and a quadric in the same variables, plus user-asserted analytic data.

    The h-invariant of the cubic and nonsingularity of either form are not
    computed here; they are supplied by the user (h resolves to n when the
    cubic is asserted nonsingular).
    """

    cubic: CubicForm
    quadric: QuadraticForm
    cubic_nonsingular: bool | None = None
    h_override: int | None = None

    def __post_init__(self):
        if self.cubic.n != self.quadric.n:
            raise ValueError(
                f"dimension mismatch: cubic has n={self.cubic.n}, quadric has n={self.quadric.n}"
            )
        if self.h_override is not None and self.h_override <= 0:
            raise ValueError("h_override must be a positive integer")

    @property
    def n(self) -> int:
        return self.cubic.n


def _check_vector(n: int, x: Sequence) -> None:
    if len(x) != n:
        raise ValueError(f"vector has length {len(x)}, expected {n}")


def eval_cubic(cubic: CubicForm, x: Sequence):
    """Exact value sum coeff * x_i x_j x_k (works for int or float inputs)."""
    _check_vector(cubic.n, x)
    total = 0
    for (i, j, k), coeff in cubic.monomials.items():
        total += coeff * x[i - 1] * x[j - 1] * x[k - 1]
    return total


def eval_quadratic(quadric: QuadraticForm, x: Sequence):
    _check_vector(quadric.n, x)
    total = 0
    for (i, j), coeff in quadric.monomials.items():
        total += coeff * x[i - 1] * x[j - 1]
    return total


def bilinear_forms(cubic: CubicForm, x: Sequence, y: Sequence) -> list:
    """The n bilinear forms B_i(x; y) = 3! sum_{j,k} c_ijk x_j y_k.

    Exact integers for integer input; B_i(x; y) = B_i(y; x) by symmetry of
    the tensor, and sum_i x_i B_i(x; x) = 6 C(x).
    """
    n = cubic.n
    _check_vector(n, x)
    _check_vector(n, y)
    out = [0] * n
    for (i, j, k), coeff in cubic.monomials.items():
        six_c = 6 * coeff // _triple_multiplicity(i, j, k)
        for (p, q, r) in set(itertools.permutations((i, j, k))):
            out[p - 1] += six_c * x[q - 1] * y[r - 1]
    return out


def gradient_cubic(cubic: CubicForm, x: Sequence) -> list:
    """Exact gradient of the cubic at x."""
    n = cubic.n
    _check_vector(n, x)
    out = [0] * n
    for (i, j, k), coeff in cubic.monomials.items():
        if i == j == k:
            out[i - 1] += 3 * coeff * x[i - 1] * x[i - 1]
        elif i == j:
            out[i - 1] += 2 * coeff * x[i - 1] * x[k - 1]
            out[k - 1] += coeff * x[i - 1] * x[i - 1]
        elif j == k:
            out[i - 1] += coeff * x[j - 1] * x[j - 1]
            out[j - 1] += 2 * coeff * x[i - 1] * x[j - 1]
        else:
            out[i - 1] += coeff * x[j - 1] * x[k - 1]
            out[j - 1] += coeff * x[i - 1] * x[k - 1]
            out[k - 1] += coeff * x[i - 1] * x[j - 1]
    return out


def gradient_quadratic(quadric: QuadraticForm, x: Sequence) -> list:
    """Exact gradient of the quadric at x; equals G x for the Gram matrix G."""
    n = quadric.n
    _check_vector(n, x)
    out = [0] * n
    for (i, j), coeff in quadric.monomials.items():
        if i == j:
            out[i - 1] += 2 * coeff * x[i - 1]
        else:
            out[i - 1] += coeff * x[j - 1]
            out[j - 1] += coeff * x[i - 1]
    return out


def rank_quadratic(quadric: QuadraticForm) -> int:
    """Rank of the Gram matrix over the rationals (exact elimination)."""
    m = [[Fraction(v) for v in row] for row in quadric.gram()]
    n = quadric.n
    rank = 0
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        for r in range(row + 1, n):
            if m[r][col]:
                f = m[r][col] / m[row][col]
                for c in range(col, n):
                    m[r][c] -= f * m[row][c]
        row += 1
        rank += 1
    return rank


def _swap_row_col(a: list[list[Fraction]], i: int, j: int) -> None:
    a[i], a[j] = a[j], a[i]
    for row in a:
        row[i], row[j] = row[j], row[i]


def signature_quadratic(quadric: QuadraticForm) -> Signature:
    """Signature (r, s) by exact rational congruence diagonalization.

    When the active block has only zero diagonal entries but a nonzero
    off-diagonal entry b, the congruence u = e_i + e_j, v = e_i - e_j turns
    the hyperbolic 2x2 block into diag(2b, -2b), contributing (1, 1).
    """
    n = quadric.n
    a = [[Fraction(v) for v in row] for row in quadric.gram()]
    r = s = 0
    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if a[i][i] != 0), None)
        if piv is None:
            off = next(
                ((i, j) for i in range(k, n) for j in range(i + 1, n) if a[i][j] != 0),
                None,
            )
            if off is None:
                break
            i, j = off
            # row/col i += row/col j, then row/col j -= half of new row/col i,
            # is equivalent to the (e_i + e_j, e_i - e_j) substitution; doing
            # just the first step already places 2b on the diagonal.
            for c in range(n):
                a[i][c] += a[j][c]
            for rr in range(n):
                a[rr][i] += a[rr][j]
            piv = i
        if piv != k:
            _swap_row_col(a, k, piv)
        d = a[k][k]
        if d > 0:
            r += 1
        else:
            s += 1
        for rr in range(k + 1, n):
            if a[rr][k]:
                f = a[rr][k] / d
                for c in range(n):
                    a[rr][c] -= f * a[k][c]
        for cc in range(k + 1, n):
            if a[k][cc]:
                f = a[k][cc] / d
                for rr in range(n):
                    a[rr][cc] -= f * a[rr][k]
        k += 1
    return Signature(r, s)


def smooth_point_test(pair: FormPair, x: Sequence[float], tol: float) -> bool:
    """True when x is an approximate common zero at which the Jacobian has rank 2.

    Checks |C(x)| <= tol, |Q(x)| <= tol * (1 + |x|^2) (the quadric threshold
    is scaled to keep the two residuals commensurate away from |x| ~ 1), and
    that some 2x2 minor of [grad C; grad Q] exceeds tol in magnitude.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = pair.n
    _check_vector(n, x)
    norm2 = sum(float(v) * float(v) for v in x)
    if abs(eval_cubic(pair.cubic, x)) > tol:
        return False
    if abs(eval_quadratic(pair.quadric, x)) > tol * (1.0 + norm2):
        return False
    gc = gradient_cubic(pair.cubic, x)
    gq = gradient_quadratic(pair.quadric, x)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(gc[i] * gq[j] - gc[j] * gq[i]) > tol:
                return True
    return False


def hypothesis_report(
    pair: FormPair, h: int | None, rho: int, signature: Signature
) -> dict:
    """Evaluate the headline sufficient conditions as plain predicates.

    h may be None when unavailable; predicates needing it are then None.
    Also reports the largest d for which the quadric is guaranteed a d-plane
    over every Q_p (n >= 5 + 2d) and over R (d <= n - 1 - max(r, s)).
    """
    if rho < 0 or (h is not None and h < 0):
        raise ValueError("h and rho must be nonnegative")
    n = pair.n
    big = max(signature.r, signature.s)
    report = {
        "n": n,
        "h": h,
        "rho": rho,
        "signature": (signature.r, signature.s),
        "large_dim_plane": n >= 31 and big <= n - 14,
        "h_rho_product": None if h is None else (h - 32) * (rho - 4) > 128,
        "h_rho_min37": None if h is None else min(h, rho) >= 37,
        "nonsingular_cubic_product": (
            (n - 32) * (rho - 4) > 128 if pair.cubic_nonsingular else None
        ),
        "nonsingular_n29": bool(pair.cubic_nonsingular) and n >= 29,
        "large_n49": n >= 49,
        "d_plane_padic_max": (n - 5) // 2 if n >= 5 else None,
        "d_plane_real_max": max(n - 1 - big, -1),
    }
    return report


def h_parameter(pair: FormPair) -> int:
    """h = n for an asserted-nonsingular cubic, else the user override."""
    if pair.cubic_nonsingular:
        return pair.n
    if pair.h_override is not None:
        return pair.h_override
    raise ValueError(
        "h unavailable: set cubic_nonsingular or provide h_override in the problem file"
    )


def cubic_singular_points_mod_p(
    cubic: CubicForm, primes: Sequence[int] = (2, 3, 5), cap: int = 10**7
) -> dict[int, tuple[int, ...] | None]:
    """Sanity scan for nonzero x mod p with C(x) = 0 and grad C(x) = 0 mod p.

    A hit does not disprove nonsingularity over Q, but flags the assertion
    as suspect.  Primes with p^n > cap are skipped.
    """
    findings: dict[int, tuple[int, ...] | None] = {}
    n = cubic.n
    for p in primes:
        if p**n > cap:
            continue
        found = None
        for x in itertools.product(range(p), repeat=n):
            if not any(x):
                continue
            if eval_cubic(cubic, x) % p:
                continue
            if all(g % p == 0 for g in gradient_cubic(cubic, x)):
                found = x
                break
        findings[p] = found
    return findings
