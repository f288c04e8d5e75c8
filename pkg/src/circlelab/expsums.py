"""Weyl sums, complete exponential sums mod q, and their Poisson-side partners.

The direct sum is S(alpha3, alpha2) = sum_x omega(x/P) e(alpha3 C(x) +
alpha2 Q(x)) over the lattice points of the weight's support.  Writing
alpha_i = a_i/q + theta_i, Poisson summation turns it into

    (P/q)^n  sum_m  S(a, q; m) I(theta3 P^3, theta2 P^2; P m / q),

where S(a, q; m) is the complete sum of e_q(a3 C(y) + a2 Q(y) + m.y) over
residue vectors y mod q and I(gamma; z) is the oscillatory integral of
omega(x) e(gamma3 C(x) + gamma2 Q(x) - z.x).  Complete sums are evaluated
from exact integer residues (histogram over the numerator mod q), so the
only rounding is in the final complex exponentials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forms import FormPair
from .gridsum import eval_forms_float, eval_forms_mod, phase_histogram
from .quadrature import (
    DEFAULT_MAX_LEVEL,
    QuadratureError,
    QuadResult,
    axis_nodes_weights,
    tensor_integral,
)
from .util import (
    CapExceededError,
    DEFAULT_CAP,
    chunk_ranges,
    factorize,
    fsum_complex,
    next_pow2,
    parallel_map,
)
from .weightfn import Weight, omega_grid

__all__ = [
    "RationalApprox",
    "ThetaHeight",
    "CrtFactor",
    "theta_height",
    "default_truncation",
    "weyl_sum_direct",
    "complete_sum",
    "complete_sum_crt",
    "crt_decomposition",
    "osc_integral",
    "poisson_reconstruct",
]

_INT64_GUARD = 2**62


@dataclass(frozen=True)
class RationalApprox:
    """Arc datum alpha_i = a_i/q + theta_i with a_i normalized to [1, q]."""

    q: int
    a3: int
    a2: int
    theta3: float
    theta2: float

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q}")
        if not (1 <= self.a3 <= self.q and 1 <= self.a2 <= self.q):
            raise ValueError("a3 and a2 must lie in [1, q]")
        if math.gcd(self.q, math.gcd(self.a3, self.a2)) != 1:
            warnings.warn(
                f"gcd(q, gcd(a3, a2)) != 1 for q={self.q}, a=({self.a3},{self.a2})",
                stacklevel=2,
            )

    @property
    def alpha3(self) -> float:
        return self.a3 / self.q + self.theta3

    @property
    def alpha2(self) -> float:
        return self.a2 / self.q + self.theta2


@dataclass(frozen=True)
class ThetaHeight:
    """Height 1 + |theta3| P^3 + |theta2| P^2 of an arc datum."""

    value: float

    def __post_init__(self):
        if self.value < 1.0:
            raise ValueError("height is always >= 1")


def theta_height(approx: RationalApprox, P: float) -> ThetaHeight:
    return ThetaHeight(1.0 + abs(approx.theta3) * P**3 + abs(approx.theta2) * P**2)


def default_truncation(approx: RationalApprox, P: float) -> int:
    """Default m-sum radius: past |m| ~ q*Theta/P the integrals are negligible."""
    theta = theta_height(approx, P).value
    return math.ceil(4.0 * approx.q * theta / P) + 8


def _lattice_box(weight: Weight, P: float) -> list[tuple[int, int]]:
    return [
        (math.ceil((c - weight.xi) * P), math.floor((c + weight.xi) * P))
        for c in weight.center
    ]


def _int_box_guard(pair: FormPair, box: Sequence[tuple[int, int]]) -> None:
    m = [max(abs(lo), abs(hi)) for lo, hi in box]
    bound = 0
    for (i, j, k), coeff in pair.cubic.monomials.items():
        bound += abs(coeff) * m[i - 1] * m[j - 1] * m[k - 1]
    for (i, j), coeff in pair.quadric.monomials.items():
        bound += abs(coeff) * m[i - 1] * m[j - 1]
    if bound >= _INT64_GUARD:
        raise CapExceededError(
            f"lattice box too large for int64-exact form evaluation (bound {bound})"
        )


def weyl_sum_direct(
    pair: FormPair,
    P: float,
    weight: Weight,
    alpha3: float,
    alpha2: float,
    threads: int = 1,
) -> complex:
    """Direct evaluation of the weighted exponential sum at (alpha3, alpha2)."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    if weight.n != pair.n:
        raise ValueError("weight dimension does not match the form pair")
    n = pair.n
    box = _lattice_box(weight, P)
    if any(lo > hi for lo, hi in box):
        return 0.0 + 0.0j
    _int_box_guard(pair, box)
    axes_rest = [
        np.arange(lo, hi + 1, dtype=np.int64).reshape((1,) * i + (-1,) + (1,) * (n - 1 - i))
        for i, (lo, hi) in enumerate(box[1:], start=1)
    ]
    lo0, hi0 = box[0]

    def work(x0: int) -> complex:
        first = np.array([x0], dtype=np.int64).reshape((-1,) + (1,) * (n - 1))
        coords = [first] + axes_rest
        cvals, qvals = eval_forms_float(pair, coords, exact_int=True)
        arg = alpha3 * cvals + alpha2 * qvals
        arg = arg - np.round(arg)
        wvals = omega_grid(weight, [np.asarray(c, dtype=float) / P for c in coords])
        return complex(np.sum(wvals * np.exp(2j * np.pi * arg)))

    parts = parallel_map(work, list(range(lo0, hi0 + 1)), threads)
    return fsum_complex(parts)


def complete_sum(
    pair: FormPair,
    q: int,
    a3: int,
    a2: int,
    m: Sequence[int] | int,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> complex:
    """Complete sum of e_q(a3 C(y) + a2 Q(y) + m.y) over y mod q, by brute force.

    The numerator is reduced mod q in exact integer arithmetic; the q distinct
    phases are then combined through a histogram, so the result carries only
    the rounding of the final exponentials.
    """
    n = pair.n
    if isinstance(m, int):
        m = [m] * n
    if len(m) != n:
        raise ValueError(f"m has length {len(m)}, expected {n}")
    if q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    if q == 1:
        return 1.0 + 0.0j
    if math.gcd(q, math.gcd(a3, a2)) != 1:
        warnings.warn(f"gcd(q, gcd(a3, a2)) > 1 for q={q}", stacklevel=2)
    hist = phase_histogram(pair, q, a3, a2, m, cap=cap, threads=threads)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    return complex(hist @ roots)


@dataclass(frozen=True)
class CrtFactor:
    """One prime-power factor of a complete sum split by multiplicativity."""

    modulus: int
    a3: int
    a2: int
    value: complex


def crt_decomposition(
    pair: FormPair,
    q: int,
    a3: int,
    a2: int,
    m: Sequence[int] | int,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> list[CrtFactor]:
    """Prime-power factors of S(a, q; m) with twisted numerators.

    For q = r s with gcd(r, s) = 1 the sum factors as
    S(a, rs; m) = S((s^2 a3, s a2), r; m) * S((r^2 a3, r a2), s; m);
    applied across the full factorization the factor for p^e uses the
    cofactor t = q / p^e and numerators (t^2 a3, t a2) reduced mod p^e.
    """
    if isinstance(m, int):
        m = [m] * pair.n
    factors = []
    for p, e in factorize(q):
        pe = p**e
        t = q // pe
        a3t = (t * t * a3) % pe
        a2t = (t * a2) % pe
        val = complete_sum(pair, pe, a3t, a2t, m, cap=cap, threads=threads)
        factors.append(CrtFactor(pe, a3t, a2t, val))
    return factors


def complete_sum_crt(
    pair: FormPair,
    q: int,
    a3: int,
    a2: int,
    m: Sequence[int] | int,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> complex:
    """S(a, q; m) assembled from its prime-power factors."""
    if q == 1:
        return 1.0 + 0.0j
    out = 1.0 + 0.0j
    for factor in crt_decomposition(pair, q, a3, a2, m, cap=cap, threads=threads):
        out *= factor.value
    return out


def _smooth_phase(
    pair: FormPair,
    weight: Weight,
    gamma3: float,
    gamma2: float,
    axes: list[np.ndarray],
    z: Sequence[float] | None = None,
) -> np.ndarray:
    """omega(x) e(gamma3 C(x) + gamma2 Q(x) - z.x) on broadcast coordinate arrays."""
    cvals, qvals = eval_forms_float(pair, axes)
    arg = gamma3 * cvals + gamma2 * qvals
    if z is not None:
        for zi, ax in zip(z, axes):
            if zi:
                arg = arg - zi * ax
    return omega_grid(weight, axes) * np.exp(2j * np.pi * arg)


def osc_integral(
    pair: FormPair,
    weight: Weight,
    gamma3: float,
    gamma2: float,
    z: Sequence[float] | float = 0.0,
    tol: float = 1e-8,
    max_level: int = DEFAULT_MAX_LEVEL,
) -> QuadResult:
    """I(gamma; z): adaptive tensor quadrature over the weight's support cube."""
    n = pair.n
    if weight.n != n:
        raise ValueError("weight dimension does not match the form pair")
    if isinstance(z, (int, float)):
        z = [float(z)] * n
    if len(z) != n:
        raise ValueError(f"z has length {len(z)}, expected {n}")

    def f(axes: list[np.ndarray]) -> np.ndarray:
        return _smooth_phase(pair, weight, gamma3, gamma2, axes, z)

    return tensor_integral(f, weight.center, weight.xi, tol, max_level=max_level)


def _alias_start_level(
    pair: FormPair, weight: Weight, gamma3: float, gamma2: float, zmax: float
) -> int:
    """Per-axis grid size from which the aliased spectrum is negligible."""
    r = max(abs(c) for c in weight.center) + weight.xi
    grad_c = 3.0 * pair.cubic.coefficient_norm() * r * r
    grad_q = 2.0 * pair.quadric.coefficient_norm() * r
    poly_freq = abs(gamma3) * grad_c + abs(gamma2) * grad_q
    length = 2.0 * weight.xi
    bump_freq = 32.0 / length
    return next_pow2(max(64.0, length * (zmax + poly_freq + bump_freq) + 32.0))


def _poisson_tensor(
    pair: FormPair,
    weight: Weight,
    gamma3: float,
    gamma2: float,
    freq_step: float,
    M: int,
    grid_n: int,
) -> np.ndarray:
    """I(gamma; freq_step * m) for all m in [-M, M]^n by tensor contraction.

    The smooth factor omega e(gamma . (C, Q)) is sampled once on the tensor
    grid; the separable oscillation e(-freq_step m . x) is folded in axis by
    axis, which is exact on the grid and turns the m-family of integrals
    into n small matrix products.
    """
    n = pair.n
    ms = np.arange(-M, M + 1)
    nodes = []
    wts = []
    for c in weight.center:
        nd, w = axis_nodes_weights(c, weight.xi, grid_n)
        nodes.append(nd)
        wts.append(w)
    phases = [np.exp(-2j * np.pi * freq_step * np.outer(ms, nd)) for nd in nodes]

    if n == 1:
        g = _smooth_phase(pair, weight, gamma3, gamma2, [nodes[0]])
        return phases[0] @ (wts[0] * g)

    rest_elems = (grid_n + 1) ** (n - 1)
    out_elems = (2 * M + 1) * rest_elems
    if out_elems > 2**26:
        raise CapExceededError(
            f"poisson contraction workspace {out_elems} elements exceeds cap"
        )
    slab = max(1, 2**22 // rest_elems)
    rest_axes = [
        nodes[i].reshape((1,) * i + (-1,) + (1,) * (n - 1 - i)) for i in range(1, n)
    ]
    out = np.zeros((2 * M + 1,) + (grid_n + 1,) * (n - 1), dtype=complex)
    for lo, hi in chunk_ranges(0, grid_n + 1, slab):
        axes = [nodes[0][lo:hi].reshape((-1,) + (1,) * (n - 1))] + rest_axes
        g = _smooth_phase(pair, weight, gamma3, gamma2, axes)
        g = g * wts[0][lo:hi].reshape((-1,) + (1,) * (n - 1))
        out += np.tensordot(phases[0][:, lo:hi], g, axes=([1], [0]))
    for i in range(1, n):
        weighted = phases[i] * wts[i][None, :]
        out = np.tensordot(out, weighted, axes=([1], [1]))
    return out


def poisson_reconstruct(
    pair: FormPair,
    P: float,
    weight: Weight,
    approx: RationalApprox,
    M: int,
    rel_tol: float = 1e-9,
    cap: int = DEFAULT_CAP,
) -> complex:
    """Truncated Poisson-summation reconstruction of the direct Weyl sum.

    Sums (P/q)^n S(a, q; m) I(theta3 P^3, theta2 P^2; P m / q) over
    |m|_inf <= M.  All complete sums mod q are obtained at once as the
    inverse DFT of the residue phase grid, and the m-family of oscillatory
    integrals shares one alias-resolved quadrature grid whose resolution is
    doubled until the total stabilizes to rel_tol.
    """
    if M < 0:
        raise ValueError("truncation radius M must be >= 0")
    n = pair.n
    q = approx.q
    if q**n > cap:
        raise CapExceededError(f"residue grid q^n = {q}^{n} exceeds cap {cap}")
    gamma3 = approx.theta3 * P**3
    gamma2 = approx.theta2 * P**2

    coords = [
        np.arange(q, dtype=np.int64).reshape((1,) * i + (-1,) + (1,) * (n - 1 - i))
        for i in range(n)
    ]
    cvals, qvals = eval_forms_mod(pair, q, coords)
    t = ((approx.a3 % q) * cvals + (approx.a2 % q) * qvals) % q
    f = np.exp(2j * np.pi * t / q)
    sums_mod = q**n * np.fft.ifftn(f)

    ms = np.arange(-M, M + 1)
    if (2 * M + 1) ** n > 2**24:
        raise CapExceededError("truncation radius too large for the m-grid")
    sums_big = sums_mod[np.ix_(*([ms % q] * n))]

    freq_step = P / q
    grid_n = _alias_start_level(pair, weight, gamma3, gamma2, freq_step * M)
    prev = None
    while True:
        tensor = _poisson_tensor(pair, weight, gamma3, gamma2, freq_step, M, grid_n)
        total = (P / q) ** n * complex(np.sum(sums_big * tensor))
        if prev is not None and abs(total - prev) <= rel_tol * (1.0 + abs(total)):
            return total
        if (grid_n * 2 + 1) ** min(n, 2) * (2 * M + 1) ** max(0, n - 2) > 2**26:
            raise QuadratureError(
                f"poisson quadrature failed to stabilize by grid size {grid_n}"
            )
        prev = total
        grid_n *= 2
