"""Sin kernel, truncated singular integral, main-term composition."""

import math
import random

import numpy as np
import pytest

from circlelab.archimedean import (
    main_term,
    major_arc_approx_check,
    sin_kernel,
    sin_kernel_grid,
    singular_integral_truncated,
)
from circlelab.expsums import RationalApprox, osc_integral
from circlelab.weightfn import Weight, nu_grid

from conftest import make_pair


# ------------------------------------------------------------------ kernel

def test_sin_kernel_values():
    assert sin_kernel(4.0, 0.0) == 8.0
    assert sin_kernel(1.0, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert sin_kernel(2.0, 0.1) == pytest.approx(
        math.sin(0.4 * math.pi) / (0.1 * math.pi), abs=1e-12
    )


def test_sin_kernel_identities():
    rng = random.Random(67)
    for _ in range(500):
        R = rng.uniform(0.5, 16.0)
        u = rng.uniform(-4.0, 4.0)
        k = sin_kernel(R, u)
        assert k == pytest.approx(sin_kernel(R, -u), abs=1e-12)  # even
        assert abs(k) <= 2.0 * R + 1e-12
        if u != 0:
            assert abs(k) <= 1.0 / (math.pi * abs(u)) + 1e-12


def test_sin_kernel_switch_continuity():
    # series and quotient branches agree at the switch point to 1e-12
    for R in (1.0, 4.0, 16.0):
        below = sin_kernel(R, 1e-8 * (1 - 1e-9))
        above = sin_kernel(R, 1e-8 * (1 + 1e-9))
        assert abs(below - above) < 1e-12


def test_sin_kernel_grid_matches_scalar():
    us = np.array([0.0, 1e-12, 1e-8, 0.3, -0.7])
    grid = sin_kernel_grid(3.0, us)
    for u, g in zip(us, grid):
        assert g == pytest.approx(sin_kernel(3.0, float(u)), abs=1e-14)


# ------------------------------------------------------- singular integral

def _dense_grid_oracle(pair, weight, R, n_grid=2000):
    """Midpoint rule on an n_grid^2 mesh of the support square (n = 2)."""
    (c1, c2), xi = weight.center, weight.xi
    xs = c1 - xi + (np.arange(n_grid) + 0.5) * (2 * xi / n_grid)
    ys = c2 - xi + (np.arange(n_grid) + 0.5) * (2 * xi / n_grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    cvals = np.zeros_like(X)
    for (i, j, k), coeff in pair.cubic.monomials.items():
        arrs = [X, Y]
        cvals += coeff * arrs[i - 1] * arrs[j - 1] * arrs[k - 1]
    qvals = np.zeros_like(X)
    for (i, j), coeff in pair.quadric.monomials.items():
        arrs = [X, Y]
        qvals += coeff * arrs[i - 1] * arrs[j - 1]
    w = nu_grid(np.sqrt((X - c1) ** 2 + (Y - c2) ** 2) / xi)
    vals = w * sin_kernel_grid(R, cvals) * sin_kernel_grid(R, qvals)
    return float(np.sum(vals)) * (2 * xi / n_grid) ** 2


def test_singular_integral_dense_oracle(pair_line):
    w = Weight((0.3, -0.3), 0.1)
    res = singular_integral_truncated(pair_line, w, 4.0, tol=1e-8)
    oracle = _dense_grid_oracle(pair_line, w, 4.0)
    assert res.value == pytest.approx(oracle, abs=1e-4)


def test_singular_integral_bounded_when_support_off_variety(pair_line):
    # support where |C|, |Q| >= c > 0 forces |J(R)| <= mass / (pi^2 c^2)
    w = Weight((0.35, 0.1), 0.04)
    mass = osc_integral(pair_line, w, 0.0, 0.0, 0.0, tol=1e-10).value.real
    lo_c, lo_q = np.inf, np.inf
    rng = np.random.default_rng(3)
    for _ in range(4000):
        v = rng.uniform(-1, 1, 2)
        r = np.hypot(*v)
        if r > 1:
            continue
        pt = [0.35 + 0.04 * v[0], 0.1 + 0.04 * v[1]]
        lo_c = min(lo_c, abs(pt[0] ** 3 + pt[1] ** 3))
        lo_q = min(lo_q, abs(pt[0] ** 2 - pt[1] ** 2))
    res = singular_integral_truncated(pair_line, w, 8.0, tol=1e-9)
    bound = mass / (math.pi**2 * lo_c * lo_q)
    assert abs(res.value) <= bound


def test_singular_integral_gamma_quadrature_oracle(pair_line):
    # the raw double integral over gamma in [-R, R]^2, done numerically per
    # grid point, must match the sin-kernel form (R = 1 keeps it cheap)
    w = Weight((0.3, -0.3), 0.1)
    res = singular_integral_truncated(pair_line, w, 1.0, tol=1e-9)
    n_grid = 400
    xi = w.xi
    xs = 0.3 - xi + (np.arange(n_grid) + 0.5) * (2 * xi / n_grid)
    ys = -0.3 - xi + (np.arange(n_grid) + 0.5) * (2 * xi / n_grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    cvals = X**3 + Y**3
    qvals = X**2 - Y**2
    wvals = nu_grid(np.sqrt((X - 0.3) ** 2 + (Y + 0.3) ** 2) / xi)
    # Gauss-Legendre in each gamma variable; the double integral factors
    nodes, wts = np.polynomial.legendre.leggauss(96)
    k3 = (np.cos(2 * np.pi * np.outer(cvals.ravel(), nodes)) @ wts).reshape(cvals.shape)
    k2 = (np.cos(2 * np.pi * np.outer(qvals.ravel(), nodes)) @ wts).reshape(qvals.shape)
    oracle = float(np.sum(wvals * k3 * k2)) * (2 * xi / n_grid) ** 2
    assert res.value == pytest.approx(oracle, abs=1e-3)


def test_singular_integral_validation(pair_line):
    w = Weight((0.0, 0.0), 0.2)
    with pytest.raises(ValueError):
        singular_integral_truncated(pair_line, w, -1.0)


# ------------------------------------------------------- major arc approx

def test_train_approx_q1_scaling(pair_line):
    w = Weight((0.3, -0.3), 0.1)
    approx = RationalApprox(1, 1, 1, 0.0, 0.0)
    errs = {}
    for P in (16.0, 32.0):
        chk = major_arc_approx_check(pair_line, w, P, approx)
        errs[P] = chk.error
        assert chk.ok and chk.ratio <= 50.0
    # replacement error is O(P^{n-1}) = O(P): the normalized error stays flat
    assert errs[32.0] / 32.0 <= (errs[16.0] / 16.0) * 4.0


def test_train_approx_error_shrinks_relative(pair_line):
    w = Weight((0.3, -0.3), 0.1)
    approx = RationalApprox(2, 1, 1, 0.0, 0.0)
    rel = {}
    for P in (32.0, 64.0):
        chk = major_arc_approx_check(pair_line, w, P, approx)
        rel[P] = chk.error / P**2
        assert chk.ratio <= 50.0
    assert rel[64.0] < rel[32.0]


def test_train_approx_tiny_support(pair_line):
    # degenerate weight: support so small that no lattice point lands in it
    # and the main term itself is below the absolute floor 1e-9 P^n
    w = Weight((0.21, 0.17), 2e-5)
    approx = RationalApprox(1, 1, 1, 0.0, 0.0)
    P = 16.0
    chk = major_arc_approx_check(pair_line, w, P, approx)
    assert chk.lhs == 0j
    assert chk.error <= 1e-9 * P**2
    assert chk.ok


# ----------------------------------------------------------- main term

def test_main_term_composition(pair_line):
    w = Weight((0.3, -0.3), 0.1)
    mt = main_term(pair_line, w, 1, 4.0, 10.0)
    assert mt.sing_series == 1.0
    integral = singular_integral_truncated(pair_line, w, 4.0).value
    assert mt.prediction == pytest.approx(
        integral * 10.0 ** (2 - 5), rel=1e-12
    )
    assert mt.sing_integral == pytest.approx(integral, rel=1e-12)


def test_main_term_n2_computable(pair_line, broad_weight):
    # n = 2 is far outside the theorem range but the number is well defined
    mt = main_term(pair_line, broad_weight, 3, 2.0, 8.0)
    assert math.isfinite(mt.prediction)


def test_osc_integral_decay_scan(capsys):
    # |I(gamma3, 0; 0)| should decay as the cubic phase speeds up; the
    # fitted exponent is only soft-checked (negative), constants are logged
    from circlelab.counting import fit_log_power

    pair = make_pair(1, {(1, 1, 1): 1}, {(1, 1): 1})
    w = Weight((0.25,), 0.2)
    gammas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    mags = []
    for g in gammas:
        res = osc_integral(pair, w, g, 0.0, 0.0, tol=1e-10)
        mags.append(abs(res.value))
        assert abs(res.value) <= 1.0  # |I| <= integral of omega <= vol
    fit = fit_log_power(gammas, mags)
    print(f"osc-integral decay exponent in gamma3: {fit.slope:.3f}")
    assert fit.slope < 0.0
