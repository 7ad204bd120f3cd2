import math

import numpy as np
import pytest
from scipy.optimize import brentq

from rfl.errors import DomainError
from rfl.survival import (
    SurvivalParams,
    block_distribution,
    excursion_mass,
    g_linear,
    g_nonlinear,
    normalizer,
    rho_from_pr,
    rho_of,
    sign_flip_sigma,
    solve_pr,
)

GRID = np.linspace(0.01, 0.99, 50)


def nontrivial_root(g):
    """Root in (0, 1) away from the trivial root x = 0, bracketed by a sign scan."""
    xs = np.geomspace(1e-9, 1 - 1e-9, 4000)
    vals = np.array([g(x) for x in xs])
    i = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[-1]
    return brentq(g, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)


def test_golden_ratio_root():
    golden = (math.sqrt(5) - 1) / 2
    assert solve_pr(0.5, 3) == pytest.approx(golden, abs=1e-15)
    assert solve_pr(0.5, 3, "nonlinear") == pytest.approx(golden, abs=1e-15)
    assert rho_of(0.5, 3) == pytest.approx(golden, abs=1e-15)


@pytest.mark.parametrize("k", [3, 4, 5, 10])
def test_linear_root_against_brentq(k):
    for p in GRID:
        pr = solve_pr(p, k)
        if pr > 0.999:
            continue
        ref = nontrivial_root(lambda x: g_linear(x, p, k))
        assert pr == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("k", [3, 4, 5, 10])
def test_nonlinear_root_against_brentq(k):
    for p in GRID[GRID > 1 / k + 0.01]:
        pr = solve_pr(p, k, "nonlinear")
        if pr > 0.999:
            continue
        ref = nontrivial_root(lambda x: g_nonlinear(x, p, k))
        assert pr == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("k", [3, 4, 5, 10])
@pytest.mark.parametrize("variant", ["linear", "nonlinear"])
def test_residual_scaled_by_derivative(k, variant):
    g = g_linear if variant == "linear" else g_nonlinear
    for p in GRID:
        pr = solve_pr(p, k, variant)
        if pr in (0.0, 1.0) or 1 - pr < 1e-4:
            continue
        h = 1e-7 * min(pr, 1 - pr)
        slope = (g(pr + h, p, k) - g(pr - h, p, k)) / (2 * h)
        assert abs(g(pr, p, k)) <= 1e-12 * max(1.0, abs(slope))


@pytest.mark.parametrize("variant", ["linear", "nonlinear"])
def test_rho_consistency_and_formula(variant):
    for k in (3, 4, 5, 10):
        for p in GRID:
            sp = SurvivalParams.compute(p, k, variant)
            assert sp.rho ** (k - 1) + sp.p_r == pytest.approx(1.0, abs=1e-12)
            if 1 - sp.p_r > 1e-4:
                assert rho_from_pr(sp.p_r, p, k, variant) == pytest.approx(sp.rho, abs=1e-9)


def test_boundaries():
    assert solve_pr(1.0, 5) == 1.0 and rho_of(1.0, 5) == 0.0
    assert solve_pr(0.0, 5) == 0.0 and rho_of(0.0, 5) == 1.0
    assert solve_pr(0.2, 5, "nonlinear") == 0.0
    assert solve_pr(0.2001, 5, "nonlinear") > 0.0


def test_monotone_in_p():
    for variant in ("linear", "nonlinear"):
        prs = [solve_pr(p, 4, variant) for p in GRID]
        assert np.all(np.diff(prs) >= 0)


def test_block_distribution():
    d = block_distribution(0.6, 5)
    assert d.sum() == pytest.approx(1.0)
    assert np.allclose(d, 0.6 ** np.arange(4) / normalizer(0.6, 5))
    assert np.allclose(block_distribution(0.0, 4), [1, 0, 0])


def test_sign_flip_and_excursion_closed_forms():
    pr = solve_pr(0.5, 3)
    assert sign_flip_sigma(0.5, 3) == pytest.approx((3 - math.sqrt(5)) / 4, abs=1e-14)
    assert excursion_mass(0.5, pr) == pytest.approx(math.sqrt(5) - 2, abs=1e-14)


def test_errors():
    with pytest.raises(DomainError):
        solve_pr(1.2, 3)
    with pytest.raises(DomainError):
        solve_pr(0.5, 2)
    with pytest.raises(DomainError):
        sign_flip_sigma(0.0, 4)
