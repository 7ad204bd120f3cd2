"""End-to-end acceptance checks, one test per criterion.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``;
the terminal summary prints one PASS/FAIL line per criterion.
"""

import json
import math
import sys
import time

import numpy as np
import pytest

from rfl import cli
from rfl.core import ModelParams, lambda_of_k, word_matrix
from rfl.dynamics import bounded_subsequence, detect_periodicity, exact_endpoints, run_p0
from rfl.lambda_ge2 import fixed_point_B, word_intervals
from rfl.lyapunov import closed_form_p1, gamma, integrate_log_nu, mc_gamma, pstar, scan, signflip_empirical
from rfl.numberfield import field
from rfl.reduction import enumerate_excursions, iter_words, reduce_linear, reduce_nonlinear, word_probability
from rfl.stern_brocot import NuMeasure, delta_all
from rfl.survival import excursion_mass, rho_of, sign_flip_sigma, solve_pr

VISWANATH = math.log(1.13198824)
D = np.diag([1.0, -1.0])


def run_cli(tmp_path, argv):
    out = tmp_path / "out.txt"
    code = cli.main(list(argv) + ["--out", str(out)])
    return code, out.read_text()


def test_criterion_01_viswanath_constant(tmp_path):
    t0 = time.perf_counter()
    code, text = run_cli(tmp_path, ["gamma", "--k", "3", "--p", "0.5", "--variant", "linear"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    rec = json.loads(text)
    assert abs(rec["gamma"] - VISWANATH) <= 5e-4
    assert elapsed < 30.0
    mc = mc_gamma(ModelParams.hecke(3, 0.5), steps=10**6, trials=16, seed=0)
    assert abs(mc.gamma - rec["gamma"]) <= 3 * mc.error


@pytest.mark.parametrize("k", [3, 4, 5, 10])
def test_criterion_02_rho_one_null_integral(k):
    t0 = time.perf_counter()
    r = integrate_log_nu(k, 1.0, 1e-5)
    assert -2e-5 <= r.gamma <= 2e-5
    assert time.perf_counter() - t0 < 10.0


def test_criterion_03_p_one_closed_form():
    for k in (3, 4, 5):
        lam = lambda_of_k(k)
        exact = closed_form_p1(lam)
        assert exact == pytest.approx(math.log((lam + math.sqrt(lam * lam + 4)) / 2), abs=1e-15)
        for variant in ("linear", "nonlinear"):
            params = ModelParams.hecke(k, 1.0, variant)
            assert abs(gamma(params, 1e-7).gamma - exact) <= 1e-6
            assert abs(mc_gamma(params, steps=10**4, trials=2).gamma - exact) <= 1e-6
    for lam in (2.0, 2.5, 3.0):
        exact = math.log((lam + math.sqrt(lam * lam + 4)) / 2)
        params = ModelParams.general(lam, 1.0)
        assert abs(gamma(params, 1e-7).gamma - exact) <= 1e-6
        assert abs(mc_gamma(params, steps=10**4, trials=2).gamma - exact) <= 1e-6


def test_criterion_04_closed_form_root():
    golden = (math.sqrt(5) - 1) / 2
    assert abs(solve_pr(0.5, 3, "linear") - golden) <= 1e-12
    assert abs(solve_pr(0.5, 3, "nonlinear") - golden) <= 1e-12
    for k in (3, 4, 5, 10):
        for variant in ("linear", "nonlinear"):
            for p in np.linspace(0.0, 1.0, 101):
                pr, rho = solve_pr(p, k, variant), rho_of(p, k, variant)
                assert abs(rho ** (k - 1) + pr - 1.0) <= 1e-12, (k, variant, p)


def test_criterion_05_positivity_suite():
    t0 = time.perf_counter()
    strict = False
    for k in (3, 4, 5):
        for rho in np.arange(1, 10) / 10:
            m = NuMeasure(k, float(rho))
            for rank in range(1, 7):
                t, d = delta_all(m, rank)
                assert d.min() >= -1e-12, (k, rho, rank)
                strict = strict or bool(np.any(d[t > 1.0] > 1e-6))
    assert strict
    assert time.perf_counter() - t0 < 60.0


def _abs_run(word, lam, a, b):
    for ch in word:
        a, b = b, abs(lam * b + a if ch == "R" else lam * b - a)
    return a, b


def test_criterion_06_reduction_equivalence():
    rng = np.random.default_rng(1)
    failures = 0
    for k in (3, 4):
        lam = lambda_of_k(k)
        for n in range(1, 11):
            for w in iter_words(n):
                rw = reduce_linear(w, k)
                rhs = rw.sign * word_matrix(rw.letters, lam)
                if rw.pending_flip:
                    rhs = rhs @ D
                failures += not np.allclose(word_matrix(w, lam), rhs, atol=1e-9, rtol=1e-9)
                a, b = rng.uniform(0.1, 2.0, 2)
                full = _abs_run(w, lam, a, b)
                red = _abs_run(reduce_nonlinear(w, k).letters, lam, a, b)
                failures += not np.allclose(full, red, atol=1e-9, rtol=1e-9)
    assert failures == 0


def test_criterion_07_excursion_mass():
    p = 0.5
    limit = excursion_mass(p, solve_pr(p, 3))
    words = enumerate_excursions(3, 24)
    partial = np.cumsum([word_probability(w, p) for w in words])
    assert np.all(np.diff(partial) >= 0)
    assert partial[-1] < limit
    assert limit - partial[-1] < 0.02


def test_criterion_08_sign_flips():
    for k in (3, 4, 10):
        for p in (0.3, 0.5):
            r = signflip_empirical(k, p, steps=10**6, seed=0)
            assert abs(r.frequency - sign_flip_sigma(p, k)) <= 3 * r.std_error, (k, p)
            assert r.mismatches == 0
    ratio = sign_flip_sigma(0.5, 10) / (0.5 * 0.5**9)
    assert 0.75 <= ratio <= 1.25


def _oracle_grid():
    ps = (0.3, 0.5, 0.8)
    for k in (3, 4, 5, 10):
        for p in ps:
            yield ModelParams.hecke(k, p, "linear")
            if p > 1 / k:
                yield ModelParams.hecke(k, p, "nonlinear")
    for lam in (2.0, 2.5, 3.0):
        for p in ps:
            yield ModelParams.general(lam, p)


def test_criterion_09_oracle_grid():
    bad = []
    for params in _oracle_grid():
        q = gamma(params)
        mc = mc_gamma(params, steps=10**6, trials=16, seed=0)
        if not abs(q.gamma - mc.gamma) < 3 * mc.error + q.error:
            bad.append((params, q.gamma, mc.gamma, mc.error))
    assert not bad


def test_criterion_10_monotonicity_and_limits():
    for k in (3, 4, 5, 10):
        lin = [0.001, 0.01, 0.05] + [i / 10 for i in range(1, 11)]
        nonlin = [1 / k + 5e-4, 1 / k + 0.01] + [x for x in (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0) if x > 1 / k + 0.01]
        for variant, grid in (("linear", lin), ("nonlinear", nonlin)):
            rows = scan([k], [], grid, 1e-5, [variant])
            assert [r.p for r in rows] == sorted(grid)
            g = np.array([r.gamma for r in rows])
            e = np.array([r.error for r in rows])
            assert np.all(np.diff(g) >= -(e[1:] + e[:-1]))
            assert abs(g[0]) <= 2e-3
            assert abs(g[-1] - closed_form_p1(lambda_of_k(k))) <= e[-1]


def test_criterion_11_bounded_subsequence():
    r = bounded_subsequence(3, 0.2, 10**6, seed=0)
    assert abs(r.density - 0.4) <= 0.01
    assert r.max_value <= r.initial_radius


def test_criterion_12_p0_dynamics():
    rng = np.random.default_rng(2)
    for k in (3, 4, 5):
        for a, b in rng.uniform(0.0, 10.0, size=(1000, 2)):
            tr = run_p0(k, a, b, 200)
            assert np.all(np.diff(tr.radii) <= 1e-12)
            assert tr.floats().max() <= tr.initial_radius * (1 + 1e-12)
    phi = field(5)
    tr = run_p0(3, phi.gen(), phi.one(), 100, "exact", field_m=5)
    q = (1 + math.sqrt(5)) / 2
    f = tr.floats()
    assert np.max(np.abs(f * q ** np.arange(f.size) / f[0] - 1)) <= 1e-8
    for k in (3, 4):
        for num, den in exact_endpoints(k, 3):
            assert detect_periodicity(k, num, den).periodic is True


def test_criterion_13_lambda_ge2():
    for lam in (2.0, 2.5, 3.0):
        B = fixed_point_B(lam)
        words, lo, hi = word_intervals(12, lam)
        assert np.all(lo[1:] >= hi[:-1] - 1e-12)
        assert lo[0] == pytest.approx(B, abs=1e-12)
        assert hi[-1] == pytest.approx(lam + 1 / B, abs=1e-12)
        assert gamma(ModelParams.general(lam, 0.5)).gamma < math.log(lam)
    r4 = pstar(ModelParams.hecke(4, 0.5))
    assert r4.pstar > 0.5 and not r4.boundary
    r3 = pstar(ModelParams.hecke(3, 0.5))
    assert r3.pstar == 0.0 and r3.boundary


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
