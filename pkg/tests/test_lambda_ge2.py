import math

import numpy as np
import pytest

from rfl.errors import DomainError, RegimeError
from rfl.lambda_ge2 import (
    MuMeasure,
    burn_in_time,
    fixed_point_B,
    integrate_log_mu,
    interval_of_word,
    interval_of_word_direct,
    quotient_chain,
    word_intervals,
)
from rfl.reduction import iter_words

LAMS = (2.0, 2.5, 3.0)


@pytest.mark.parametrize("lam", LAMS)
def test_B_is_fixed_point(lam):
    B = fixed_point_B(lam)
    assert B == pytest.approx(lam - 1 / B, rel=1e-15)


@pytest.mark.parametrize("lam", LAMS)
def test_shifted_matrices_match_direct_iteration(lam):
    for n in range(1, 9):
        for w in iter_words(n):
            assert np.allclose(interval_of_word(w, lam), interval_of_word_direct(w, lam), rtol=1e-10)


@pytest.mark.parametrize("lam", LAMS)
def test_word_intervals_structure(lam):
    B = fixed_point_B(lam)
    mu = MuMeasure(0.37, lam)
    for n in (1, 4, 9):
        words, lo, hi = word_intervals(n, lam)
        assert np.all(lo[1:] >= hi[:-1] - 1e-12)
        assert lo[0] == pytest.approx(B) and hi[-1] == pytest.approx(lam + 1 / B)
        assert sum(mu.mass(w) for w in words) == pytest.approx(1.0)
        for w, a, b in zip(words[:64], lo, hi):
            pa, pb = interval_of_word(w[1:], lam)
            assert pa - 1e-12 <= a and b <= pb + 1e-12


def test_support_has_gaps():
    _, lo, hi = word_intervals(2, 2.0)
    gaps = lo[1:] - hi[:-1]
    assert gaps.max() == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_p_one_closed_form(lam):
    r = integrate_log_mu(1.0, lam, 1e-9)
    assert abs(r.value - math.log((lam + math.sqrt(lam * lam + 4)) / 2)) <= r.error


@pytest.mark.parametrize("lam,p", [(2.0, 0.5), (2.5, 0.3), (3.0, 0.8)])
def test_quadrature_against_quotient_chain(lam, p):
    q = quotient_chain(p, lam, 400_000, np.random.default_rng(8))
    t0 = burn_in_time(q, lam)
    logs = np.log(q[t0 + 1000:])
    batches = np.array([b.mean() for b in np.array_split(logs, 100)])
    se = batches.std(ddof=1) / 10
    r = integrate_log_mu(p, lam, 1e-5)
    assert abs(batches.mean() - r.value) < 4 * se + r.error


def test_chain_stays_above_B_after_burn_in():
    lam = 2.5
    q = quotient_chain(0.5, lam, 10_000, np.random.default_rng(9), q0=0.1)
    t0 = burn_in_time(q, lam)
    assert np.all(q[t0:] >= fixed_point_B(lam) - 1e-12)


def test_errors():
    with pytest.raises(DomainError):
        fixed_point_B(1.9)
    with pytest.raises(RegimeError):
        integrate_log_mu(0.0, 2.5)
    with pytest.raises(DomainError):
        interval_of_word("RQ", 2.5)
    with pytest.raises(DomainError):
        MuMeasure(1.5, 2.5)
