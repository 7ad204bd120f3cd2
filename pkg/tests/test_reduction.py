import math

import numpy as np
import pytest

from rfl.errors import DomainError
from rfl.reduction import (
    block_decompose,
    enumerate_excursions,
    excursion_mass_partial,
    iter_words,
    reduce_linear,
    reduce_nonlinear,
    survival_trace,
)
from rfl.survival import solve_pr


def test_worked_example():
    assert reduce_linear("RLRLLLRLL", 4).letters == "R"
    assert reduce_nonlinear("RLRLLLRLL", 4).letters == "RLRLL"


@pytest.mark.parametrize("k", [3, 4, 5])
def test_reduced_words_are_reduced(k):
    bad = "R" + "L" * (k - 1)
    for w in iter_words(9):
        assert bad not in reduce_linear(w, k).letters
        assert bad not in reduce_nonlinear(w, k).letters


def test_long_random_words_linear_identity():
    from rfl.core import lambda_of_k, word_matrix

    rng = np.random.default_rng(3)
    for k in (5, 6):
        lam = lambda_of_k(k)
        for _ in range(200):
            w = "".join(rng.choice(["R", "L"], size=30))
            rw = reduce_linear(w, k)
            rhs = rw.sign * word_matrix(rw.letters, lam) @ (np.diag([1, -1]) if rw.pending_flip else np.eye(2))
            lhs = word_matrix(w, lam)
            assert np.allclose(lhs, rhs, rtol=1e-8, atol=1e-8 * np.abs(lhs).max())


@pytest.mark.parametrize("k", [3, 4])
def test_excursions_match_brute_force(k):
    brute = sorted((w for n in range(1, 13) for w in iter_words(n) if reduce_linear(w, k).letters == ""),
                   key=lambda w: (len(w), w))
    assert enumerate_excursions(k, 12) == brute


def test_excursion_counts_are_fuss_catalan():
    words = enumerate_excursions(3, 18)
    counts = [sum(1 for w in words if len(w) == 3 * m) for m in range(1, 7)]
    assert counts == [math.comb(3 * m, m) // (2 * m + 1) for m in range(1, 7)]


def test_excursion_partial_mass_increases():
    masses = [excursion_mass_partial(3, n, 0.5) for n in (3, 6, 9, 12)]
    assert masses == sorted(masses)
    assert masses[0] == 0.125


def test_block_decompose():
    b = block_decompose("LLRLRRLL", 4)
    assert (b.leading_ls, b.blocks, b.partial) == (2, (1, 0, 2), True)
    assert b.letters() == "LLRLRRLL"
    assert block_decompose("LLL", 4).partial is False
    with pytest.raises(DomainError):
        block_decompose("RLLL", 4)


def test_bad_input():
    with pytest.raises(DomainError):
        reduce_linear("RXL", 4)
    with pytest.raises(DomainError):
        reduce_linear("RL", 2)


@pytest.mark.parametrize("k,p,variant", [(3, 0.5, "linear"), (4, 0.4, "linear"), (4, 0.5, "nonlinear"), (5, 0.3, "nonlinear")])
def test_survival_frequency_matches_root(k, p, variant):
    rng = np.random.default_rng(11)
    letters = (rng.random(2_000_000) < p).astype(np.uint8)
    tr = survival_trace(letters, k, linear=variant == "linear")
    assert tr.frequency == pytest.approx(solve_pr(p, k, variant), abs=5e-3)


def test_survival_trace_nonlinear_subcritical():
    rng = np.random.default_rng(12)
    letters = (rng.random(1_000_000) < 0.2).astype(np.uint8)
    assert survival_trace(letters, 4, linear=False).frequency < 0.01


def test_survival_trace_string_input():
    # the linear reduction flips the R that follows a deletion
    lin = survival_trace("RLLRLL", 3)
    assert list(lin.index) == [0] and not lin.alive.any()
    non = survival_trace("RLLRLL", 3, linear=False)
    assert list(non.index) == [0, 3] and not non.alive.any()
