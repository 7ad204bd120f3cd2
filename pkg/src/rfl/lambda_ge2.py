"""The regime ``lam >= 2``: word intervals ``I_W`` and the measure mu.

``f_R(q) = lam + 1/q`` and ``f_L(q) = lam - 1/q``; ``B = (lam + sqrt(lam^2-4))/2``
is the largest fixed point of ``f_L``.  With ``I_R = f_R([B, inf])`` and
``I_L = f_L([B, inf])``, ``I_{XR} = f_R(I_X)`` and ``I_{XL} = f_L(I_X)``.

Internally intervals live in the shifted coordinate ``y = x - B``, where both
maps have nonnegative matrices of determinant ``+-1``::

    f_L: y -> y / (B^2 + B y)          [[B, 0], [1, 1/B]]
    f_R: y -> (2B + y) / (B^2 + B y)   [[B, 2], [1, 1/B]]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quadrature import QuadResult, refine_log_integral
from .errors import DomainError, RegimeError

INF = math.inf
BURN_IN_CAP = 100_000


def fixed_point_B(lam: float) -> float:
    """Largest root of ``x^2 - lam x + 1``."""
    if not lam >= 2.0:
        raise DomainError(f"lam must be >= 2, got {lam!r}")
    return 0.5 * (lam + math.sqrt(lam * lam - 4.0))


def f_R(q: float, lam: float) -> float:
    return lam if q == INF else lam + 1.0 / q


def f_L(q: float, lam: float) -> float:
    return lam if q == INF else lam - 1.0 / q


def _check_word(word: str) -> str:
    if not isinstance(word, str) or word.strip("RL"):
        raise DomainError(f"word must be a string over {{R, L}}, got {word!r}")
    return word


def shifted_generators(lam: float) -> dict[str, np.ndarray]:
    B = fixed_point_B(lam)
    return {
        "R": np.array([[B, 2.0], [1.0, 1.0 / B]]),
        "L": np.array([[B, 0.0], [1.0, 1.0 / B]]),
    }


def word_matrix_shifted(word: str, lam: float) -> np.ndarray:
    gens = shifted_generators(lam)
    m = np.eye(2)
    for ch in _check_word(word):
        m = m @ gens[ch]
    return m


def interval_of_word(word: str, lam: float) -> tuple[float, float]:
    """``I_W`` as ``(lo, hi)``; the empty word gives ``(B, inf)``."""
    B = fixed_point_B(lam)
    (a, b), (c, d) = word_matrix_shifted(word, lam)
    y0 = INF if a == 0.0 else b / a
    y1 = INF if c == 0.0 else d / c
    return B + min(y0, y1), B + max(y0, y1)


def interval_of_word_direct(word: str, lam: float) -> tuple[float, float]:
    """Same as :func:`interval_of_word` by iterating ``f_R``/``f_L`` on the endpoints."""
    lo, hi = fixed_point_B(lam), INF
    for ch in _check_word(word):
        f = f_R if ch == "R" else f_L
        a, b = f(lo, lam), f(hi, lam)
        lo, hi = min(a, b), max(a, b)
    return lo, hi


@dataclass(frozen=True)
class MuMeasure:
    """``mu(I_W) = p**|W|_R (1-p)**|W|_L``, supported in ``[B, lam + 1/B]``."""

    p: float
    lam: float

    def __post_init__(self):
        fixed_point_B(self.lam)
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")

    @property
    def B(self) -> float:
        return fixed_point_B(self.lam)

    @property
    def support(self) -> tuple[float, float]:
        return self.B, self.lam + 1.0 / self.B

    def mass(self, word: str) -> float:
        r = _check_word(word).count("R")
        return self.p**r * (1.0 - self.p) ** (len(word) - r)


def mu_mass(word: str, measure: MuMeasure) -> float:
    return measure.mass(word)


def word_intervals(n: int, lam: float) -> tuple[list[str], np.ndarray, np.ndarray]:
    """All ``2**n`` words of length ``n`` with their intervals, sorted by position."""
    B = fixed_point_B(lam)
    gens = shifted_generators(lam)
    words = [""]
    mats = np.eye(2)[None]
    for _ in range(n):
        # prepend a letter: M_{XW} = M_X @ M_W
        words = [x + w for x in "RL" for w in words]
        mats = np.concatenate([gens["R"] @ mats, gens["L"] @ mats])
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    y0, y1 = b / a, d / c
    lo, hi = B + np.minimum(y0, y1), B + np.maximum(y0, y1)
    order = np.argsort(lo, kind="stable")
    return [words[i] for i in order], lo[order], hi[order]


def integrate_log_mu(p: float, lam: float, tol: float = 1e-5, max_leaves: Optional[int] = None) -> QuadResult:
    """``int log x dmu_{p,lam}`` with a guaranteed error bound ``<= tol``.

    Leaves near ``B`` at ``lam = 2`` shrink only like ``1/j`` along L-runs;
    the refinement keeps splitting them until their share of the bound is
    small, which the geometric mass decay makes finite.
    """
    if not 0.0 < p <= 1.0:
        raise RegimeError(f"the lam >= 2 formula needs 0 < p <= 1, got p={p!r}")
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    gens = shifted_generators(lam)
    kwargs = {} if max_leaves is None else {"max_leaves": max_leaves}
    return refine_log_integral(
        [gens["R"], gens["L"]], [p, 1.0 - p], tol, shift=fixed_point_B(lam), **kwargs
    )


def quotient_chain(p: float, lam: float, steps: int, rng: np.random.Generator, q0: float = 1.0) -> np.ndarray:
    """``Q_{n+1} = lam +- 1/Q_n`` (linear signs), starting at ``q0``."""
    signs = rng.random(steps) < p
    q = np.empty(steps + 1)
    q[0] = q0
    for i in range(steps):
        q[i + 1] = lam + (1.0 / q[i] if signs[i] else -1.0 / q[i])
    return q


def burn_in_time(q: np.ndarray, lam: float, cap: int = BURN_IN_CAP) -> int:
    """First index with ``Q_n >= B``; fails loudly after ``cap`` steps."""
    B = fixed_point_B(lam)
    hit = np.flatnonzero(q[: cap + 1] >= B)
    if hit.size == 0:
        raise RegimeError(f"quotient chain did not reach B={B} within {cap} steps")
    return int(hit[0])
