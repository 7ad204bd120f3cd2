"""Survival probability of an appended R, the block parameter rho and derived rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LINEAR, NONLINEAR, VARIANTS
from .errors import DomainError

def _check(p: float, k: int, variant: str = LINEAR) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")


def g_linear(x: float, p: float, k: int) -> float:
    """``1 - p x / (p + (1-p) x) - (1-x)**(1/(k-1))``; its positive root is ``p_R``."""
    return 1.0 - p * x / (p + (1.0 - p) * x) - (1.0 - x) ** (1.0 / (k - 1))


def g_nonlinear(x: float, p: float, k: int) -> float:
    """``(1-x)(1 + a x)**(k-1) - 1`` with ``a = p/(1-p)``."""
    a = p / (1.0 - p)
    return (1.0 - x) * (1.0 + a * x) ** (k - 1) - 1.0


def _bisect(f, lo: float, hi: float) -> float:
    """Root of ``f`` bracketed by ``[lo, hi]``, bisected down to adjacent floats."""
    flo = f(lo)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo if abs(flo) <= abs(f(hi)) else hi


def _x_of_delta(delta: float, k: int) -> float:
    """``1 - (1 - delta)**(k-1)`` without cancellation."""
    return -math.expm1((k - 1) * math.log1p(-delta))


def _solve_delta(p: float, k: int, variant: str) -> float:
    """``1 - rho`` at the nontrivial root, for ``0 < p < 1``.

    With ``delta = 1 - rho`` and ``x = 1 - rho**(k-1)`` the survival equations
    become, after clearing denominators,

    * linear:     ``x (p - (1-p) delta) - p delta = 0``
    * non-linear: ``p x - delta (1 - p + p x) = 0``

    Both are positive just right of ``delta = 0`` and negative at ``delta = 1``.
    Unlike the equations in ``x``, these stay well conditioned when
    ``p_R`` is within rounding of 1.
    """
    if variant == LINEAR:
        def f(d):
            return _x_of_delta(d, k) * (p - (1.0 - p) * d) - p * d
    else:
        def f(d):
            x = _x_of_delta(d, k)
            return p * x - d * (1.0 - p + p * x)
    return _bisect(f, 0.0, 1.0)


def _solve(p: float, k: int, variant: str) -> tuple[float, float]:
    """``(p_R, rho)`` with the boundary conventions applied."""
    _check(p, k, variant)
    if p == 1.0:
        return 1.0, 0.0
    if p == 0.0 or (variant == NONLINEAR and p * k <= 1.0):
        return 0.0, 1.0
    delta = _solve_delta(p, k, variant)
    return _x_of_delta(delta, k), 1.0 - delta


def solve_pr(p: float, k: int, variant: str = LINEAR) -> float:
    """Probability that an appended R is never deleted by the reduction.

    Linear: the unique root of :func:`g_linear` in ``(0, 1]`` for ``p > 0``.
    Non-linear: 0 for ``p <= 1/k``, otherwise the nontrivial root of
    :func:`g_nonlinear`.  Both are found by bisection in ``1 - rho``.
    """
    return _solve(p, k, variant)[0]


def rho_from_pr(pr: float, p: float, k: int, variant: str = LINEAR) -> float:
    """rho from a given ``p_R`` by the defining formula of each variant."""
    if variant == LINEAR:
        if p == 0.0:
            return 1.0
        return 1.0 - p * pr / (p + (1.0 - p) * pr)
    return (1.0 - pr) ** (1.0 / (k - 1))


def rho_of(p: float, k: int, variant: str = LINEAR) -> float:
    """Block parameter rho; ``rho**(k-1) = 1 - p_R`` in both variants."""
    return _solve(p, k, variant)[1]


@dataclass(frozen=True)
class SurvivalParams:
    p: float
    k: int
    variant: str
    p_r: float
    rho: float

    @classmethod
    def compute(cls, p: float, k: int, variant: str = LINEAR) -> "SurvivalParams":
        pr, rho = _solve(p, k, variant)
        return cls(float(p), int(k), variant, pr, rho)


def block_distribution(rho: float, k: int) -> np.ndarray:
    """``P(j) = rho**j / Z`` for ``j = 0..k-2`` with ``Z = sum rho**m``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho!r}")
    w = rho ** np.arange(k - 1, dtype=float)
    w[0] = 1.0
    return w / w.sum()


def normalizer(rho: float, k: int) -> float:
    """``Z = 1 + rho + ... + rho**(k-2)``."""
    return float(sum(rho**m for m in range(k - 1)))


def sign_flip_sigma(p: float, k: int) -> float:
    """Asymptotic frequency of ``F_n F_{n+1} < 0`` in the linear case."""
    _check(p, k)
    if p == 0.0:
        # every letter is L and the sequence is periodic with one sign change per k-1 steps
        raise DomainError("sign_flip_sigma needs p > 0")
    pr = solve_pr(p, k, LINEAR)
    return p * (1.0 - pr) / (p + (1.0 - p) * pr + p * (1.0 - pr))


def excursion_mass(p: float, pr: float) -> float:
    """Total probability of all excursions, ``p(1-p_R) / ((1-p) p_R + p)``."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"excursion mass needs 0 < p <= 1, got {p!r}")
    return p * (1.0 - pr) / ((1.0 - p) * pr + p)


__all__ = [
    "LINEAR",
    "NONLINEAR",
    "SurvivalParams",
    "block_distribution",
    "excursion_mass",
    "g_linear",
    "g_nonlinear",
    "normalizer",
    "rho_from_pr",
    "rho_of",
    "sign_flip_sigma",
    "solve_pr",
]
