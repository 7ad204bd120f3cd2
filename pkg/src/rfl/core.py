"""Parameters, 2x2 letter matrices and the renormalized trajectory state.

Conventions
-----------
A pair ``(F_{n-1}, F_n)`` is a row vector and every step is a *right*
multiplication by a letter matrix::

    R  = [[0, 1], [1,  lam]]     (+ sign)
    L  = [[0,-1], [1,  lam]]     (- sign)
    L' = [[0, 1], [1, -lam]]     (- sign under an absolute value)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DegenerateStateError, DomainError

LINEAR = "linear"
NONLINEAR = "nonlinear"
VARIANTS = (LINEAR, NONLINEAR)

LN2 = math.log(2.0)

# entries of RL^j that vanish in exact arithmetic come out of the sine
# formula as ~1e-16; anything this small is snapped to an exact zero
_SNAP = 1e-12


def lambda_of_k(k: int) -> float:
    """Return the Hecke value ``2 cos(pi/k)``."""
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")
    if k == 3:
        return 1.0
    return 2.0 * math.cos(math.pi / k)


def fixed_point_f0(lam: float) -> float:
    """Fixed point of ``q -> lam + 1/q``; ``log`` of it is the p = 1 growth rate."""
    return 0.5 * (lam + math.sqrt(lam * lam + 4.0))


@dataclass(frozen=True)
class ModelParams:
    """Regime (Hecke ``k`` or general ``lam >= 2``), sign probability and variant.

    Build with :meth:`hecke` or :meth:`general`; exactly one of ``k`` and
    ``lam_general`` is set.
    """

    p: float
    variant: str = LINEAR
    k: Optional[int] = None
    lam_general: Optional[float] = None

    def __post_init__(self):
        if (self.k is None) == (self.lam_general is None):
            raise DomainError("exactly one of k and lam must be given")
        if self.k is not None:
            lambda_of_k(self.k)
        elif not self.lam_general >= 2.0:
            raise DomainError(f"general regime needs lam >= 2, got {self.lam_general!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @classmethod
    def hecke(cls, k: int, p: float, variant: str = LINEAR) -> "ModelParams":
        return cls(p=float(p), variant=variant, k=int(k))

    @classmethod
    def general(cls, lam: float, p: float, variant: str = LINEAR) -> "ModelParams":
        return cls(p=float(p), variant=variant, lam_general=float(lam))

    @property
    def is_hecke(self) -> bool:
        return self.k is not None

    @property
    def lam(self) -> float:
        if self.k is not None:
            return lambda_of_k(self.k)
        return self.lam_general

    @property
    def regime(self) -> str:
        return "hecke" if self.is_hecke else "general"

    def with_p(self, p: float) -> "ModelParams":
        return replace(self, p=float(p))


def letter_matrix(letter: str, lam: float) -> np.ndarray:
    """Matrix of ``R``, ``L`` or ``Lprime`` (also accepted: ``L'``)."""
    if letter == "R":
        return np.array([[0.0, 1.0], [1.0, lam]])
    if letter == "L":
        return np.array([[0.0, -1.0], [1.0, lam]])
    if letter in ("Lprime", "L'"):
        return np.array([[0.0, 1.0], [1.0, -lam]])
    raise DomainError(f"unknown letter {letter!r}")


def word_matrix(word: str, lam: float) -> np.ndarray:
    """Left-to-right product of the letter matrices of ``word``."""
    m = np.eye(2)
    for ch in word:
        m = m @ letter_matrix(ch, lam)
    return m


def _sine_ratio(m: int, k: int) -> float:
    v = math.sin(m * math.pi / k) / math.sin(math.pi / k)
    return 0.0 if abs(v) < _SNAP else v


def rl_power(j: int, k: int) -> np.ndarray:
    """``R L^j`` from the closed sine form; entries are ``sin(m pi/k)/sin(pi/k)``.

    For ``0 <= j <= k-2`` every entry is nonnegative; ``j = k-1`` gives
    ``diag(1, -1)``.
    """
    if not 0 <= j <= k - 1:
        raise DomainError(f"j must lie in [0, {k - 1}], got {j}")
    s = [_sine_ratio(j + i, k) for i in range(3)]
    return np.array([[s[0], s[1]], [s[1], s[2]]])


@dataclass(frozen=True)
class ScaledPair:
    """``(F_{n-1}, F_n) = 2**exponent * (u, v)`` with ``max(|u|, |v|)`` in [1/2, 2].

    The scale is kept as an integer power of two, so renormalizing is exact
    and ``log_scale`` never drifts.
    """

    u: float
    v: float
    exponent: int = 0
    steps: int = 0

    @classmethod
    def from_values(cls, a: float, b: float) -> "ScaledPair":
        return _normalize(float(a), float(b), 0, 0)

    @property
    def log_scale(self) -> float:
        return self.exponent * LN2

    def log_abs_max(self) -> float:
        """``log max(|F_{n-1}|, |F_n|)``."""
        return self.log_scale + math.log(max(abs(self.u), abs(self.v)))

    def log_abs_last(self) -> float:
        return self.log_scale + math.log(abs(self.v)) if self.v else -math.inf

    def values(self) -> tuple[float, float]:
        return math.ldexp(self.u, self.exponent), math.ldexp(self.v, self.exponent)


def _normalize(u: float, v: float, exponent: int, steps: int) -> ScaledPair:
    m = max(abs(u), abs(v))
    if m == 0.0:
        raise DegenerateStateError("both components of the pair are zero")
    if not 0.5 <= m <= 2.0:
        _, e = math.frexp(m)
        u, v = math.ldexp(u, -e), math.ldexp(v, -e)
        exponent += e
    return ScaledPair(u, v, exponent, steps)


def scaled_step(state: ScaledPair, sign: str, params: ModelParams) -> ScaledPair:
    """One step ``F_{n+2} = lam F_{n+1} +- F_n`` (absolute value if nonlinear)."""
    if state.u == 0.0 and state.v == 0.0:
        raise DegenerateStateError("both components of the pair are zero")
    if sign in ("plus", "+", "R"):
        w = params.lam * state.v + state.u
    elif sign in ("minus", "-", "L"):
        w = params.lam * state.v - state.u
    else:
        raise DomainError(f"sign must be plus or minus, got {sign!r}")
    if params.variant == NONLINEAR:
        w = abs(w)
    return _normalize(state.v, w, state.exponent, state.steps + 1)
