"""Trajectory phenomena of the absolute-value recurrence.

At ``p = 0`` the map is deterministic: ``F_{n+1} = |lam F_n - F_{n-1}|``.
With ``lam = 2cos(theta)`` each pair ``(F_{n-1}, F_n)`` is the pair of
abscissae of two points on a circle at angle ``theta`` apart; the radius
never increases, which bounds the sequence.  A zero occurs exactly when
``F_0/F_1`` has a finite Rosen expansion, after which the sequence is
periodic with period ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .core import lambda_of_k
from .errors import DegenerateStateError, DomainError, RegimeError
from .lyapunov import letters_chunk, trial_rng
from .numberfield import FieldElem, field, parse_field_elem

DEFAULT_HORIZON = 10_000
NUMERIC_ZERO = 1e-12

Number = Union[float, FieldElem]


def circle_radius(prev: float, curr: float, k: int) -> float:
    """Radius ``R`` with ``R cos t = prev`` and ``R cos(t + pi/k) = curr``."""
    if prev == 0.0 and curr == 0.0:
        raise DomainError("circle radius needs (prev, curr) != (0, 0)")
    theta = math.pi / k
    return math.hypot(prev, (prev * math.cos(theta) - curr) / math.sin(theta))


def _as_field(x, fld) -> FieldElem:
    if isinstance(x, FieldElem):
        if x.field is not fld:
            raise DomainError("inputs belong to different fields")
        return x
    if isinstance(x, str):
        return parse_field_elem(x, fld)
    return fld.element([x])


@dataclass(frozen=True)
class P0Trajectory:
    """``values[n] = F_n`` for ``n = 0..steps+1``.

    ``zero_index`` is the first ``n >= 2`` with ``F_n = 0`` (exact mode) or
    ``|F_n| < 1e-12 R_1`` (numeric mode).  ``radii[n]`` is the circle radius
    of ``(F_n, F_{n+1})``; ``radii[0]`` is ``R_1``.
    """

    k: int
    mode: str
    values: list
    radii: np.ndarray
    zero_index: Optional[int]

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @property
    def initial_radius(self) -> float:
        return float(self.radii[0])


def run_p0(
    k: int,
    f0: Union[Number, str],
    f1: Union[Number, str],
    steps: int,
    mode: str = "numeric",
    field_m: Optional[int] = None,
) -> P0Trajectory:
    """Iterate ``F_{n+1} = |lam F_n - F_{n-1}|`` from ``(F_0, F_1) = (f0, f1)``.

    ``mode="exact"`` runs in ``Q(2cos(pi/m))`` with ``m = field_m`` (default
    ``k``); ``lam_k`` must lie in that field.  String inputs use the grammar
    of :func:`rfl.numberfield.parse_field_elem`.
    """
    lambda_of_k(k)
    if mode not in ("exact", "numeric"):
        raise DomainError(f"mode must be 'exact' or 'numeric', got {mode!r}")
    if steps < 0:
        raise DomainError("steps must be >= 0")
    if mode == "exact":
        fld = field(field_m if field_m is not None else k)
        a, b = _as_field(f0, fld), _as_field(f1, fld)
        if a.sign() < 0 or b.sign() < 0:
            raise DomainError("initial values must be nonnegative")
        if a.is_zero() and b.is_zero():
            raise DomainError("initial values must not both be zero")
        lam = fld.lambda_k(k)
        values = [a, b]
        zero = None
        for n in range(2, steps + 2):
            a, b = b, abs(lam * b - a)
            values.append(b)
            if zero is None and b.is_zero():
                zero = n
        fl = [v.embed() for v in values]
    else:
        a, b = float(f0), float(f1)
        if a < 0 or b < 0:
            raise DomainError("initial values must be nonnegative")
        if a == 0.0 and b == 0.0:
            raise DomainError("initial values must not both be zero")
        lam = lambda_of_k(k)
        values = [a, b]
        for _ in range(steps):
            a, b = b, abs(lam * b - a)
            values.append(b)
        fl = values
        r1 = circle_radius(fl[0], fl[1], k)
        zero = next((n for n in range(2, len(fl)) if abs(fl[n]) < NUMERIC_ZERO * r1), None)
    radii = np.array([circle_radius(fl[n], fl[n + 1], k) if (fl[n] or fl[n + 1]) else 0.0 for n in range(len(fl) - 1)])
    return P0Trajectory(k, mode, values, radii, zero)


@dataclass(frozen=True)
class Periodicity:
    """``periodic`` is True when a zero was found, None when the horizon ran out."""

    periodic: Optional[bool]
    zero_index: Optional[int]
    period: Optional[int]
    horizon: int

    @property
    def status(self) -> str:
        return "periodic" if self.periodic else "undecided"


def detect_periodicity(
    k: int, f0: Union[FieldElem, str], f1: Union[FieldElem, str], horizon: int = DEFAULT_HORIZON,
    field_m: Optional[int] = None,
) -> Periodicity:
    """Search exactly for ``F_n = 0``; on success measure the period that follows.

    A zero at ``n`` gives the pair ``(x, 0)``, whose orbit returns to
    ``(x, 0)`` after ``k`` steps.  The period is read off the exact
    trajectory and must divide ``k``.  If no zero appears within
    ``horizon`` steps the answer is undecided, never negative.
    """
    fld = field(field_m if field_m is not None else k)
    a, b = _as_field(f0, fld), _as_field(f1, fld)
    if a.sign() < 0 or b.sign() < 0:
        raise DomainError("initial values must be nonnegative")
    if a.is_zero() and b.is_zero():
        raise DomainError("initial values must not both be zero")
    lam = fld.lambda_k(k)
    zero = 1 if b.is_zero() else None
    n = 1
    while zero is None and n < horizon:
        a, b = b, abs(lam * b - a)
        n += 1
        if b.is_zero():
            zero = n
    if zero is None:
        return Periodicity(None, None, None, horizon)
    start = (a, b)
    period = None
    for m in range(1, 2 * k + 1):
        a, b = b, abs(lam * b - a)
        if (a, b) == start:
            period = m
            break
    if period is None or k % period:
        raise AssertionError(f"orbit after the zero has period {period}, which does not divide k={k}")
    return Periodicity(True, zero, period, horizon)


@dataclass(frozen=True)
class SubseqReport:
    """Values of the non-linear sequence at the append times of the surviving L's.

    ``indices`` are times ``n`` (``F_n`` is produced by the ``(n-2)``-th
    letter); ``density`` is ``j/n_j`` at the last collected index.
    """

    indices: np.ndarray
    values: np.ndarray
    max_value: float
    density: float
    initial_radius: float
    steps: int


def bounded_subsequence(
    k: int, p: float, steps: int, seed: int = 0, f1: float = 1.0, f2: float = 1.0
) -> SubseqReport:
    """Run the absolute-value recurrence for ``0 <= p <= 1/k`` with the non-linear reduction alongside.

    The L's that end up in the leading run of the reduced word are never
    deleted; at their append times the sequence follows the ``p = 0`` map,
    so its values stay below the radius of the initial circle.
    """
    lam = lambda_of_k(k)
    if not 0.0 <= p <= 1.0 / k:
        raise RegimeError(f"bounded subsequence needs 0 <= p <= 1/k, got p={p} for k={k}")
    if f1 < 0 or f2 < 0 or (f1 == 0 and f2 == 0):
        raise DomainError("initial values must be nonnegative and not both zero")
    letters = letters_chunk(trial_rng(seed, 0), steps, p)
    vals, stack, times, st = _kernels.nonlinear_with_reduction(letters, float(f1), float(f2), 0, lam, k)
    if st:
        raise DegenerateStateError("trajectory reached (0, 0)")
    first_r = np.flatnonzero(stack == 1)
    s = int(first_r[0]) if first_r.size else stack.size
    t = times[:s]
    indices = t + 3
    values = vals[t]
    density = s / (int(t[-1]) + 1) if s else 0.0
    return SubseqReport(
        indices, values, float(values.max()) if s else 0.0, density, circle_radius(f1, f2, k), steps
    )


def exact_endpoints(k: int, max_rank: int, field_m: Optional[int] = None) -> list[tuple[FieldElem, FieldElem]]:
    """Endpoints ``f_{j_1} o ... o f_{j_l}(0 or inf)`` for ``l <= max_rank`` as exact pairs ``(num, den)``.

    Each ratio ``num/den`` lies in ``[0, inf]`` and both entries are
    nonnegative, so a pair can seed the ``p = 0`` map as ``(F_0, F_1)``.
    Pairs are deduplicated by value and sorted by position.
    """
    fld = field(field_m if field_m is not None else k)
    lam = fld.lambda_k(k)
    zero, one = fld.zero(), fld.one()

    def f0(n, d):
        return lam * n + d, n

    def f(n, d):
        return lam * n - d, n

    def normalized(n, d):
        if n.sign() < 0 or (n.is_zero() and d.sign() < 0):
            n, d = -n, -d
        return n, d

    level = [(zero, one), (one, zero)]
    found = list(level)
    for _ in range(max_rank):
        nxt = []
        for n, d in level:
            n, d = f0(n, d)
            nxt.append(normalized(n, d))
            for _ in range(k - 2):
                n, d = f(n, d)
                nxt.append(normalized(n, d))
        level = nxt
        found.extend(nxt)
    unique: dict = {}
    for n, d in found:
        if d.is_zero():
            key = (one, zero)
        else:
            key = (n / d, one)
        unique.setdefault(key, (n, d))
    return sorted(unique.values(), key=lambda nd: math.inf if nd[1].is_zero() else (nd[0] / nd[1]).embed())


def fixed_point_ratios(k: int) -> tuple[float, float]:
    """Positive fixed points ``q`` of ``f_0`` and ``q'`` of ``f_1 = f o f_0``."""
    lam = lambda_of_k(k)
    q = 0.5 * (lam + math.sqrt(lam * lam + 4.0))
    # f_1(x) = lam - x/(lam x + 1) = x  <=>  lam x^2 + (2 - lam^2) x - lam = 0
    qp = ((lam * lam - 2.0) + math.sqrt((2.0 - lam * lam) ** 2 + 4.0 * lam * lam)) / (2.0 * lam)
    return q, qp


def sample_starts(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random nonnegative starting pairs, not both zero."""
    return rng.uniform(0.0, 10.0, size=(n, 2)) + np.array([0.0, 1e-3])


def radii_along(values: Sequence[float], k: int) -> np.ndarray:
    return np.array([circle_radius(values[i], values[i + 1], k) for i in range(len(values) - 1)])
