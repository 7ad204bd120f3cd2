"""Generalized Stern-Brocot intervals for ``lam = 2cos(pi/k)`` and the measure nu.

``f_0(q) = lam + 1/q``, ``f(q) = lam - 1/q`` and ``f_j = f^j o f_0`` is the
homography of ``R L^j``, where a matrix ``[[a, b], [c, d]]`` acts as
``q -> (b + d q)/(a + c q)``.  The interval of a digit path is
``I_(j1..jl) = f_j1 o ... o f_jl([0, inf])``; its matrix is
``G_jl @ ... @ G_j1`` with ``G_j = R L^j``, and appending a digit ``j``
multiplies by ``G_j`` on the left.  Every ``G_j`` with ``j <= k-2`` is
nonnegative, so endpoints are ratios of nonnegative numbers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from ._quadrature import HeckeTails, QuadResult, refine_log_integral
from .core import lambda_of_k, rl_power
from .errors import DomainError, ResourceError

MAX_EXHAUSTIVE_RANK = 8
MAX_EXHAUSTIVE_INTERVALS = 5_000_000
_MATCH_RTOL = 1e-9
_CF_SNAP = 1e-12

INF = math.inf


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return INF
    return num / den + 0.0


@dataclass(frozen=True)
class MoebiusMap:
    """``q -> (b + d q)/(a + c q)`` for the matrix ``[[a, b], [c, d]]``.

    ``(f o g)`` has matrix ``g.matrix @ f.matrix``.
    """

    matrix: tuple[tuple[float, float], tuple[float, float]]

    @classmethod
    def of(cls, m: np.ndarray) -> "MoebiusMap":
        return cls(((float(m[0, 0]), float(m[0, 1])), (float(m[1, 0]), float(m[1, 1]))))

    def __call__(self, q: float) -> float:
        (a, b), (c, d) = self.matrix
        if q == INF:
            return _ratio(d, c)
        return _ratio(b + d * q, a + c * q)

    def compose(self, inner: "MoebiusMap") -> "MoebiusMap":
        """``self o inner``."""
        return MoebiusMap.of(np.array(inner.matrix) @ np.array(self.matrix))


@lru_cache(maxsize=None)
def generators(k: int) -> tuple[np.ndarray, ...]:
    """``R L^j`` for ``j = 0..k-2``."""
    lambda_of_k(k)
    return tuple(rl_power(j, k) for j in range(k - 1))


def apply_f(j: int, q: float, k: int) -> float:
    """``f_j(q)`` for ``0 <= j <= k-1``, with ``q = 0`` and ``q = inf`` allowed."""
    return MoebiusMap.of(rl_power(j, k))(q)


def endpoints_b(k: int) -> list[float]:
    """``b_0 = inf, b_1 = lam, ..., b_{k-1} = 0`` where ``b_j = f_j(0)``; ``I_j = [b_{j+1}, b_j]``."""
    return [apply_f(j, 0.0, k) for j in range(k)]


def _check_path(path: Sequence[int], k: int) -> tuple[int, ...]:
    path = tuple(int(j) for j in path)
    if any(not 0 <= j <= k - 2 for j in path):
        raise DomainError(f"path digits must lie in [0, {k - 2}], got {path}")
    return path


def path_matrix(path: Sequence[int], k: int) -> np.ndarray:
    m = np.eye(2)
    for j in _check_path(path, k):
        m = rl_power(j, k) @ m
    return m


def interval_of_path(path: Sequence[int], k: int) -> tuple[float, float]:
    """Endpoints ``(lo, hi)`` of ``I_path``; the empty path gives ``(0, inf)``."""
    h = MoebiusMap.of(path_matrix(path, k))
    e0, e1 = h(0.0), h(INF)
    return (e0, e1) if e0 <= e1 else (e1, e0)


@dataclass(frozen=True)
class NuMeasure:
    """``nu(I_(j1..jl)) = rho**(j1+...+jl) / Z**l`` with ``Z = sum_{m<k-1} rho**m``."""

    k: int
    rho: float

    def __post_init__(self):
        lambda_of_k(self.k)
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho!r}")

    @property
    def lam(self) -> float:
        return lambda_of_k(self.k)

    @property
    def Z(self) -> float:
        return float(sum(self.rho**m for m in range(self.k - 1)))

    def digit_probs(self) -> np.ndarray:
        w = np.array([self.rho**j for j in range(self.k - 1)], dtype=float)
        w[0] = 1.0
        return w / w.sum()

    def mass(self, path: Sequence[int]) -> float:
        path = _check_path(path, self.k)
        return float(np.prod(self.digit_probs()[list(path)])) if path else 1.0

    @property
    def chain_ratio(self) -> float:
        """Two-step mass ratio ``rho**(k-2) / Z**2`` along the extremal chains."""
        return self.rho ** (self.k - 2) / self.Z**2


def nu_mass(path: Sequence[int], measure: NuMeasure) -> float:
    return measure.mass(path)


@dataclass(frozen=True)
class RankTable:
    """All rank-``l`` intervals sorted from left to right."""

    k: int
    rank: int
    paths: np.ndarray  # (n, rank) digits
    lo: np.ndarray
    hi: np.ndarray
    mass: Optional[np.ndarray]

    def endpoints(self) -> np.ndarray:
        return np.concatenate([self.lo, self.hi[-1:]])


def rank_intervals(k: int, rank: int, measure: Optional[NuMeasure] = None) -> RankTable:
    """Every interval of rank ``rank`` with its nu-mass, ordered by position."""
    if rank < 0:
        raise DomainError("rank must be >= 0")
    count = (k - 1) ** rank
    if rank > MAX_EXHAUSTIVE_RANK or count > MAX_EXHAUSTIVE_INTERVALS:
        raise ResourceError(f"{count} intervals at rank {rank} exceed the exhaustive cap")
    gens = np.array(generators(k))
    paths = np.array(list(itertools.product(range(k - 1), repeat=rank)), dtype=np.int64).reshape(count, rank)
    m = np.broadcast_to(np.eye(2), (count, 2, 2)).copy()
    for col in range(rank):
        m = gens[paths[:, col]] @ m
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    with np.errstate(divide="ignore"):
        e0 = np.where(a == 0.0, INF, b / np.where(a == 0.0, 1.0, a))
        e1 = np.where(c == 0.0, INF, d / np.where(c == 0.0, 1.0, c))
    lo, hi = np.minimum(e0, e1), np.maximum(e0, e1)
    mass = None
    if measure is not None:
        if measure.k != k:
            raise DomainError("measure belongs to a different k")
        probs = measure.digit_probs()
        mass = np.prod(probs[paths], axis=1) if rank else np.ones(1)
    order = np.argsort(lo, kind="stable")
    return RankTable(k, rank, paths[order], lo[order], hi[order], None if mass is None else mass[order])


def _find_endpoint(values: np.ndarray, t: float) -> int:
    """Index of ``t`` in the sorted endpoint array, or -1."""
    i = int(np.searchsorted(values, t))
    for j in (i - 1, i):
        if 0 <= j < values.size and abs(values[j] - t) <= _MATCH_RTOL * max(1.0, abs(t)):
            return j
    return -1


def delta_t(t: float, measure: NuMeasure, rank: Optional[int] = None) -> float:
    """``nu([t, inf)) - nu([0, 1/t])`` for an endpoint ``t`` of some rank-``l`` interval.

    Without ``rank`` the smallest rank ``<= 8`` having ``t`` as an endpoint
    is used.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0.0 or t == INF:
        return 0.0
    ranks = [rank] if rank is not None else range(1, MAX_EXHAUSTIVE_RANK + 1)
    for r in ranks:
        table = rank_intervals(measure.k, r, measure)
        ends = table.endpoints()
        i, i_inv = _find_endpoint(ends, t), _find_endpoint(ends, 1.0 / t)
        if i < 0 or i_inv < 0:
            continue
        # intervals [ends[m], ends[m+1]] carry table.mass[m]
        right = float(table.mass[i:].sum())
        left = float(table.mass[:i_inv].sum())
        return right - left
    raise DomainError(f"{t!r} is not an endpoint at the requested rank")


def delta_all(measure: NuMeasure, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """``(t, Delta_t)`` for every finite nonzero endpoint of the rank-``rank`` intervals.

    The endpoint set is closed under ``t -> 1/t``; an unmatched reciprocal
    raises :class:`DomainError`.
    """
    table = rank_intervals(measure.k, rank, measure)
    ends = table.endpoints()
    right = np.concatenate([np.cumsum(table.mass[::-1])[::-1], [0.0]])
    left = np.concatenate([[0.0], np.cumsum(table.mass)])
    inner = np.flatnonzero((ends > 0.0) & np.isfinite(ends))
    t = ends[inner]
    inv = 1.0 / t
    j = np.clip(np.searchsorted(ends, inv), 1, ends.size - 1)
    j = np.where(np.abs(ends[j - 1] - inv) < np.abs(ends[j] - inv), j - 1, j)
    if np.any(np.abs(ends[j] - inv) > _MATCH_RTOL * np.maximum(1.0, inv)):
        raise DomainError("endpoint set is not closed under t -> 1/t")
    return t, right[inner] - left[j]


@dataclass(frozen=True)
class RosenCF:
    """``[a0, a1, ..., an]_lam = a0 lam + 1/(a1 lam + 1/(... + 1/(an lam)))``.

    The empty expansion stands for infinity.
    """

    coeffs: tuple[int, ...]
    k: int

    @property
    def a0(self) -> int:
        return self.coeffs[0]

    @property
    def tail(self) -> tuple[int, ...]:
        return self.coeffs[1:]

    def value(self) -> float:
        lam = lambda_of_k(self.k)
        num, den = 1.0, 0.0  # infinity
        for a in reversed(self.coeffs):
            num, den = a * lam * num + den, num
        # endpoints at 0 or infinity cancel only up to rounding
        scale = math.hypot(num, den)
        if abs(den) <= _CF_SNAP * scale:
            return INF
        if abs(num) <= _CF_SNAP * scale:
            return 0.0
        return _ratio(num, den)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.coeffs) + "]"


def _alternating(n: int) -> tuple[int, ...]:
    return tuple(1 if i % 2 == 0 else -1 for i in range(n))


def _b_cf(j: int, k: int) -> tuple[int, ...]:
    """Short expansion of ``b_j``: ``j`` alternating terms (``b_0`` is the empty one)."""
    return _alternating(j)


def _apply_f_cf(j: int, tail: tuple[int, ...]) -> tuple[int, ...]:
    """Expansion of ``f_j(x)`` from that of ``x``: prepend ``j+1`` alternating terms, negate the tail if ``j`` is odd."""
    if j % 2:
        tail = tuple(-a for a in tail)
    return _alternating(j + 1) + tail


def endpoint_rosen_cf(path: Sequence[int], k: int, end: str = "lo") -> RosenCF:
    """Finite ``+-1`` Rosen expansion of an endpoint of ``I_path``.

    ``path`` of length 1 gives ``b_j``/``b_{j+1}``.  The value 0 uses the
    ``k-1`` term expansion of ``b_{k-1}``, infinity the expansion of
    ``f_0(0)``.
    """
    path = _check_path(path, k)
    if not path:
        raise DomainError("the empty path has endpoints 0 and inf; use b_rosen_cf")
    if end not in ("lo", "hi"):
        raise DomainError("end must be 'lo' or 'hi'")
    # f_path is decreasing for odd length, so f_path(0) is then the upper end
    from_zero = (end == "hi") == (len(path) % 2 == 1)
    inner = path[-1]
    # f_j(0) = b_j and f_j(inf) = b_{j+1}
    cf = _b_cf(inner if from_zero else inner + 1, k)
    for j in reversed(path[:-1]):
        cf = _apply_f_cf(j, cf)
    return _finalize(cf, k)


def b_rosen_cf(j: int, k: int) -> RosenCF:
    """Expansion of ``b_j``: ``[1, -1, ...]`` with ``j`` terms; ``b_0 = f_0(b_{k-1})``."""
    if not 0 <= j <= k - 1:
        raise DomainError(f"j must lie in [0, {k - 1}]")
    return _finalize(_b_cf(j, k), k)


def _finalize(cf: tuple[int, ...], k: int) -> RosenCF:
    if not cf:
        cf = _apply_f_cf(0, _b_cf(k - 1, k))
    return RosenCF(cf, k)


def sample_nu(measure: NuMeasure, depth: int, rng: np.random.Generator, size: Optional[int] = None):
    """Points approximately distributed as nu.

    Draws ``depth`` digits from the block law and returns the midpoint of the
    resulting interval (the image of 1 when it is unbounded).
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    n = 1 if size is None else int(size)
    gens = np.array(generators(measure.k))
    digits = rng.choice(measure.k - 1, size=(n, depth), p=measure.digit_probs())
    m = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    for col in range(depth):
        m = gens[digits[:, col]] @ m
        # keep entries bounded; only ratios matter
        s = np.abs(m).max(axis=(1, 2), keepdims=True)
        m /= s
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        e0 = b / a
        e1 = d / c
        mid = 0.5 * (e0 + e1)
        at1 = (b + d) / (a + c)
    out = np.where(np.isfinite(mid), mid, at1)
    return float(out[0]) if size is None else out


def integrate_log_nu_raw(k: int, rho: float, tol: float, max_leaves: Optional[int] = None) -> QuadResult:
    """``int log x dnu_{k,rho}`` with a guaranteed error bound."""
    measure = NuMeasure(k, rho)
    kwargs = {} if max_leaves is None else {"max_leaves": max_leaves}
    return refine_log_integral(
        generators(k),
        measure.digit_probs(),
        tol,
        shift=0.0,
        tails=HeckeTails(measure.lam, measure.chain_ratio),
        **kwargs,
    )
