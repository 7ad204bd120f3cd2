"""Greedy refinement of a log-integral over a tree of homography intervals.

Each leaf is the image of ``y in [0, inf]`` under ``y -> (b + d y)/(a + c y)``
for a nonnegative matrix ``[[a, b], [c, d]]`` of determinant ``+-1``, carried
with its mass.  The integrand is ``log(shift + y)``.  A leaf's child for
generator ``G`` has matrix ``G @ M`` and mass ``weight(G) * mass``.

On a bounded leaf ``[lo, hi]`` the integral lies in
``mass * [log lo, log hi]``; the estimate is the center of that range and
the error its half-width.  Leaves reaching 0 or infinity (only in the
Hecke tree) use the tail bounds of :class:`HeckeTails`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ResourceError

DEFAULT_MAX_LEAVES = 4_000_000
_SPLIT_FRACTION = 0.5
_ENTRY_LIMIT = 1e250


@dataclass(frozen=True)
class HeckeTails:
    """Bounds for ``int log x`` over the extremal intervals ``[m lam, inf]`` and ``[0, 1/(m lam)]``.

    For the right one with mass ``M``,
    ``int log x = M log(m lam) + int_{m lam}^inf nu([t, inf)) dt/t``.
    On the shell ``[(m+i) lam, (m+i+1) lam)`` the tail mass is at most
    ``M_i``, the mass of the rank-``(m+i)`` extremal interval, and
    ``M_{i+2} = q M_i`` with ``q = rho**(k-2)/Z**2 <= 1/4``.  Hence the
    excess is at most ``M lam (1/L + 1/(L+lam)) / (1-q)`` with ``L = m lam``.
    The left tail is the mirror image under ``x -> 1/x``.
    """

    lam: float
    q: float

    def excess(self, big: np.ndarray) -> np.ndarray:
        return self.lam * (1.0 / big + 1.0 / (big + self.lam)) / (1.0 - self.q)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    leaves: int
    rounds: int


def _evaluate(a, b, c, d, mass, shift, tails):
    est = np.empty_like(mass)
    err = np.empty_like(mass)
    inf_end = (a == 0.0) | (c == 0.0)
    zero_end = ((b == 0.0) | (d == 0.0)) if tails is not None else np.zeros_like(inf_end)
    inner = ~(inf_end | zero_end)

    ai, bi, ci, di = a[inner], b[inner], c[inner], d[inner]
    lo = shift + np.minimum(bi / ai, di / ci)
    logw = np.log1p(1.0 / (ai * ci * lo))
    est[inner] = mass[inner] * (np.log(lo) + 0.5 * logw)
    err[inner] = 0.5 * mass[inner] * logw

    if tails is not None:
        r = inf_end
        if r.any():
            big = np.where(c[r] == 0.0, b[r] / np.where(a[r] == 0.0, 1.0, a[r]), d[r] / np.where(c[r] == 0.0, 1.0, c[r]))
            ex = tails.excess(big)
            est[r] = mass[r] * (np.log(big) + 0.5 * ex)
            err[r] = 0.5 * mass[r] * ex
        z = zero_end & ~inf_end
        if z.any():
            small = np.where(b[z] == 0.0, d[z] / c[z], b[z] / a[z])
            ex = tails.excess(1.0 / small)
            est[z] = mass[z] * (np.log(small) - 0.5 * ex)
            err[z] = 0.5 * mass[z] * ex
    return est, err


def refine_log_integral(
    generators: Sequence[np.ndarray],
    weights: Sequence[float],
    tol: float,
    shift: float = 0.0,
    tails: Optional[HeckeTails] = None,
    max_leaves: int = DEFAULT_MAX_LEAVES,
) -> QuadResult:
    """Integrate ``log(shift + y)`` to a guaranteed absolute error ``tol``.

    The tree starts at the children of ``[0, inf]``.  Each round splits the
    leaves with the largest error bounds until they cover half the total.
    """
    gens = np.asarray(generators, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = w > 0.0
    gens, w = gens[keep], w[keep]

    a, b, c, d = (gens[:, 0, 0].copy(), gens[:, 0, 1].copy(), gens[:, 1, 0].copy(), gens[:, 1, 1].copy())
    mass = w.copy()
    rounds = 0
    while True:
        est, err = _evaluate(a, b, c, d, mass, shift, tails)
        total_err = float(err.sum())
        # rounding in the summation itself
        slack = 4.0 * np.finfo(float).eps * float(np.abs(est).sum())
        if total_err + slack <= tol or a.size == 0:
            value = float(est.sum())
            return QuadResult(value, total_err + slack, int(a.size), rounds)

        order = np.argsort(-err, kind="stable")
        cum = np.cumsum(err[order])
        n_split = int(np.searchsorted(cum, _SPLIT_FRACTION * cum[-1])) + 1
        pick = order[:n_split]
        if a.size + n_split * (len(w) - 1) > max_leaves:
            raise ResourceError(
                f"refinement needs more than {max_leaves} leaves; achieved error bound {total_err:.3e}",
                achieved=total_err,
            )
        rest = np.ones(a.size, dtype=bool)
        rest[pick] = False

        pa, pb, pc, pd, pm = a[pick], b[pick], c[pick], d[pick], mass[pick]
        na = (gens[:, 0, 0, None] * pa + gens[:, 0, 1, None] * pc).ravel()
        nb = (gens[:, 0, 0, None] * pb + gens[:, 0, 1, None] * pd).ravel()
        nc = (gens[:, 1, 0, None] * pa + gens[:, 1, 1, None] * pc).ravel()
        nd = (gens[:, 1, 0, None] * pb + gens[:, 1, 1, None] * pd).ravel()
        nm = (w[:, None] * pm).ravel()
        live = nm > 0.0
        if not np.all(np.isfinite(nm)) or max(na.max(initial=0), nb.max(initial=0), nc.max(initial=0), nd.max(initial=0)) > _ENTRY_LIMIT:
            raise ResourceError("interval matrices left the binary64 range", achieved=total_err)
        if not live.all():
            # a zero-mass leaf contributes nothing and needs no error budget
            na, nb, nc, nd, nm = na[live], nb[live], nc[live], nd[live], nm[live]

        a = np.concatenate([a[rest], na])
        b = np.concatenate([b[rest], nb])
        c = np.concatenate([c[rest], nc])
        d = np.concatenate([d[rest], nd])
        mass = np.concatenate([mass[rest], nm])
        rounds += 1

