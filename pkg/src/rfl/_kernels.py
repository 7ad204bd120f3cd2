"""Compiled inner loops.

Letters are ``uint8`` arrays with 1 for R (plus sign) and 0 for L (minus).
The trajectory state is ``(u, v, e)`` meaning ``(F_{n-1}, F_n) = 2**e (u, v)``.
Every kernel returns a status code instead of raising: 0 ok, 1 degenerate.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
DEGENERATE = 1


@njit(cache=True, nogil=True)
def _renorm(u, v, e):
    m = max(abs(u), abs(v))
    if m > 2.0 or m < 0.5:
        _, ex = math.frexp(m)
        u = math.ldexp(u, -ex)
        v = math.ldexp(v, -ex)
        e += ex
    return u, v, e


@njit(cache=True, nogil=True)
def advance(letters, u, v, e, lam, nonlinear):
    """Apply every letter; returns ``(u, v, e, status)``."""
    for i in range(letters.shape[0]):
        w = lam * v + u if letters[i] else lam * v - u
        if nonlinear:
            w = abs(w)
        u = v
        v = w
        if u == 0.0 and v == 0.0:
            return u, v, e, DEGENERATE
        u, v, e = _renorm(u, v, e)
    return u, v, e, OK


@njit(cache=True, nogil=True)
def series(letters, u, v, e, lam, nonlinear):
    """Per-step ``log|F_n|`` and ``sign(F_n)`` for the newly produced term."""
    n = letters.shape[0]
    logs = np.empty(n)
    signs = np.empty(n, dtype=np.int8)
    for i in range(n):
        w = lam * v + u if letters[i] else lam * v - u
        if nonlinear:
            w = abs(w)
        u = v
        v = w
        if u == 0.0 and v == 0.0:
            return logs[:i], signs[:i], u, v, e, DEGENERATE
        u, v, e = _renorm(u, v, e)
        if v == 0.0:
            logs[i] = -np.inf
            signs[i] = 0
        else:
            logs[i] = math.log(abs(v)) + e * math.log(2.0)
            signs[i] = 1 if v > 0 else -1
    return logs, signs, u, v, e, OK


@njit(cache=True, nogil=True)
def survival_trace(letters, k, linear):
    """Append index and final status of every appended R."""
    n = letters.shape[0]
    stack = np.empty(n, dtype=np.uint8)
    slot = np.empty(n, dtype=np.int64)  # output slot of an R, -1 for an L
    idx = np.empty(n, dtype=np.int64)
    alive = np.empty(n, dtype=np.bool_)
    top = 0
    nr = 0
    run = 0
    flip = False
    for i in range(n):
        x = letters[i]
        if flip:
            x = 1 - x
            flip = False
        stack[top] = x
        if x == 1:
            slot[top] = nr
            idx[nr] = i
            alive[nr] = True
            nr += 1
            run = 0
        else:
            slot[top] = -1
            run += 1
        top += 1
        if run == k - 1 and top >= k and stack[top - k] == 1:
            alive[slot[top - k]] = False
            top -= k
            flip = linear
            run = 0
            while run < top and stack[top - 1 - run] == 0:
                run += 1
    return idx[:nr].copy(), alive[:nr].copy()


@njit(cache=True, nogil=True)
def signflip(letters, u, v, e, lam, k):
    """Linear trajectory with the linear reduction run alongside.

    Returns per-step sign-change flags of ``(F_n, F_{n+1})``, per-step
    pending-flip state of the reduction, per-step deletion flags, and the
    final trajectory state.
    """
    n = letters.shape[0]
    flips = np.zeros(n, dtype=np.uint8)
    pend = np.zeros(n, dtype=np.uint8)
    dels = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.uint8)
    top = 0
    run = 0
    flip = False
    for i in range(n):
        s = letters[i]
        w = lam * v + u if s else lam * v - u
        u = v
        v = w
        if u == 0.0 and v == 0.0:
            return flips, pend, dels, u, v, e, DEGENERATE
        u, v, e = _renorm(u, v, e)
        if u * v < 0.0:
            flips[i] = 1
        x = s
        if flip:
            x = 1 - x
            flip = False
        stack[top] = x
        top += 1
        run = run + 1 if x == 0 else 0
        if run == k - 1 and top >= k and stack[top - k] == 1:
            top -= k
            flip = True
            dels[i] = 1
            run = 0
            while run < top and stack[top - 1 - run] == 0:
                run += 1
        pend[i] = 1 if flip else 0
    return flips, pend, dels, u, v, e, OK


@njit(cache=True, nogil=True)
def nonlinear_with_reduction(letters, u, v, e, lam, k):
    """Non-linear trajectory with the non-linear reduction alongside.

    Returns per-step values ``F`` (as floats), the final reduced stack and
    the append time (letter index) of each stack entry.
    """
    n = letters.shape[0]
    vals = np.empty(n)
    stack = np.empty(n, dtype=np.uint8)
    times = np.empty(n, dtype=np.int64)
    top = 0
    run = 0
    for i in range(n):
        x = letters[i]
        w = lam * v + u if x else lam * v - u
        w = abs(w)
        u = v
        v = w
        if u == 0.0 and v == 0.0:
            return vals[:i], stack[:top].copy(), times[:top].copy(), DEGENERATE
        u, v, e = _renorm(u, v, e)
        vals[i] = math.ldexp(v, e)
        stack[top] = x
        times[top] = i
        top += 1
        run = run + 1 if x == 0 else 0
        if run == k - 1 and top >= k and stack[top - k] == 1:
            top -= k
            run = 0
            while run < top and stack[top - 1 - run] == 0:
                run += 1
    return vals, stack[:top].copy(), times[:top].copy(), OK
