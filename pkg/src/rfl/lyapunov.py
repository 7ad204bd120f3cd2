"""Growth rates: quadrature of the invariant measures, Monte Carlo, thresholds and scans.

Rates are in nats per step; the growth factor of ``|F_n|`` is ``exp(gamma)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import LINEAR, NONLINEAR, ModelParams, fixed_point_f0, lambda_of_k
from .errors import DegenerateStateError, DomainError, RegimeError
from .lambda_ge2 import fixed_point_B, integrate_log_mu
from .stern_brocot import integrate_log_nu_raw
from .survival import SurvivalParams, sign_flip_sigma

DEFAULT_TOL = 1e-5
DEFAULT_STEPS = 1_000_000
DEFAULT_TRIALS = 16
BURN_IN = 1_000
_CHUNK = 1 << 20
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class GammaResult:
    """A growth rate with its error: a rigorous bound for quadrature, a standard error for MC."""

    gamma: float
    method: str
    error: float
    params: Optional[ModelParams] = None
    rho: Optional[float] = None
    p_r: Optional[float] = None
    seed: Optional[int] = None
    detail: dict = field(default_factory=dict, compare=False)


def integrate_log_nu(k: int, rho: float, tol: float = DEFAULT_TOL) -> GammaResult:
    """``int_0^inf log x dnu_{k,rho}(x)`` with a guaranteed error bound ``<= tol``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho!r}")
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    q = integrate_log_nu_raw(int(k), float(rho), float(tol))
    return GammaResult(q.value, "quadrature", q.error, rho=rho, detail={"leaves": q.leaves})


def _check_regime(params: ModelParams) -> None:
    if params.is_hecke:
        if params.variant == NONLINEAR and params.p * params.k <= 1.0:
            raise RegimeError(
                f"non-linear requires p > 1/k (got p={params.p}, k={params.k}); "
                "for p <= 1/k the sequence has a bounded subsequence of density 1-kp"
            )
        if params.variant == LINEAR and params.p <= 0.0:
            raise RegimeError("linear requires p > 0; at p = 0 the sequence is periodic")
    elif params.p <= 0.0:
        raise RegimeError("the lam >= 2 formula requires p > 0")


def gamma(params: ModelParams, tol: float = DEFAULT_TOL) -> GammaResult:
    """Almost-sure growth rate from the explicit invariant measure.

    Hecke case: ``p_R`` and rho from the survival equations, then the
    log-integral of nu.  ``lam >= 2``: the log-integral of mu (both variants
    agree there, since absolute values are eventually inactive).
    """
    _check_regime(params)
    if params.is_hecke:
        sp = SurvivalParams.compute(params.p, params.k, params.variant)
        res = integrate_log_nu(params.k, sp.rho, tol)
        return GammaResult(res.gamma, "quadrature", res.error, params, sp.rho, sp.p_r, detail=res.detail)
    q = integrate_log_mu(params.p, params.lam, tol)
    return GammaResult(q.value, "quadrature", q.error, params, detail={"leaves": q.leaves})


def closed_form_p1(lam: float) -> float:
    """Growth rate at ``p = 1``: ``log((lam + sqrt(lam^2 + 4))/2)``."""
    return math.log(fixed_point_f0(lam))


def thread_count(jobs: int) -> int:
    cap = os.environ.get("RFL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise DomainError(f"RFL_THREADS must be an integer, got {cap!r}") from exc
    return max(1, min(n, jobs))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial; depends only on ``(seed, trial)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def letters_chunk(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """``n`` i.i.d. letters, 1 (plus sign) with probability ``p``."""
    return (rng.random(n) < p).astype(np.uint8)


def _one_trial(params: ModelParams, steps: int, seed: int, trial: int, burn_in: int) -> float:
    rng = trial_rng(seed, trial)
    lam, nonlinear = params.lam, params.variant == NONLINEAR
    u, v, e = 1.0, 1.0, 0
    u, v, e, st = _kernels.advance(letters_chunk(rng, burn_in, params.p), u, v, e, lam, nonlinear)
    if st:
        raise DegenerateStateError(f"trial {trial} reached (0, 0)")
    start = e * _LN2 + math.log(max(abs(u), abs(v)))
    left = steps
    while left:
        n = min(left, _CHUNK)
        u, v, e, st = _kernels.advance(letters_chunk(rng, n, params.p), u, v, e, lam, nonlinear)
        if st:
            raise DegenerateStateError(f"trial {trial} reached (0, 0)")
        left -= n
    end = e * _LN2 + math.log(max(abs(u), abs(v)))
    return (end - start) / steps


def mc_gamma(
    params: ModelParams,
    steps: int = DEFAULT_STEPS,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    burn_in: int = BURN_IN,
) -> GammaResult:
    """Monte Carlo growth rate: mean over independent trajectories started at ``(1, 1)``.

    Each trial discards ``burn_in`` steps, then averages the log-growth of
    ``max(|F_{n-1}|, |F_n|)`` over ``steps`` steps.  Trials use streams derived
    from ``(seed, trial)`` and run on up to ``RFL_THREADS`` threads; the
    result does not depend on the thread count.
    """
    if steps < 10_000:
        raise DomainError(f"steps must be >= 10^4, got {steps}")
    if trials < 2:
        raise DomainError(f"trials must be >= 2, got {trials}")
    if seed < 0 or seed >= 1 << 64:
        raise DomainError("seed must be an unsigned 64-bit integer")
    with ThreadPoolExecutor(max_workers=thread_count(trials)) as pool:
        rates = list(pool.map(lambda i: _one_trial(params, steps, seed, i, burn_in), range(trials)))
    rates = np.array(rates)
    mean = float(rates.mean())
    se = float(rates.std(ddof=1) / math.sqrt(trials))
    rho = p_r = None
    if params.is_hecke and (params.variant == LINEAR or params.p * params.k > 1.0):
        sp = SurvivalParams.compute(params.p, params.k, params.variant)
        rho, p_r = sp.rho, sp.p_r
    return GammaResult(mean, "montecarlo", se, params, rho, p_r, seed, detail={"trials": rates.tolist()})


@dataclass(frozen=True)
class PStarResult:
    pstar: float
    boundary: bool
    bracket: tuple[float, float]
    log_lambda: float


def pstar(regime: ModelParams, tol_p: float = 1e-3, tol: float = 1e-6) -> PStarResult:
    """Threshold where ``gamma_{p,lam}`` crosses ``log lam`` (linear variant).

    ``gamma`` is increasing in ``p``.  For ``k = 3`` (``lam = 1``) the rate
    is positive for every ``p > 0`` while ``log lam = 0``, so the boundary
    ``p* = 0`` is returned with ``boundary=True``.
    """
    lam = regime.lam
    target = math.log(lam)

    def above(p: float) -> bool:
        r = gamma(regime.with_p(p), tol)
        return r.gamma - target > 0.0

    if regime.is_hecke and regime.k == 3:
        return PStarResult(0.0, True, (0.0, 0.0), target)
    lo, hi = 0.0, 1.0
    # at p = 0 the rate is log B <= log lam (lam >= 2) or 0 < log lam (Hecke, k >= 4)
    if not closed_form_p1(lam) > target:
        return PStarResult(1.0, True, (1.0, 1.0), target)
    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return PStarResult(0.5 * (lo + hi), False, (lo, hi), target)


def hecke_k_of(lam: float, rtol: float = 1e-12) -> Optional[int]:
    """``k`` with ``2cos(pi/k) = lam`` if there is one."""
    if not 1.0 <= lam < 2.0:
        return None
    k = round(math.pi / math.acos(lam / 2.0))
    if k >= 3 and abs(lambda_of_k(k) - lam) <= rtol * lam:
        return k
    return None


def params_for_lambda(lam: float, p: float, variant: str = LINEAR) -> ModelParams:
    """Hecke parameters when ``lam = 2cos(pi/k)``, general ones when ``lam >= 2``."""
    k = hecke_k_of(lam)
    if k is not None:
        return ModelParams.hecke(k, p, variant)
    if lam >= 2.0:
        return ModelParams.general(lam, p, variant)
    raise RegimeError(
        f"lam={lam!r} is neither 2cos(pi/k) nor >= 2; the measure method does not cover it"
    )


def embree_trefethen_sigma(beta: float, tol: float = DEFAULT_TOL) -> float:
    """Growth factor ``exp(gamma_{1/2,lam} - log lam)`` of ``F_{n+2} = F_{n+1} +- sqrt(beta) F_n``.

    Rescaling by ``lam = 1/sqrt(beta)`` maps it onto the ``lam`` recurrence.
    """
    if not beta > 0.0:
        raise DomainError("beta must be positive")
    lam = 1.0 / math.sqrt(beta)
    g = gamma(params_for_lambda(lam, 0.5), tol)
    return math.exp(g.gamma - math.log(lam))


@dataclass(frozen=True)
class SignFlipResult:
    frequency: float
    std_error: float
    steps: int
    deletion_frequency: Optional[float] = None
    mismatches: Optional[int] = None


def signflip_empirical(
    k: Optional[int], p: float, steps: int = DEFAULT_STEPS, seed: int = 0, lam: Optional[float] = None,
    burn_in: int = BURN_IN, batches: int = 100,
) -> SignFlipResult:
    """Fraction of ``n`` with ``F_n F_{n+1} < 0`` on one linear trajectory.

    In the Hecke case the linear reduction runs alongside: the pair has
    opposite signs exactly while the reduction holds an unconsumed
    ``R L^(k-1)``, and ``mismatches`` counts the steps where the two
    disagree.  ``std_error`` comes from batch means.
    """
    if (k is None) == (lam is None):
        raise DomainError("give exactly one of k and lam")
    params = ModelParams.hecke(k, p) if k is not None else ModelParams.general(lam, p)
    rng = trial_rng(seed, 0)
    letters = letters_chunk(rng, burn_in + steps, p)
    flips, pend, dels, *_, st = _kernels.signflip(letters, 1.0, 1.0, 0, params.lam, k if k is not None else 3)
    if st:
        raise DegenerateStateError("trajectory reached (0, 0)")
    f = flips[burn_in:].astype(float)
    nb = max(2, min(batches, steps))
    means = np.array([b.mean() for b in np.array_split(f, nb)])
    se = float(means.std(ddof=1) / math.sqrt(nb))
    if k is None:
        return SignFlipResult(float(f.mean()), se, steps)
    mism = int(np.count_nonzero(flips[burn_in:] != pend[burn_in:]))
    return SignFlipResult(float(f.mean()), se, steps, float(dels[burn_in:].mean()), mism)


@dataclass(frozen=True)
class ScanRow:
    regime: str
    param: float
    p: float
    variant: str
    gamma: float
    error: float


def scan(
    k_list: Iterable[int] = (),
    lambda_list: Iterable[float] = (),
    p_grid: Sequence[float] = (),
    tol: float = DEFAULT_TOL,
    variants: Sequence[str] = (LINEAR, NONLINEAR),
) -> list[ScanRow]:
    """Growth rate over a parameter grid, both variants where defined.

    Points outside a variant's regime are skipped.  Rows are ordered by
    regime, parameter, variant and ``p``.  Monotonicity in ``lam`` is only
    reported, never asserted.
    """
    rows: list[ScanRow] = []
    grid = sorted(set(float(p) for p in p_grid))
    for k in k_list:
        for variant in variants:
            for p in grid:
                params = ModelParams.hecke(k, p, variant)
                try:
                    r = gamma(params, tol)
                except RegimeError:
                    continue
                rows.append(ScanRow("hecke", float(k), p, variant, r.gamma, r.error))
    for lam in lambda_list:
        for variant in variants:
            for p in grid:
                params = ModelParams.general(lam, p, variant)
                try:
                    r = gamma(params, tol)
                except RegimeError:
                    continue
                rows.append(ScanRow("general", float(lam), p, variant, r.gamma, r.error))
    return rows


def sigma_asymptotic(p: float, k: int) -> float:
    """Large-``k`` equivalent ``p (1-p)^(k-1)`` of the sign-flip frequency."""
    return p * (1.0 - p) ** (k - 1)


__all__ = [
    "GammaResult",
    "PStarResult",
    "ScanRow",
    "SignFlipResult",
    "closed_form_p1",
    "embree_trefethen_sigma",
    "fixed_point_B",
    "gamma",
    "integrate_log_nu",
    "mc_gamma",
    "params_for_lambda",
    "pstar",
    "scan",
    "sign_flip_sigma",
    "sigma_asymptotic",
    "signflip_empirical",
]
