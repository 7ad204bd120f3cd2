"""Random Fibonacci-type sequences ``F_{n+2} = lam F_{n+1} +- F_n``: growth rates, reductions and dynamics."""

from .core import LINEAR, NONLINEAR, ModelParams, lambda_of_k
from .errors import DegenerateStateError, DomainError, PrecisionError, RegimeError, ResourceError, RflError
from .lyapunov import GammaResult, gamma, integrate_log_nu, mc_gamma, pstar, scan
from .survival import solve_pr, rho_of

__version__ = "0.1.0"

__all__ = [
    "LINEAR",
    "NONLINEAR",
    "DegenerateStateError",
    "DomainError",
    "GammaResult",
    "ModelParams",
    "PrecisionError",
    "RegimeError",
    "ResourceError",
    "RflError",
    "gamma",
    "integrate_log_nu",
    "lambda_of_k",
    "mc_gamma",
    "pstar",
    "rho_of",
    "scan",
    "solve_pr",
]
