"""Joint robust estimation of regression and scale via block-wise majorization.

The solver minimizes the jointly convex criterion

    L(beta, sigma) = N * alpha * sigma + sigma * sum_i rho_c((y_i - x_i' beta) / sigma)

by alternating a multiplicative scale update with a regression update along the
pseudoinverse direction. Both blocks carry data-adaptive step sizes (a one-step
fixed-point move in log-scale for the scale block, a one-step reweighted
least-squares move for the regression block); a fallback to the plain unit
step keeps the criterion non-increasing at every iteration.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, as_vector, factorize, weighted_inner, weighted_norm_sq
from .loss import HuberKernel


class DegenerateScaleError(RuntimeError):
    """All winsorized residuals vanish: the scale update collapses to zero."""


MAD_NORMAL_FACTOR = 1.4826  # makes the MAD consistent for the normal scale


def mad_scale(values):
    """Normal-consistent median-absolute-deviation scale of a sample."""
    v = np.asarray(values, dtype=float)
    return MAD_NORMAL_FACTOR * float(np.median(np.abs(v - np.median(v))))


def _fallback_scale(y):
    """Strictly positive reference scale of y for the sigma floor."""
    s = mad_scale(y)
    if s > 0:
        return s
    amax = float(np.max(np.abs(y))) if y.size else 0.0
    return amax if amax > 0 else 1.0


@dataclass(frozen=True)
class RegressionProblem:
    """Response vector and tall design matrix, immutable during a solve.

    With ``intercept=True`` a leading all-ones column is prepended to the
    stored design; coefficient vectors then carry the intercept first and all
    dimensions refer to the total column count.
    """

    y: np.ndarray
    X: np.ndarray
    intercept: bool = False
    design: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = as_matrix(self.X)
        y = as_vector(self.y, length=X.shape[0])
        design = np.column_stack([np.ones(X.shape[0]), X]) if self.intercept else X
        if design.shape[0] <= design.shape[1]:
            raise ValueError(
                f"need more observations than coefficients, got {design.shape}"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "design", design)

    @property
    def n_obs(self):
        return self.design.shape[0]

    @property
    def n_coef(self):
        return self.design.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs shared by the dense and sparse fitters.

    ``sigma_floor=None`` resolves at fit time to 1e-12 times a robust scale
    of y. ``record_trace`` stores per-iteration diagnostics on the result.
    """

    kernel: HuberKernel
    tol: float = 1e-6
    max_iter: int = 500
    adaptive_steps: bool = True
    sigma_floor: float | None = None
    record_trace: bool = False

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.sigma_floor is not None and not (self.sigma_floor > 0):
            raise ValueError(f"sigma_floor must be positive, got {self.sigma_floor}")

    def resolve_sigma_floor(self, y):
        return self.sigma_floor if self.sigma_floor is not None else 1e-12 * _fallback_scale(y)


@dataclass(frozen=True)
class TraceRecord:
    """Per-iteration diagnostics: criterion value, applied scale change, relative step."""

    criterion: float
    scale_change: float
    relative_step: float


@dataclass
class FitResult:
    beta: np.ndarray
    sigma: float
    iterations: int
    converged: bool
    perfect_fit: bool = False
    trace: list[TraceRecord] | None = None


@dataclass
class StepState:
    """Adaptive step sizes carried across iterations (warm starts)."""

    regression_step: float = 0.0
    scale_step: float = 1.0


def _criterion_of_residuals(kernel, r, sigma):
    # rho(x) = psi(x) * (2x - psi(x)) / 2 on both branches; cheaper than np.where
    x = r / sigma
    p = np.clip(x, -kernel.c, kernel.c)
    rho_sum = 0.5 * float(np.dot(p, 2.0 * x - p))
    return r.shape[0] * kernel.alpha * sigma + sigma * rho_sum


def criterion(prob, kernel, beta, sigma):
    """Value of Huber's joint criterion at (beta, sigma)."""
    if not (sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = prob.y - prob.design @ np.asarray(beta, dtype=float)
    return _criterion_of_residuals(kernel, r, sigma)


def pseudo_residual(prob, kernel, beta, sigma):
    """Winsorized residual mapped back to data scale: sigma * psi((y - X beta)/sigma)."""
    if not (sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = prob.y - prob.design @ np.asarray(beta, dtype=float)
    return kernel.psi(r / sigma) * sigma


def scale_multiplier(prob, kernel, beta, sigma):
    """Multiplicative scale update factor ||psi(r/sigma)|| / sqrt(2 N alpha).

    Equals 1 exactly at a stationary point of the criterion.
    """
    if not (sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = prob.y - prob.design @ np.asarray(beta, dtype=float)
    norm = float(np.linalg.norm(kernel.psi(r / sigma)))
    if norm == 0.0:
        raise DegenerateScaleError("all residuals are zero; scale update collapses")
    return norm / math.sqrt(2.0 * prob.n_obs * kernel.alpha)


def regression_direction(prob, pinv, kernel, beta, sigma):
    """Update direction: pseudoinverse applied to the pseudo-residual."""
    return pinv.apply(pseudo_residual(prob, kernel, beta, sigma))


def scale_step_size(kernel, std_residuals, tau, lam_prev):
    """One fixed-point move toward the optimal exponent on the scale factor tau.

    Takes the standardized residuals r/sigma from before the scale update.
    Returns 1 when tau is at its fixed point (the update is then a no-op).
    """
    std_residuals = np.asarray(std_residuals, dtype=float)
    log_tau = math.log(tau)
    if abs(log_tau) < 1e-12:
        return 1.0
    n = std_residuals.shape[0]
    p = np.clip(std_residuals / tau**lam_prev, -kernel.c, kernel.c)
    norm = math.sqrt(float(np.dot(p, p)) / (2.0 * kernel.alpha * n))
    if norm == 0.0:
        return 1.0
    return lam_prev + math.log(norm) / log_tau


def regression_step_size(kernel, residual, z, sigma, mu_prev):
    """One reweighted-least-squares move for the step length along direction z.

    Weights come from the previous step length; returns the weighted
    projection <r, z>_w / ||z||_w^2, or 0 when the weighted norm vanishes.
    """
    residual = np.asarray(residual, dtype=float)
    z = np.asarray(z, dtype=float)
    w = kernel.weight((residual - mu_prev * z) / sigma)
    zw = z * w
    denom = float(np.dot(zw, z))
    if denom == 0.0:
        return 0.0
    return float(np.dot(zw, residual)) / denom


def fit(prob, cfg, init=None):
    """Minimize Huber's joint criterion by block-wise MM with adaptive steps.

    Parameters
    ----------
    prob : RegressionProblem
    cfg : SolverConfig
    init : optional (beta0, sigma0)
        Starting point. Defaults to the least-squares coefficients and the
        MAD scale of their residuals.

    Returns
    -------
    FitResult
        Estimates, iteration count and convergence flag. A perfect fit
        (all residuals zero) clamps sigma to the floor and reports
        ``perfect_fit=True``.
    """
    kernel = cfg.kernel
    y = prob.y
    X = prob.design
    n = prob.n_obs
    pinv = factorize(X)
    floor = cfg.resolve_sigma_floor(y)

    if init is None:
        beta = pinv.apply(y)
        sigma = max(mad_scale(y - X @ beta), floor)
    else:
        beta0, sigma0 = init
        beta = as_vector(beta0, length=prob.n_coef).copy()
        sigma = float(sigma0)
        if not (sigma > 0):
            raise ValueError(f"initial sigma must be positive, got {sigma}")
        sigma = max(sigma, floor)

    steps = StepState()
    trace = [] if cfg.record_trace else None
    sqrt_2na = math.sqrt(2.0 * n * kernel.alpha)
    converged = False
    perfect_fit = False
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        r = y - X @ beta
        std = r / sigma
        norm_psi = float(np.linalg.norm(kernel.psi(std)))
        if norm_psi == 0.0:
            sigma = floor
            converged = True
            perfect_fit = True
            iterations -= 1
            break
        tau = norm_psi / sqrt_2na
        crit_now = _criterion_of_residuals(kernel, r, sigma)

        # Scale block: adaptive exponent with unit-step fallback.
        if cfg.adaptive_steps:
            lam = scale_step_size(kernel, std, tau, steps.scale_step)
            sigma_cand = sigma * tau**lam
            ok = (
                math.isfinite(sigma_cand)
                and sigma_cand > 0
                and _criterion_of_residuals(kernel, r, sigma_cand) <= crit_now
            )
            if not ok:
                lam = 1.0
        else:
            lam = 1.0
        sigma_next = max(sigma * tau**lam, floor)

        # Regression block: pseudoinverse direction, IRWLS step with fallback.
        delta = pinv.apply(kernel.psi(r / sigma_next) * sigma_next)
        z = X @ delta
        if cfg.adaptive_steps:
            mu = regression_step_size(kernel, r, z, sigma_next, steps.regression_step)
            crit_at_sigma = _criterion_of_residuals(kernel, r, sigma_next)
            ok = (
                math.isfinite(mu)
                and _criterion_of_residuals(kernel, r - mu * z, sigma_next) <= crit_at_sigma
            )
            if not ok:
                mu = 1.0
        else:
            mu = 1.0

        step = mu * delta
        base_norm = float(np.linalg.norm(beta))
        beta = beta + step
        scale_change = sigma_next / sigma
        sigma = sigma_next
        steps = StepState(regression_step=mu, scale_step=lam)

        step_norm = float(np.linalg.norm(step))
        rel_step = step_norm / base_norm if base_norm > 0 else step_norm
        if trace is not None:
            trace.append(
                TraceRecord(
                    criterion=_criterion_of_residuals(kernel, r - mu * z, sigma),
                    scale_change=scale_change,
                    relative_step=rel_step,
                )
            )
        if rel_step < cfg.tol and abs(scale_change - 1.0) < cfg.tol:
            converged = True
            break

    return FitResult(
        beta=beta,
        sigma=sigma,
        iterations=iterations,
        converged=converged,
        perfect_fit=perfect_fit,
        trace=trace,
    )


def surrogate_scale(prob, kernel, anchor_beta, anchor_sigma, sigma):
    """Scale-block majorizer g2(sigma | anchor); diagnostic for verification.

    Dominates the criterion in sigma for fixed anchor_beta and touches it at
    sigma = anchor_sigma.
    """
    r = prob.y - prob.design @ np.asarray(anchor_beta, dtype=float)
    anchor_value = _criterion_of_residuals(kernel, r, anchor_sigma)
    chi_sum = float(np.sum(kernel.chi(r / anchor_sigma)))
    return (
        anchor_value
        + prob.n_obs * kernel.alpha * (sigma - anchor_sigma)
        + chi_sum * (anchor_sigma**2 / sigma - anchor_sigma)
    )


def surrogate_regression(prob, kernel, anchor_beta, anchor_sigma, beta):
    """Regression-block majorizer g1(beta | anchor); diagnostic for verification.

    Dominates the criterion in beta for fixed anchor_sigma and touches it at
    beta = anchor_beta.
    """
    anchor_beta = np.asarray(anchor_beta, dtype=float)
    r_anchor = prob.y - prob.design @ anchor_beta
    anchor_value = _criterion_of_residuals(kernel, r_anchor, anchor_sigma)
    r_psi = kernel.psi(r_anchor / anchor_sigma) * anchor_sigma
    r = prob.y - prob.design @ np.asarray(beta, dtype=float)
    gain = np.sum(
        (r_psi - r_anchor) * (r - r_anchor) + 0.5 * (r * r - r_anchor * r_anchor)
    )
    return anchor_value + float(gain) / anchor_sigma
