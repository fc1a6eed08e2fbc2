"""K-sparse minimization of Huber's criterion by iterative hard thresholding.

The measurement matrix may be underdetermined (more columns than rows).
Each iteration updates the scale exactly as the dense solver does, then takes
a step along the correlation direction X' r_psi and keeps the K
largest-magnitude coefficients. Columns are normalized to unit length by
default; fitted coefficients are mapped back to the original column scales.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hubreg import StepState, _criterion_of_residuals, _fallback_scale, mad_scale, scale_step_size, regression_step_size
from .linalg import as_matrix, as_vector


@dataclass(frozen=True)
class SparseProblem:
    """Measurements y, dictionary X (possibly underdetermined) and sparsity budget K."""

    y: np.ndarray
    X: np.ndarray
    K: int
    normalize_columns: bool = True

    def __post_init__(self):
        X = as_matrix(self.X)
        y = as_vector(self.y, length=X.shape[0])
        n, p = X.shape
        if not 1 <= self.K <= min(n, p):
            raise ValueError(f"K must satisfy 1 <= K <= min(N, p) = {min(n, p)}, got {self.K}")
        if self.normalize_columns and np.any(np.linalg.norm(X, axis=0) == 0):
            raise ValueError("cannot normalize a dictionary with a zero column")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n_obs(self):
        return self.X.shape[0]

    @property
    def n_atoms(self):
        return self.X.shape[1]


@dataclass
class SparseModel:
    """K-sparse coefficients with explicit support, plus the scale estimate."""

    beta: np.ndarray
    support: tuple[int, ...]
    sigma: float
    iterations: int
    converged: bool
    perfect_fit: bool = False


def hard_threshold(beta, k):
    """Keep the k largest-magnitude entries, zero the rest.

    Ties are broken by keeping the smallest index; vectors with at most k
    nonzeros pass through unchanged.
    """
    b = np.asarray(beta, dtype=float)
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    out = np.zeros_like(b)
    if k == 0:
        return out
    order = np.argsort(-np.abs(b), kind="stable")
    keep = order[:k]
    out[keep] = b[keep]
    return out


def _support_of(beta):
    return tuple(int(i) for i in np.flatnonzero(beta))


def fit_sparse(prob, cfg):
    """Greedy hard-thresholding minimization of Huber's criterion.

    Follows the scale/step-size machinery of the dense solver: scale factor
    and its adaptive exponent, then a step along X' r_psi followed by hard
    thresholding. The step length comes from one reweighted least-squares
    move on the support-restricted direction (the normalized-IHT step); both
    scale and coefficient steps fall back to the unit step whenever the
    adaptive candidate would increase the criterion. Stops once the support
    is stable and the relative coefficient change drops below ``cfg.tol``.
    """
    kernel = cfg.kernel
    y = prob.y
    if prob.normalize_columns:
        col_norms = np.linalg.norm(prob.X, axis=0)
        X = prob.X / col_norms
    else:
        col_norms = np.ones(prob.n_atoms)
        X = prob.X
    n = prob.n_obs
    floor = cfg.resolve_sigma_floor(y)

    beta = np.zeros(prob.n_atoms)
    r = y.copy()  # residual carried across iterations
    sigma = max(mad_scale(y), floor)
    steps = StepState()
    c = kernel.c
    sqrt_2na = math.sqrt(2.0 * n * kernel.alpha)
    support = _support_of(beta)
    converged = False
    perfect_fit = False
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        p = np.clip(r / sigma, -c, c)
        norm_psi = math.sqrt(float(np.dot(p, p)))
        if norm_psi == 0.0:
            sigma = floor
            converged = True
            perfect_fit = True
            iterations -= 1
            break
        tau = norm_psi / sqrt_2na
        crit_now = _criterion_of_residuals(kernel, r, sigma)

        lam = scale_step_size(kernel, r / sigma, tau, steps.scale_step)
        sigma_cand = sigma * tau**lam
        crit_at_sigma = None
        if math.isfinite(sigma_cand) and sigma_cand > 0:
            crit_cand = _criterion_of_residuals(kernel, r, sigma_cand)
            if crit_cand <= crit_now:
                sigma_next = sigma_cand
                crit_at_sigma = crit_cand
        if crit_at_sigma is None:
            lam = 1.0
            sigma_next = sigma * tau
            crit_at_sigma = _criterion_of_residuals(kernel, r, sigma_next)
        if sigma_next < floor:
            sigma_next = floor
            crit_at_sigma = _criterion_of_residuals(kernel, r, sigma_next)

        r_psi = np.clip(r / sigma_next, -c, c) * sigma_next
        delta = X.T @ r_psi
        # Step length is measured on the support-restricted direction (the
        # normalized-IHT step); the coefficient update below keeps the full
        # direction. On the first pass the support is empty: use the full one.
        if support:
            restricted = np.zeros_like(delta)
            idx = list(support)
            restricted[idx] = delta[idx]
        else:
            restricted = delta
        z = X @ restricted
        mu = regression_step_size(kernel, r, z, sigma_next, steps.regression_step)
        beta_next = hard_threshold(beta + mu * delta, prob.K)
        r_next = y - X @ beta_next
        if not (
            math.isfinite(mu)
            and _criterion_of_residuals(kernel, r_next, sigma_next) <= crit_at_sigma
        ):
            mu = 1.0
            beta_unit = hard_threshold(beta + delta, prob.K)
            r_unit = y - X @ beta_unit
            if _criterion_of_residuals(kernel, r_unit, sigma_next) <= crit_at_sigma:
                beta_next, r_next = beta_unit, r_unit
            else:
                beta_next, r_next = beta, r  # no admissible move this round

        change = float(np.linalg.norm(beta_next - beta))
        base = float(np.linalg.norm(beta))
        support_next = _support_of(beta_next)
        stable = support_next == support

        beta, r = beta_next, r_next
        sigma = sigma_next
        support = support_next
        steps = StepState(regression_step=mu, scale_step=lam)

        if stable and change / max(base, cfg.tol) < cfg.tol:
            converged = True
            break

    return SparseModel(
        beta=beta / col_norms,
        support=support,
        sigma=sigma,
        iterations=iterations,
        converged=converged,
        perfect_fit=perfect_fit,
    )


def reconstruct(prob, model):
    """Fitted measurement vector X beta-hat in the original column scales."""
    beta = as_vector(model.beta, length=prob.n_atoms)
    return prob.X @ beta
