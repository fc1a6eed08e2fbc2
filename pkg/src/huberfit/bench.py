"""Seeded Monte-Carlo comparison of least squares and the robust solver.

Each trial draws a Gaussian design and coefficient vector, scales the noise
to a target SNR, then flips the sign of each response independently with the
contamination probability. Trials are reproducible: the stream for trial t of
contamination index e is PCG64 seeded with the sequence
(master_seed, e, t) via numpy's default generator, drawing the design, the
coefficients, the noise and the flip mask in that order.
"""

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .hubreg import RegressionProblem, SolverConfig, fit, mad_scale
from .linalg import factorize
from .loss import HuberKernel

CSV_HEADER = "eps,lse_beta_nmse,hub_beta_nmse,sd_scale_err,hub_scale_err,trials,failures"

DEFAULT_EPS_GRID = tuple(round(0.01 * i, 2) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    """Dimensions, contamination grid and seeding of the benchmark run."""

    n_obs: int = 500
    n_coef: int = 250
    snr_db: float = 20.0
    c: float = 1.345
    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    trials: int = 200
    master_seed: int = 42

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.n_obs <= self.n_coef:
            raise ValueError(f"need n_obs > n_coef, got {self.n_obs} <= {self.n_coef}")
        if any(not 0.0 <= e <= 1.0 for e in self.eps_grid):
            raise ValueError(f"eps grid values must be probabilities: {self.eps_grid}")
        if not self.eps_grid:
            raise ValueError("eps grid must be nonempty")


@dataclass(frozen=True)
class TrialOutcome:
    """Error metrics of one trial: coefficient NMSE and squared log10 scale error."""

    eps: float
    trial: int
    lse_beta_nmse: float
    hub_beta_nmse: float
    sd_scale_err: float
    hub_scale_err: float


@dataclass(frozen=True)
class EpsSummary:
    """Trial-averaged metrics for one contamination level."""

    eps: float
    lse_beta_nmse: float
    hub_beta_nmse: float
    sd_scale_err: float
    hub_scale_err: float
    trials: int
    failures: int


def generate_trial(cfg, eps, trial_seed):
    """One synthetic problem: Gaussian design/coefficients, SNR-calibrated noise, sign flips.

    The noise scale is set so that ||X beta||^2 / (N sigma^2) equals the
    configured SNR; each final response then has its sign flipped
    independently with probability eps.
    """
    rng = np.random.default_rng(trial_seed)
    X = rng.standard_normal((cfg.n_obs, cfg.n_coef))
    beta = rng.standard_normal(cfg.n_coef)
    signal = X @ beta
    sigma = float(np.linalg.norm(signal)) / math.sqrt(cfg.n_obs * 10.0 ** (cfg.snr_db / 10.0))
    y = signal + sigma * rng.standard_normal(cfg.n_obs)
    flips = rng.random(cfg.n_obs) < eps
    y = np.where(flips, -y, y)
    return RegressionProblem(y=y, X=X), beta, sigma


def run_trial(cfg, eps, trial_seed):
    """Fit both estimators on one generated trial and return its metrics."""
    prob, beta_true, sigma_true = generate_trial(cfg, eps, trial_seed)
    beta_norm_sq = float(beta_true @ beta_true)

    pinv = factorize(prob.design)
    beta_lse = pinv.apply(prob.y)
    resid = prob.y - prob.design @ beta_lse
    sigma_sd = float(np.linalg.norm(resid)) / math.sqrt(cfg.n_obs)

    solver = SolverConfig(kernel=HuberKernel(cfg.c))
    hub = fit(prob, solver, init=(beta_lse, max(mad_scale(resid), 1e-12)))

    return TrialOutcome(
        eps=eps,
        trial=trial_seed[-1] if isinstance(trial_seed, (list, tuple)) else trial_seed,
        lse_beta_nmse=float(np.sum((beta_lse - beta_true) ** 2)) / beta_norm_sq,
        hub_beta_nmse=float(np.sum((hub.beta - beta_true) ** 2)) / beta_norm_sq,
        sd_scale_err=math.log10(sigma_sd / sigma_true) ** 2,
        hub_scale_err=math.log10(hub.sigma / sigma_true) ** 2,
    )


def run_experiment(cfg, progress=False):
    """Average both estimators' errors over all trials for every contamination level.

    Returns one EpsSummary per grid point, in grid order. Solver failures
    abort the affected trial and are counted per level. With ``progress``,
    one status line per level goes to standard error.
    """
    summaries = []
    for eps_index, eps in enumerate(cfg.eps_grid):
        sums = np.zeros(4)
        failures = 0
        for trial_index in range(cfg.trials):
            try:
                out = run_trial(cfg, eps, [cfg.master_seed, eps_index, trial_index])
            except (ValueError, RuntimeError):
                failures += 1
                continue
            sums += (out.lse_beta_nmse, out.hub_beta_nmse, out.sd_scale_err, out.hub_scale_err)
        done = cfg.trials - failures
        means = sums / done if done else np.full(4, math.nan)
        summaries.append(
            EpsSummary(
                eps=eps,
                lse_beta_nmse=float(means[0]),
                hub_beta_nmse=float(means[1]),
                sd_scale_err=float(means[2]),
                hub_scale_err=float(means[3]),
                trials=cfg.trials,
                failures=failures,
            )
        )
        if progress:
            print(
                f"eps={eps}: {done}/{cfg.trials} trials done, "
                f"lse_nmse={means[0]:.4f} hub_nmse={means[1]:.4f}",
                file=sys.stderr,
            )
    return summaries


def write_csv(summaries, path):
    """Write per-level means as CSV: fixed header, full-precision '.' decimals.

    The file is a pure function of the experiment configuration, so reruns
    with the same master seed are byte-identical.
    """
    if not summaries:
        raise ValueError("cannot write an empty results table")
    lines = [CSV_HEADER]
    for s in summaries:
        lines.append(
            ",".join(
                [
                    repr(float(s.eps)),
                    repr(float(s.lse_beta_nmse)),
                    repr(float(s.hub_beta_nmse)),
                    repr(float(s.sd_scale_err)),
                    repr(float(s.hub_scale_err)),
                    str(s.trials),
                    str(s.failures),
                ]
            )
        )
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
