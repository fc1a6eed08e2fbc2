"""Huber loss family: loss, score and chi functions plus the scale consistency factor.

All kernel operations accept scalars or numpy arrays and apply elementwise.
"""

import math
from dataclasses import dataclass, field

import numpy as np

# Thresholds giving 95% / 85% asymptotic efficiency relative to least squares
# under Gaussian errors.
THRESHOLD_95 = 1.345
THRESHOLD_85 = 0.7317


def chi2_cdf(x, dof):
    """CDF of the chi-squared distribution with 1 or 3 degrees of freedom.

    Closed forms in terms of the error function:
    dof=1: erf(sqrt(x/2)); dof=3: erf(sqrt(x/2)) - sqrt(2x/pi) * exp(-x/2).
    """
    x = float(x)
    if x < 0 or not math.isfinite(x):
        raise ValueError(f"chi2_cdf requires finite x >= 0, got {x}")
    if dof == 1:
        return math.erf(math.sqrt(0.5 * x))
    if dof == 3:
        return math.erf(math.sqrt(0.5 * x)) - math.sqrt(2.0 * x / math.pi) * math.exp(-0.5 * x)
    raise ValueError(f"chi2_cdf supports dof 1 or 3, got {dof}")


def consistency_factor(c):
    """Scaling factor making the joint scale estimate Fisher-consistent under Gaussian errors.

    Equals E[chi_c(e)] for e ~ N(0,1):
    c^2/2 * (1 - F_chi2_1(c^2)) + 1/2 * F_chi2_3(c^2).
    Strictly increasing in c, tends to 1/2 as c -> infinity.
    """
    c = float(c)
    if not math.isfinite(c) or c <= 0:
        raise ValueError(f"threshold c must be positive and finite, got {c}")
    c2 = c * c
    return 0.5 * c2 * (1.0 - chi2_cdf(c2, 1)) + 0.5 * chi2_cdf(c2, 3)


@dataclass(frozen=True)
class HuberKernel:
    """Huber threshold c with its cached consistency factor.

    The factor is computed once at construction; kernels are immutable and
    safe to share across concurrent fits. A near-least-squares kernel is
    expressed by a large finite c (e.g. 1e6), never by infinity.
    """

    c: float
    alpha: float = field(init=False)

    def __post_init__(self):
        c = float(self.c)
        if not math.isfinite(c) or c <= 0:
            raise ValueError(f"threshold c must be positive and finite, got {self.c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "alpha", consistency_factor(c))

    def rho(self, x):
        """Loss: x^2/2 inside the threshold, (2c|x| - c^2)/2 outside."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.where(ax <= self.c, 0.5 * x * x, 0.5 * (2.0 * self.c * ax - self.c * self.c))
        return out[()]

    def psi(self, x):
        """Score (derivative of rho): clips x to [-c, c]."""
        x = np.asarray(x, dtype=float)
        return np.clip(x, -self.c, self.c)[()]

    def chi(self, x):
        """psi(x)^2 / 2; identically equal to psi(x)*x - rho(x)."""
        p = self.psi(x)
        return 0.5 * p * p

    def weight(self, x):
        """IRWLS weight psi(x)/x, with the limit value 1 at x = 0."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.ones_like(ax)
        np.divide(self.c, ax, out=out, where=ax > self.c)
        return out[()]
