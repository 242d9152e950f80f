"""Closed-form power of the two designs for a single diagnostic criterion.

The patient group is the upper tail y >= h of a standard normal measure and
the control group the lower tail y < h - d. A factor's measured value x_hat
is jointly normal with y, so its moments within each group follow from the
truncated normal (inverse Mills ratio) results.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distrib import (
    noncentral_t_cdf,
    normal_cdf,
    normal_pdf,
    normal_sf,
    student_t_isf,
)
from .exceptions import ConvergenceError, DomainError

_MILLS_SWITCH = 8.0
_MILLS_TERMS = 80


@dataclass(frozen=True)
class PopulationCorrelations:
    rho_xy: float
    rho_xhat_y: float


@dataclass(frozen=True)
class ConditionalMoments:
    """Mean and variance of x_hat in the patient and control groups (x_hat units)."""

    mean_patient: float
    var_patient: float
    mean_control: float
    var_control: float


def mills_lambda(a):
    """Inverse Mills ratio phi(a) / (1 - Phi(a)).

    Above a = 8 the tail ratio (1 - Phi) / phi is taken from its Laplace
    continued fraction, which stays accurate where 1 - Phi underflows.
    """
    if a > _MILLS_SWITCH:
        frac = a
        for k in range(_MILLS_TERMS, 0, -1):
            frac = a + k / frac
        return frac
    return normal_pdf(a) / normal_sf(a)


def population_correlations(weights_row, sigma_delta, j=0, row_noise_sd=None):
    """Correlations of y with the true and the measured factor ``j`` (0-based).

    ``weights_row`` is a standardized row (unit marginal variance of y)
    unless ``row_noise_sd`` is given, in which case the row's variance is
    computed and divided out.
    """
    w = np.asarray(weights_row, dtype=float).ravel()
    if not 0 <= j < w.size:
        raise IndexError(f"factor index {j} out of range for {w.size} factors")
    if sigma_delta < 0:
        raise DomainError("sigma_delta must be nonnegative")
    var_y = 1.0 if row_noise_sd is None else float(np.sum(w ** 2) + row_noise_sd ** 2)
    rho = float(w[j] / math.sqrt(var_y))
    return PopulationCorrelations(rho_xy=rho, rho_xhat_y=rho / math.sqrt(1.0 + sigma_delta ** 2))


def conditional_moments(rho_xhat_y, h, d, sigma_delta):
    """Group moments of x_hat for patients (y >= h) and controls (y < h - d).

    With s^2 = 1 + sigma_delta^2 and cov(x_hat, y) = rho_xhat_y * s:
    E = +/- cov * lambda(alpha), Var = s^2 - cov^2 * lambda(alpha) * (lambda(alpha) - alpha),
    where alpha = h for patients and alpha = d - h for controls.
    """
    if not abs(rho_xhat_y) < 1.0:
        raise DomainError(f"|rho| must be < 1, got {rho_xhat_y!r}")
    if d < 0:
        raise DomainError("margin must be nonnegative")
    s2 = 1.0 + sigma_delta ** 2
    cov = rho_xhat_y * math.sqrt(s2)
    if abs(cov) > 1.0:
        raise DomainError("rho_xhat_y is larger than 1/sqrt(1 + sigma_delta^2) allows")
    a1 = h
    a2 = d - h
    l1 = mills_lambda(a1)
    l2 = mills_lambda(a2)
    return ConditionalMoments(
        mean_patient=cov * l1,
        var_patient=s2 - cov * cov * l1 * (l1 - a1),
        mean_control=-cov * l2,
        var_control=s2 - cov * cov * l2 * (l2 - a2),
    )


def category_effect_size(moments):
    """Standardized mean difference with the two group variances averaged."""
    pooled = 0.5 * (moments.var_patient + moments.var_control)
    if not pooled > 0:
        raise DomainError("pooled variance must be positive")
    return (moments.mean_patient - moments.mean_control) / math.sqrt(pooled)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def category_power(d_eff, n1, n2, alpha):
    """Power of the two-sided pooled t-test when the true standardized difference is ``d_eff``."""
    if n1 < 2 or n2 < 2:
        raise DomainError("each group needs at least two subjects")
    _check_alpha(alpha)
    df = n1 + n2 - 2
    t_crit = student_t_isf(alpha / 2.0, df)
    ncp = d_eff * math.sqrt(n1 * n2 / (n1 + n2))
    lower = noncentral_t_cdf(-t_crit, df, ncp)
    upper = noncentral_t_cdf(-t_crit, df, -ncp)  # P(T > t_crit) by reflection
    return min(1.0, lower + upper)


def correlation_power(rho, n, alpha):
    """Power of the correlation test from the Fisher z approximation.

    Uses the bias-corrected z of rho, z = atanh(rho) + rho / (2 (n - 1)),
    against the z of the critical r.
    """
    if n < 4:
        raise DomainError("n must be at least 4")
    if not abs(rho) < 1.0:
        raise DomainError("|rho| must be < 1")
    _check_alpha(alpha)
    t_c = student_t_isf(alpha / 2.0, n - 2)
    r_crit = math.sqrt(t_c * t_c / (t_c * t_c + n - 2))
    z_r = math.atanh(rho) + rho / (2.0 * (n - 1))
    z_c = math.atanh(r_crit)
    root = math.sqrt(n - 3)
    return normal_cdf((z_r - z_c) * root) + normal_cdf((-z_r - z_c) * root)


def fraction_exceeded(rho_xy, h, d=0.0):
    """P(x > m | y >= h) with m the control-group mean of the true factor.

    m = -rho * lambda(d - h); the conditional law of x given y is
    N(rho y, 1 - rho^2), integrated against the upper tail of y.
    """
    if not abs(rho_xy) < 1.0:
        raise DomainError("|rho| must be < 1")
    if rho_xy == 0.0:
        return 0.5
    m = -rho_xy * mills_lambda(d - h)
    s = math.sqrt(1.0 - rho_xy * rho_xy)

    def integrand(y):
        return normal_pdf(y) * normal_sf((m - rho_xy * y) / s)

    # Split at the bulk of the truncated density for robustness.
    edge = max(h, 0.0) + 12.0
    val, err = integrate.quad(integrand, h, edge, epsabs=1e-13, epsrel=1e-11, limit=400)
    tail, err2 = integrate.quad(integrand, edge, np.inf, epsabs=1e-15, limit=100)
    denom = normal_sf(h)
    if (err + err2) / denom > 1e-8:
        raise ConvergenceError("fraction_exceeded quadrature did not converge",
                               rho=rho_xy, h=h, d=d, error_estimate=(err + err2) / denom)
    return (val + tail) / denom


def case4_rho_xhat_y(n_factors, c, sigma_eps=1.0, sigma_delta=1.0):
    """Correlation between y and the measured first factor for weights (1, c, ..., c)."""
    return 1.0 / math.sqrt((1.0 + (n_factors - 1) * c * c + sigma_eps ** 2) * (1.0 + sigma_delta ** 2))
