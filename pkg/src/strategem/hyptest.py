"""Two-sided pooled-variance t-test, Pearson correlation test and Cohen's d."""

import math
from dataclasses import dataclass

import numpy as np

from .distrib import student_t_sf
from .exceptions import DegenerateDataError, DimensionError

COLLINEAR_TOL = 1e-13


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test.

    ``effect_size`` is Cohen's d for the group test and the sample r for the
    correlation test. ``collinear`` marks |r| = 1, where p is reported as 0.
    """

    __test__ = False  # not a pytest class

    statistic: float
    df: float
    p_value: float
    effect_size: float
    collinear: bool = False

    def rejects(self, alpha):
        return self.p_value < alpha


def two_sided_p(t, df):
    if math.isinf(t):
        return 0.0
    return min(1.0, 2.0 * student_t_sf(abs(t), df))


def _as_vector(x, name, min_len):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional")
    if x.size < min_len:
        raise DegenerateDataError(f"{name} needs at least {min_len} values, got {x.size}")
    return x


def _pooled(a, b):
    n1, n2 = a.size, b.size
    ma, mb = a.mean(), b.mean()
    ss = np.sum((a - ma) ** 2) + np.sum((b - mb) ** 2)
    pooled_var = ss / (n1 + n2 - 2)
    if not pooled_var > 0:
        raise DegenerateDataError("pooled variance is zero")
    return ma - mb, math.sqrt(pooled_var)


def t_test_equal_var(a, b):
    """Unpaired t-test assuming equal variances; df = n1 + n2 - 2."""
    a = _as_vector(a, "a", 2)
    b = _as_vector(b, "b", 2)
    n1, n2 = a.size, b.size
    diff, sd = _pooled(a, b)
    t = diff / (sd * math.sqrt(1.0 / n1 + 1.0 / n2))
    df = n1 + n2 - 2
    return TestResult(statistic=t, df=float(df), p_value=two_sided_p(t, df), effect_size=diff / sd)


def cohens_d(a, b):
    a = _as_vector(a, "a", 2)
    b = _as_vector(b, "b", 2)
    diff, sd = _pooled(a, b)
    return diff / sd


def pearson_r_test(u, v):
    """Test of zero correlation with t = r sqrt(n - 2) / sqrt(1 - r^2), df = n - 2."""
    u = _as_vector(u, "u", 3)
    v = _as_vector(v, "v", 3)
    if u.size != v.size:
        raise DimensionError("u and v must have the same length")
    n = u.size
    du = u - u.mean()
    dv = v - v.mean()
    suu, svv = np.dot(du, du), np.dot(dv, dv)
    if suu == 0 or svv == 0:
        raise DegenerateDataError("correlation undefined for constant input")
    r = float(np.dot(du, dv) / math.sqrt(suu * svv))
    df = float(n - 2)
    if abs(r) >= 1.0 - COLLINEAR_TOL:
        r = math.copysign(1.0, r)
        return TestResult(statistic=math.copysign(math.inf, r), df=df, p_value=0.0,
                          effect_size=r, collinear=True)
    t = r * math.sqrt(df) / math.sqrt(1.0 - r * r)
    return TestResult(statistic=t, df=df, p_value=two_sided_p(t, df), effect_size=r)


# Column-wise forms used by the Monte Carlo engine.

def pooled_t_columns(a, b):
    """t statistics and Cohen's d for each column of ``a`` (n1 x K) versus ``b`` (n2 x K)."""
    n1, n2 = a.shape[0], b.shape[0]
    ma, mb = a.mean(axis=0), b.mean(axis=0)
    ss = np.sum((a - ma) ** 2, axis=0) + np.sum((b - mb) ** 2, axis=0)
    sd = np.sqrt(ss / (n1 + n2 - 2))
    d = (ma - mb) / sd
    return d / math.sqrt(1.0 / n1 + 1.0 / n2), d


def pearson_r_columns(U, v):
    """Sample correlation of each column of ``U`` (n x K) with ``v`` (n,)."""
    du = U - U.mean(axis=0)
    dv = v - v.mean()
    num = dv @ du
    return num / np.sqrt(np.sum(du ** 2, axis=0) * np.dot(dv, dv))


def r_to_t(r, n):
    return r * math.sqrt(n - 2) / np.sqrt(1.0 - r * r)
