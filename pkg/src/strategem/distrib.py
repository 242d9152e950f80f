"""Normal, Student t and noncentral t distributions, plus seeded Gaussian streams.

Everything here works on Python floats. The Monte Carlo code never evaluates
these functions per sample; it compares statistics against critical values
computed once, so scalar implementations are fast enough.
"""

import math

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT2PI = 0.5 * math.log(2.0 * math.pi)

_EPS = 1e-16
_FPMIN = 1e-300
BETACF_MAXITER = 20000
NCT_MAXITER = 10000
NCT_TOL = 1e-8


# --------------------------------------------------------------------------
# Standard normal
# --------------------------------------------------------------------------

def normal_pdf(x):
    return math.exp(-0.5 * x * x) / SQRT2PI


def normal_cdf(x):
    """Lower-tail probability Phi(x); relative accuracy holds in the lower tail."""
    return 0.5 * math.erfc(-x / SQRT2)


def normal_sf(x):
    """Upper-tail probability 1 - Phi(x) without cancellation."""
    return 0.5 * math.erfc(x / SQRT2)


# Rational approximation of the normal quantile, used as the
# starting point for Halley refinement.
_Q_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_Q_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01)
_Q_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_Q_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00)


def _lower_quantile_guess(q):
    # q <= 0.5
    a, b, c, d = _Q_A, _Q_B, _Q_C, _Q_D
    if q < 0.02425:
        r = math.sqrt(-2.0 * math.log(q))
        return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) / \
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0)
    r = q - 0.5
    s = r * r
    return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r / \
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0)


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` for 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile needs 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    q = min(p, 1.0 - p)
    x = _lower_quantile_guess(q)
    # Halley steps on the lower tail, where normal_cdf keeps relative accuracy.
    for _ in range(3):
        e = normal_cdf(x) - q
        u = e * SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x if p < 0.5 else -x


# --------------------------------------------------------------------------
# Regularized incomplete beta
# --------------------------------------------------------------------------

def _betacf(a, b, x):
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, BETACF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge",
                           a=a, b=b, x=x, iterations=BETACF_MAXITER)


def _log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betainc_front(a, b, x, y):
    # x**a * y**b / B(a, b)
    return math.exp(a * math.log(x) + b * math.log(y) - _log_beta(a, b))


def betainc(a, b, x, y=None):
    """Regularized incomplete beta I_x(a, b).

    ``y`` may carry 1 - x when the caller knows it more accurately than the
    subtraction would give.
    """
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    if x < (a + 1.0) / (a + b + 2.0):
        return _betainc_front(a, b, x, y) * _betacf(a, b, x) / a
    return 1.0 - _betainc_front(b, a, y, x) * _betacf(b, a, y) / b


# --------------------------------------------------------------------------
# Student t
# --------------------------------------------------------------------------

def _check_df(df):
    if not (df >= 1.0 and math.isfinite(df)):
        raise DomainError(f"degrees of freedom must be finite and >= 1, got {df!r}")


def student_t_pdf(t, df):
    _check_df(df)
    logc = math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - 0.5 * (df + 1.0) * math.log1p(t * t / df))


def student_t_sf(t, df):
    """Upper tail P(T > t)."""
    _check_df(df)
    if t == 0.0:
        return 0.5
    t2 = t * t
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))
    return tail if t > 0.0 else 1.0 - tail


def student_t_cdf(t, df):
    return student_t_sf(-t, df)


def _t_isf_positive(q, df):
    """t >= 0 with P(T > t) = q, for 0 < q <= 0.5."""
    if q == 0.5:
        return 0.0
    lo, hi = 0.0, max(1.0, -normal_quantile(q))
    while student_t_sf(hi, df) > q:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ConvergenceError("t quantile bracket overflow", q=q, df=df)
    t = 0.5 * (lo + hi)
    logq = math.log(q)
    for it in range(200):
        sf = student_t_sf(t, df)
        if sf > q:
            lo = t
        else:
            hi = t
        # Newton on log sf; derivative is -pdf/sf.
        step = (math.log(sf) - logq) * sf / student_t_pdf(t, df)
        t_new = t + step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-15 * max(1.0, abs(t_new)) or hi - lo <= 1e-15 * max(1.0, hi):
            return t_new
        t = t_new
    raise ConvergenceError("t quantile iteration did not converge", q=q, df=df, t=t)


def student_t_isf(q, df):
    """Inverse survival function: t with P(T > t) = q."""
    _check_df(df)
    if not 0.0 < q < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {q!r}")
    if q <= 0.5:
        return _t_isf_positive(q, df)
    return -_t_isf_positive(1.0 - q, df)


def student_t_quantile(p, df):
    _check_df(df)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    if p < 0.5:
        return -_t_isf_positive(p, df)
    return student_t_isf(1.0 - p, df)


# --------------------------------------------------------------------------
# Noncentral t
# --------------------------------------------------------------------------

def _nct_cdf_series(t, df, ncp):
    """P(T <= t) for t > 0 from the Poisson mixture of incomplete betas.

    Summation starts at the Poisson mode and walks both ways with the
    three-term recurrences for I_x(a, b) in a.
    """
    t2 = t * t
    x = t2 / (t2 + df)
    y = df / (t2 + df)
    b = 0.5 * df
    lam = 0.5 * ncp * ncp
    base = normal_cdf(-ncp)
    if lam == 0.0:
        return base + 0.5 * betainc(0.5, b, x, y)

    k = int(lam)
    loglam = math.log(lam)
    logp = -lam + k * loglam - math.lgamma(k + 1.0)
    logq = -lam + k * loglam - math.lgamma(k + 1.5)
    p_k = math.exp(logp)
    q_k = ncp / SQRT2 * math.exp(logq)

    # I and the recurrence increments at the mode, for a = k + 1/2 and k + 1.
    a_p, a_q = k + 0.5, k + 1.0
    ip0 = betainc(a_p, b, x, y)
    iq0 = betainc(a_q, b, x, y)
    logx, logy = math.log(x), math.log(y)
    # g(a) = x^a y^b Gamma(a+b) / (Gamma(a+1) Gamma(b)), so I(a+1) = I(a) - g(a)
    gp0 = math.exp(a_p * logx + b * logy + math.lgamma(a_p + b) - math.lgamma(a_p + 1.0) - math.lgamma(b))
    gq0 = math.exp(a_q * logx + b * logy + math.lgamma(a_q + b) - math.lgamma(a_q + 1.0) - math.lgamma(b))

    total = p_k * ip0 + q_k * iq0

    # upward
    p, q, ip, iq, gp, gq = p_k, q_k, ip0, iq0, gp0, gq0
    j = k
    converged = False
    for _ in range(NCT_MAXITER):
        ip -= gp
        iq -= gq
        gp *= x * (j + 0.5 + b) / (j + 1.5)
        gq *= x * (j + 1.0 + b) / (j + 2.0)
        j += 1
        p *= lam / j
        q *= lam / (j + 0.5)
        total += p * max(ip, 0.0) + q * max(iq, 0.0)
        if j > lam and (p + abs(q)) < 1e-18:
            converged = True
            break
    if not converged:
        raise ConvergenceError("noncentral t series did not converge", t=t, df=df, ncp=ncp,
                               iterations=NCT_MAXITER, last_weight=p + abs(q))

    # downward
    p, q, ip, iq, gp, gq = p_k, q_k, ip0, iq0, gp0, gq0
    j = k
    while j > 0:
        # g at a - 1 from g at a: g(a-1) = g(a) * a / (x * (a - 1 + b))
        gp *= (j + 0.5) / (x * (j - 0.5 + b))
        gq *= (j + 1.0) / (x * (j + b))
        ip += gp
        iq += gq
        p *= j / lam
        q *= (j + 0.5) / lam
        j -= 1
        total += p * ip + q * iq
        if (p + abs(q)) < 1e-18:
            break
    return base + 0.5 * total


def _nct_cdf_quad(t, df, ncp):
    """P(T <= t) by integrating over the chi variate: T = (Z + ncp) / (S / sqrt(df))."""
    log_norm = (1.0 - 0.5 * df) * math.log(2.0) - math.lgamma(0.5 * df)

    def integrand(s):
        if s <= 0.0:
            return 0.0
        dens = math.exp(log_norm + (df - 1.0) * math.log(s) - 0.5 * s * s)
        return dens * normal_cdf(t * s / math.sqrt(df) - ncp)

    mode = math.sqrt(max(df - 1.0, 0.0))
    val, err = integrate.quad(integrand, 0.0, mode, epsabs=1e-13, epsrel=1e-12, limit=500)
    val2, err2 = integrate.quad(integrand, mode, np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    if err + err2 > NCT_TOL:
        raise ConvergenceError("noncentral t quadrature did not reach tolerance",
                               t=t, df=df, ncp=ncp, error_estimate=err + err2)
    return val + val2


def noncentral_t_cdf(t, df, ncp):
    """P(T <= t) for the noncentral t distribution with ``df`` and ``ncp``."""
    _check_df(df)
    if not (math.isfinite(t) and math.isfinite(ncp)):
        raise DomainError("t and ncp must be finite")
    if ncp == 0.0:
        return student_t_cdf(t, df)
    if t == 0.0:
        return normal_cdf(-ncp)
    try:
        if t > 0.0:
            val = _nct_cdf_series(t, df, ncp)
        else:
            val = 1.0 - _nct_cdf_series(-t, df, -ncp)
    except (ConvergenceError, OverflowError, ValueError):
        val = _nct_cdf_quad(t, df, ncp)
    return min(1.0, max(0.0, val))


def noncentral_t_sf(t, df, ncp):
    """P(T > t). Computed through the reflection so upper tails keep precision."""
    return noncentral_t_cdf(-t, df, -ncp)


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------

class RandomStream:
    """Seeded Gaussian source addressed by ``(master_seed, substream_index)``.

    Backed by numpy's PCG64 seeded through ``SeedSequence`` with the substream
    index as spawn key, so distinct indices give independent streams. Normal
    variates come from numpy's ziggurat sampler (``standard_normal``). A stream
    must not be shared between concurrent tasks.
    """

    def __init__(self, master_seed, substream_index=0):
        self.master_seed = int(master_seed) % 2**64
        self.substream_index = int(substream_index) % 2**64
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.substream_index,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    @property
    def origin(self):
        return (self.master_seed, self.substream_index)

    def normal(self, size):
        return self._gen.standard_normal(size)

    def __repr__(self):
        return f"RandomStream(master_seed={self.master_seed}, substream_index={self.substream_index})"


def sample_standard_normal(stream, count):
    """Draw ``count`` i.i.d. standard normal variates from ``stream``."""
    if count < 0:
        raise DomainError("count must be nonnegative")
    return stream.normal(int(count))
