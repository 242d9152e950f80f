"""Linear Gaussian generative model Y = W X + eps with measured factors X_hat = X + delta."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateModelError, DimensionError, DomainError, ResourceError

# Refuse cohorts whose three matrices would need more than this many bytes.
MAX_COHORT_BYTES = 4 * 2**30


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    """Weights and noise scales of the generative model.

    ``weights`` is M x N (measure i in row i, factor j in column j).
    ``row_noise_sd`` holds the per-measure noise scale and ``measurement_sd``
    the scale of the measurement error added to every factor.
    """

    weights: np.ndarray
    row_noise_sd: np.ndarray
    measurement_sd: float
    normalized: bool = False

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise DimensionError(f"weights must be a non-empty M x N matrix, got shape {w.shape}")
        s = _frozen(self.row_noise_sd)
        if s.shape != (w.shape[0],):
            raise DimensionError("row_noise_sd needs one entry per measure")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(s)) and np.isfinite(self.measurement_sd)):
            raise DomainError("model parameters must be finite")
        if np.any(s < 0) or self.measurement_sd < 0:
            raise DomainError("noise scales must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "row_noise_sd", s)
        object.__setattr__(self, "measurement_sd", float(self.measurement_sd))

    @property
    def n_measures(self):
        return self.weights.shape[0]

    @property
    def n_factors(self):
        return self.weights.shape[1]

    def marginal_variances(self):
        """Population variance of each y_i."""
        return np.sum(self.weights ** 2, axis=1) + self.row_noise_sd ** 2

    def measure_covariance(self):
        """Population covariance matrix of Y."""
        return self.weights @ self.weights.T + np.diag(self.row_noise_sd ** 2)

    def __eq__(self, other):
        if not isinstance(other, GenerativeModel):
            return NotImplemented
        return (np.array_equal(self.weights, other.weights)
                and np.array_equal(self.row_noise_sd, other.row_noise_sd)
                and self.measurement_sd == other.measurement_sd
                and self.normalized == other.normalized)

    __hash__ = None


def normalize(raw_weights, sigma_eps, sigma_delta):
    """Rescale each row so that every y_i has unit marginal variance.

    Row i is divided by a_i = sqrt(sum_k w_ik^2 + sigma_eps^2); the shared
    noise scale becomes ``sigma_eps / a_i`` for that row. ``sigma_delta`` acts
    on the factors, not on y, and is left alone.
    """
    w = np.atleast_2d(np.asarray(raw_weights, dtype=float))
    if sigma_eps < 0 or sigma_delta < 0:
        raise DomainError("sigma_eps and sigma_delta must be nonnegative")
    a = np.sqrt(np.sum(w ** 2, axis=1) + sigma_eps ** 2)
    if np.any(a == 0):
        rows = [int(i) for i in np.flatnonzero(a == 0)]
        raise DegenerateModelError(f"rows {rows} have no weight and sigma_eps = 0")
    return GenerativeModel(weights=w / a[:, None], row_noise_sd=sigma_eps / a,
                           measurement_sd=float(sigma_delta), normalized=True)


@dataclass(frozen=True, eq=False)
class Cohort:
    """True factors ``X``, measured factors ``X_hat`` and measures ``Y`` (rows are individuals)."""

    X: np.ndarray
    X_hat: np.ndarray
    Y: np.ndarray
    provenance: tuple = field(default=(None, None))

    def __len__(self):
        return self.X.shape[0]


def _check_size(n, n_cols):
    if n < 0:
        raise DomainError("sample size must be nonnegative")
    if n * n_cols * 8 > MAX_COHORT_BYTES:
        raise ResourceError(f"cohort of {n} individuals x {n_cols} columns exceeds the memory cap")


def sample_cohort(model, n, stream):
    """Draw ``n`` individuals from ``model``.

    Draw order is fixed (X, then eps, then delta) so a stream always yields
    the same cohort.
    """
    n = int(n)
    N, M = model.n_factors, model.n_measures
    _check_size(n, 2 * N + M)
    X = stream.normal((n, N))
    eps = stream.normal((n, M))
    delta = stream.normal((n, N))
    Y = X @ model.weights.T + eps * model.row_noise_sd
    X_hat = X + model.measurement_sd * delta if model.measurement_sd > 0 else X.copy()
    return Cohort(X=X, X_hat=X_hat, Y=Y, provenance=stream.origin)


def _fmt(v):
    return format(float(v), ".9g")


def write_cohort_csv(cohort, fh):
    """Write a cohort as CSV: ``id,x1..xN,xhat1..xhatN,y1..yM``."""
    N = cohort.X.shape[1]
    M = cohort.Y.shape[1]
    header = (["id"] + [f"x{j}" for j in range(1, N + 1)]
              + [f"xhat{j}" for j in range(1, N + 1)] + [f"y{i}" for i in range(1, M + 1)])
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for k in range(len(cohort)):
        row = [str(k + 1)]
        row += [_fmt(v) for v in cohort.X[k]]
        row += [_fmt(v) for v in cohort.X_hat[k]]
        row += [_fmt(v) for v in cohort.Y[k]]
        writer.writerow(row)


def read_cohort_csv(fh):
    """Inverse of :func:`write_cohort_csv` (values are rounded to 9 digits)."""
    reader = csv.reader(fh)
    header = next(reader)
    N = sum(1 for h in header if h.startswith("x") and not h.startswith("xhat"))
    M = sum(1 for h in header if h.startswith("y"))
    rows = np.array([[float(v) for v in r[1:]] for r in reader], dtype=float).reshape(-1, 2 * N + M)
    return Cohort(X=rows[:, :N], X_hat=rows[:, N:2 * N], Y=rows[:, 2 * N:])
