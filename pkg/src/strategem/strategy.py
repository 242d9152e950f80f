"""Study designs: threshold diagnosis with case-control recruitment, and cross-sectional sampling."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distrib import RandomStream, normal_cdf, normal_sf
from .exceptions import DimensionError, DomainError, InfeasibleRecruitmentError
from .genmodel import sample_cohort

MIN_ACCEPTANCE = 1e-4
PILOT_SEED = 0x5EED_0F_C0
PILOT_DRAWS = 2**16


class GroupLabel(enum.IntEnum):
    CONTROL = 0
    PATIENT = 1
    EXCLUDED = 2


@dataclass(frozen=True)
class ClassificationRule:
    """Diagnosis by thresholds on a set of measures.

    An individual is a patient when every selected measure reaches its
    threshold. ``measures`` lists the 0-based measure columns the rule looks
    at (all of them when ``None``). A positive ``margin`` excludes the band
    ``[h - margin, h)`` from the control group; it is only defined for a
    single criterion.
    """

    thresholds: tuple
    margin: float = 0.0
    measures: tuple = None

    def __post_init__(self):
        h = tuple(float(v) for v in np.atleast_1d(self.thresholds))
        if not h or not all(math.isfinite(v) for v in h):
            raise DomainError("thresholds must be finite and non-empty")
        if not (self.margin >= 0 and math.isfinite(self.margin)):
            raise DomainError("margin must be finite and nonnegative")
        object.__setattr__(self, "thresholds", h)
        object.__setattr__(self, "margin", float(self.margin))
        if self.measures is not None:
            m = tuple(int(i) for i in self.measures)
            if len(m) != len(h):
                raise DimensionError("one threshold per selected measure is required")
            if len(set(m)) != len(m) or min(m) < 0:
                raise DomainError("measure indices must be distinct and nonnegative")
            object.__setattr__(self, "measures", m)
        if len(h) > 1 and self.margin > 0:
            raise DomainError("a margin is only defined for a single diagnostic criterion")

    @property
    def n_criteria(self):
        return len(self.thresholds)

    def columns(self, n_measures):
        if self.measures is None:
            if n_measures != len(self.thresholds):
                raise DimensionError(f"rule has {len(self.thresholds)} thresholds for {n_measures} measures")
            return tuple(range(n_measures))
        if max(self.measures) >= n_measures:
            raise DimensionError("rule refers to a measure the model does not have")
        return self.measures


def classify_many(Y, rule):
    """Label every row of ``Y`` (individuals x measures) with a :class:`GroupLabel` code."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise DimensionError("Y must be a 2-d array")
    cols = rule.columns(Y.shape[1])
    h = np.asarray(rule.thresholds)
    sub = Y[:, cols]
    patient = np.all(sub >= h, axis=1)
    if rule.margin > 0:
        control = sub[:, 0] < h[0] - rule.margin
    else:
        control = ~patient
    labels = np.full(Y.shape[0], GroupLabel.EXCLUDED, dtype=np.int8)
    labels[control] = GroupLabel.CONTROL
    labels[patient] = GroupLabel.PATIENT
    return labels


def classify(y_row, rule):
    y = np.asarray(y_row, dtype=float)
    if y.ndim != 1:
        raise DimensionError("y_row must be a vector")
    return GroupLabel(int(classify_many(y[None, :], rule)[0]))


def group_probabilities(model, rule):
    """Population probabilities ``(p_control, p_patient)`` of the two groups.

    Exact for a single criterion. With several criteria the orthant
    probability is estimated from a fixed pilot sample, which keeps it
    reproducible.
    """
    cols = rule.columns(model.n_measures)
    var = model.marginal_variances()
    if len(cols) == 1:
        sd = math.sqrt(var[cols[0]])
        h = rule.thresholds[0]
        return normal_cdf((h - rule.margin) / sd), normal_sf(h / sd)
    stream = RandomStream(PILOT_SEED, 0)
    X = stream.normal((PILOT_DRAWS, model.n_factors))
    eps = stream.normal((PILOT_DRAWS, model.n_measures))
    Y = X @ model.weights.T + eps * model.row_noise_sd
    labels = classify_many(Y, rule)
    p_patient = float(np.mean(labels == GroupLabel.PATIENT))
    return 1.0 - p_patient, p_patient


@dataclass(frozen=True)
class RecruitmentPlan:
    p_control: float
    p_patient: float
    chunk_size: int


def plan_recruitment(model, rule, n1, n2):
    """Check that both groups can be filled and pick a candidate batch size."""
    p_control, p_patient = group_probabilities(model, rule)
    if p_control < MIN_ACCEPTANCE or p_patient < MIN_ACCEPTANCE:
        raise InfeasibleRecruitmentError(
            f"acceptance probability too small (control {p_control:.3g}, patient {p_patient:.3g})",
            p_control=p_control, p_patient=p_patient)
    need = max(n1 / p_control, n2 / p_patient)
    chunk = int(math.ceil(1.15 * need)) + 32
    return RecruitmentPlan(p_control, p_patient, max(chunk, 64))


def draw_case_control(model, rule, n1, n2, stream, plan=None):
    """Recruit ``n1`` controls and ``n2`` patients by generate-and-test.

    Candidates are generated in order and each is taken by its group while
    that group still has room; the rest are discarded. Returns the measured
    factors ``(control_xhat, patient_xhat)``.
    """
    n1, n2 = int(n1), int(n2)
    if n1 < 1 or n2 < 1:
        raise DomainError("both groups need at least one subject")
    if plan is None:
        plan = plan_recruitment(model, rule, n1, n2)
    N, M = model.n_factors, model.n_measures
    Wt = model.weights.T
    s = model.row_noise_sd
    sd_delta = model.measurement_sd
    controls, patients = [], []
    need_c, need_p = n1, n2
    while need_c > 0 or need_p > 0:
        X = stream.normal((plan.chunk_size, N))
        eps = stream.normal((plan.chunk_size, M))
        labels = classify_many(X @ Wt + eps * s, rule)
        ci = np.flatnonzero(labels == GroupLabel.CONTROL)[:need_c]
        pi = np.flatnonzero(labels == GroupLabel.PATIENT)[:need_p]
        for idx, bucket in ((ci, controls), (pi, patients)):
            if idx.size:
                xs = X[idx]
                delta = stream.normal((idx.size, N))
                bucket.append(xs + sd_delta * delta)
        need_c -= ci.size
        need_p -= pi.size
    return np.vstack(controls), np.vstack(patients)


def draw_cross_section(model, n, stream):
    """Sample ``n`` subjects without looking at their measures."""
    return sample_cohort(model, n, stream)
