import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from strategem.distrib import RandomStream
from strategem.exceptions import DegenerateModelError, DimensionError, DomainError, ResourceError
from strategem.genmodel import GenerativeModel, normalize, read_cohort_csv, sample_cohort, write_cohort_csv

R2 = 1 / math.sqrt(2)


def test_normalize_single():
    m = normalize([[1.0]], 1.0, 1.0)
    assert m.weights[0, 0] == pytest.approx(0.7071068, abs=1e-7)
    assert m.row_noise_sd[0] == pytest.approx(0.7071068, abs=1e-7)
    assert m.measurement_sd == 1.0  # not rescaled
    assert m.normalized


def test_normalize_noiseless_unit_row_unchanged():
    m = normalize([[1.0]], 0.0, 0.5)
    assert m.weights[0, 0] == 1.0
    assert m.row_noise_sd[0] == 0.0


def test_normalize_case3_rows_share_scale():
    c, se = 0.4, 1.0
    m = normalize([[1.0, c], [c, 1.0]], se, 1.0)
    a = math.sqrt(1 + c * c + se * se)
    assert np.allclose(m.weights, np.array([[1, c], [c, 1]]) / a, rtol=0, atol=1e-15)
    assert m.row_noise_sd[0] == m.row_noise_sd[1]


def test_normalize_degenerate_row():
    with pytest.raises(DegenerateModelError):
        normalize([[1.0, 0.0], [0.0, 0.0]], 0.0, 1.0)


def test_normalize_rejects_negative_scale():
    with pytest.raises(DomainError):
        normalize([[1.0]], -1.0, 1.0)


@settings(max_examples=50)
@given(arrays(float, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=st.floats(-5, 5)),
       st.floats(0.05, 3))
def test_normalized_rows_have_unit_variance(raw, se):
    m = normalize(raw, se, 1.0)
    assert np.all(np.abs(m.marginal_variances() - 1) < 1e-12)


def test_model_validation():
    with pytest.raises(DimensionError):
        GenerativeModel(np.ones((2, 2)), np.ones(3), 1.0)
    with pytest.raises(DomainError):
        GenerativeModel(np.array([[np.nan]]), np.ones(1), 1.0)
    m = normalize([[1.0, 0.5]], 1.0, 1.0)
    with pytest.raises((AttributeError, TypeError)):
        m.measurement_sd = 2.0
    with pytest.raises(ValueError):
        m.weights[0, 0] = 3.0


def test_sample_shapes_and_provenance():
    m = normalize(np.ones((3, 2)), 1.0, 0.5)
    c = sample_cohort(m, 17, RandomStream(3, 4))
    assert c.X.shape == (17, 2) and c.X_hat.shape == (17, 2) and c.Y.shape == (17, 3)
    assert c.provenance == (3, 4)
    assert len(c) == 17


def test_empty_cohort():
    c = sample_cohort(normalize([[1.0]], 1.0, 1.0), 0, RandomStream(0))
    assert len(c) == 0 and c.Y.shape == (0, 1)


def test_huge_cohort_rejected():
    with pytest.raises(ResourceError):
        sample_cohort(normalize([[1.0]], 1.0, 1.0), 10**12, RandomStream(0))


def test_sampling_moments_case1():
    m = normalize([[1.0]], 1.0, 1.0)
    c = sample_cohort(m, 100_000, RandomStream(99, 0))
    v = c.Y[:, 0].var(ddof=1)
    assert 0.982 < v < 1.018
    assert abs(c.Y[:, 0].mean()) < 0.013


def test_sampling_moments_general():
    m = normalize([[1.0, 0.3, 0.0], [0.2, 1.0, 0.7], [0.0, 0.0, 1.0]], 0.8, 0.6)
    c = sample_cohort(m, 100_000, RandomStream(5, 1))
    assert np.all(np.abs(c.Y.mean(axis=0)) < 0.013)
    assert np.all(np.abs(c.Y.var(axis=0, ddof=1) - 1) < 0.018)
    # cov(x_hat_j, y_i) estimates w_ij
    xc = c.X_hat - c.X_hat.mean(axis=0)
    yc = c.Y - c.Y.mean(axis=0)
    cov = yc.T @ xc / (len(c) - 1)
    assert np.all(np.abs(cov - m.weights) < 0.02)
    sd = (c.X_hat - c.X).std(axis=0, ddof=1)
    assert np.all(np.abs(sd / 0.6 - 1) < 0.02)


def test_zero_measurement_error_is_exact():
    m = normalize([[1.0, 1.0]], 1.0, 0.0)
    c = sample_cohort(m, 500, RandomStream(1))
    assert np.array_equal(c.X_hat, c.X)


def test_sampling_deterministic():
    m = normalize([[1.0, 0.5]], 1.0, 1.0)
    a = sample_cohort(m, 250, RandomStream(8, 2))
    b = sample_cohort(m, 250, RandomStream(8, 2))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.X_hat, b.X_hat) and np.array_equal(a.Y, b.Y)


def test_cohort_csv_roundtrip():
    m = normalize([[1.0, 0.5], [0.0, 1.0]], 1.0, 1.0)
    c = sample_cohort(m, 20, RandomStream(4))
    buf = io.StringIO()
    write_cohort_csv(c, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "id,x1,x2,xhat1,xhat2,y1,y2"
    back = read_cohort_csv(io.StringIO(text))
    for a, b in ((c.X, back.X), (c.X_hat, back.X_hat), (c.Y, back.Y)):
        assert np.allclose(a, b, rtol=1e-8, atol=1e-12)
