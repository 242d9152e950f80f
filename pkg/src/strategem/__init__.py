"""Power of diagnostic-category versus dimensional study designs under a linear Gaussian model."""

from .analytic import (
    category_effect_size,
    category_power,
    conditional_moments,
    correlation_power,
    fraction_exceeded,
    mills_lambda,
    population_correlations,
)
from .distrib import RandomStream
from .genmodel import Cohort, GenerativeModel, normalize, sample_cohort
from .mcengine import PowerEstimate, estimate_fraction_exceeded_mc, estimate_power_mc
from .scenarios import (
    Scenario,
    build_case1,
    build_case2,
    build_case3,
    build_case4,
    build_comorbidity,
    build_large,
    parse_config,
    serialize_scenarios,
)
from .strategy import ClassificationRule, GroupLabel, classify, draw_case_control, draw_cross_section

__version__ = "0.1.0"
