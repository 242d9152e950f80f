"""Scenario presets (cases 1-4, the large-sample variant, comorbidity) and config files.

A config file is TOML with one ``[[scenario]]`` table per scenario::

    [[scenario]]
    case = "case1"
    strategy = "category"
    n = [40, 100, 200]      # a list sweeps the key
    d = [0.0, 0.5]

Lists expand to the cartesian product of their values. Missing keys take the
defaults sigma_eps = sigma_delta = 1, h = 0.5, alpha = 0.01 and n1 = n2 = n / 2.
"""

import itertools
import re
from dataclasses import dataclass, replace

import numpy as np
import tomli
import tomli_w

from .exceptions import ConfigError
from .genmodel import normalize
from .strategy import ClassificationRule

THRESHOLD = 0.5
DEFAULTS = {"sigma_eps": 1.0, "sigma_delta": 1.0, "alpha": 0.01}

CATEGORY = "category"
DIMENSIONAL = "dimensional"
STRATEGIES = (CATEGORY, DIMENSIONAL)
CASES = ("case1", "case2", "case3", "case4", "large", "comorbidity")


@dataclass(frozen=True)
class Scenario:
    """One study configuration.

    ``targets`` holds 1-based ``(factor, measure)`` pairs; the measure is
    ``None`` for the group comparison of the category design. ``reps`` and
    ``seed`` are optional run settings carried along from config files.
    """

    label: str
    case: str
    strategy: str
    model: object
    rule: object
    n: int
    n1: int
    n2: int
    alpha: float
    targets: tuple
    sigma_eps: float
    sigma_delta: float
    d: float = None
    c: float = None
    N: int = None
    M: int = None
    criteria: str = None
    weights: tuple = None
    disorder: str = None
    reps: int = None
    seed: int = None

    @property
    def is_category(self):
        return self.strategy == CATEGORY


# --------------------------------------------------------------------------
# validation helpers
# --------------------------------------------------------------------------

def _need(cond, message, field=None):
    if not cond:
        raise ConfigError(message, field=field)


def _check_common(strategy, sigma_eps, sigma_delta, alpha):
    _need(strategy in STRATEGIES, f"strategy must be one of {STRATEGIES}", "strategy")
    _need(sigma_eps >= 0, "sigma_eps must be nonnegative", "sigma_eps")
    _need(sigma_delta >= 0, "sigma_delta must be nonnegative", "sigma_delta")
    _need(0.0 < alpha < 0.5, "alpha must lie in (0, 0.5)", "alpha")


def _split(strategy, n, n1, n2):
    """Resolve sample sizes; the category design splits n evenly by default."""
    if strategy == DIMENSIONAL:
        _need(n1 is None and n2 is None, "n1/n2 apply to the category design only", "n1")
        _need(n is not None and n >= 4, "dimensional design needs n >= 4", "n")
        return n, None, None
    if n1 is None and n2 is None:
        _need(n is not None, "n is required", "n")
        _need(n % 2 == 0, f"n = {n} is odd; give n1 and n2 explicitly", "n")
        n1 = n2 = n // 2
    else:
        _need(n1 is not None and n2 is not None, "n1 and n2 must be given together", "n1")
        _need(n is None or n == n1 + n2, "n must equal n1 + n2", "n")
    _need(n1 >= 2 and n2 >= 2, "each group needs at least 2 subjects", "n1")
    return n1 + n2, n1, n2


def _label(case, strategy, **parts):
    bits = [case, strategy] + [f"{k}={v}" for k, v in parts.items() if v is not None]
    return "/".join(bits)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def build_case1(n=100, d=0.0, sigma_eps=1.0, sigma_delta=1.0, strategy=CATEGORY,
                alpha=0.01, n1=None, n2=None, label=None):
    """One factor, one measure, W = (1); optional exclusion margin ``d``."""
    _check_common(strategy, sigma_eps, sigma_delta, alpha)
    _need(d >= 0, "margin d must be nonnegative", "d")
    _need(strategy == CATEGORY or d == 0, "a margin only applies to the category design", "d")
    n, n1, n2 = _split(strategy, n, n1, n2)
    model = normalize([[1.0]], sigma_eps, sigma_delta)
    if strategy == CATEGORY:
        rule = ClassificationRule((THRESHOLD,), margin=d)
        targets = ((1, None),)
    else:
        rule, targets, d = None, ((1, 1),), None
    return Scenario(label or _label("case1", strategy, n=n, d=d), "case1", strategy, model, rule,
                    n, n1, n2, alpha, targets, sigma_eps, sigma_delta, d=d)


def build_case2(M=3, sigma_eps=1.0, sigma_delta=1.0, n=100, strategy=CATEGORY,
                alpha=0.01, n1=None, n2=None, label=None):
    """x1 drives all M measures with weight 1; x2 is irrelevant."""
    _check_common(strategy, sigma_eps, sigma_delta, alpha)
    _need(isinstance(M, int) and M >= 1, "M must be a positive integer", "M")
    n, n1, n2 = _split(strategy, n, n1, n2)
    raw = np.zeros((M, 2))
    raw[:, 0] = 1.0
    model = normalize(raw, sigma_eps, sigma_delta)
    if strategy == CATEGORY:
        rule = ClassificationRule((THRESHOLD,) * M)
        targets = ((1, None), (2, None))
    else:
        rule, targets = None, ((1, 1), (2, 1))
    return Scenario(label or _label("case2", strategy, n=n, M=M, sigma_eps=sigma_eps), "case2",
                    strategy, model, rule, n, n1, n2, alpha, targets, sigma_eps, sigma_delta, M=M)


def build_case3(c=0.5, sigma_eps=1.0, sigma_delta=1.0, n=100, criteria="single",
                strategy=CATEGORY, alpha=0.01, n1=None, n2=None, label=None):
    """Two factors mixed into two measures by W = ((1, c), (c, 1))."""
    _check_common(strategy, sigma_eps, sigma_delta, alpha)
    _need(0.0 <= c <= 1.0, "c must lie in [0, 1]", "c")
    n, n1, n2 = _split(strategy, n, n1, n2)
    model = normalize([[1.0, c], [c, 1.0]], sigma_eps, sigma_delta)
    if strategy == CATEGORY:
        _need(criteria in ("single", "both"), "criteria must be 'single' or 'both'", "criteria")
        measures = (0,) if criteria == "single" else (0, 1)
        rule = ClassificationRule((THRESHOLD,) * len(measures), measures=measures)
        targets = ((1, None), (2, None))
    else:
        rule, targets, criteria = None, ((1, 1), (2, 1)), None
    return Scenario(label or _label("case3", strategy, n=n, c=c, criteria=criteria), "case3",
                    strategy, model, rule, n, n1, n2, alpha, targets, sigma_eps, sigma_delta,
                    c=c, criteria=criteria)


def build_case4(N=10, c=1.0, sigma_eps=1.0, sigma_delta=1.0, n=100, alpha=0.01,
                strategy=CATEGORY, n1=None, n2=None, label=None, case="case4"):
    """N factors feeding one measure through the row (1, c, ..., c); x1 is tested."""
    _check_common(strategy, sigma_eps, sigma_delta, alpha)
    _need(isinstance(N, int) and N >= 1, "N must be a positive integer", "N")
    _need(0.0 <= c <= 1.0, "c must lie in [0, 1]", "c")
    n, n1, n2 = _split(strategy, n, n1, n2)
    raw = np.full((1, N), float(c))
    raw[0, 0] = 1.0
    model = normalize(raw, sigma_eps, sigma_delta)
    if strategy == CATEGORY:
        rule = ClassificationRule((THRESHOLD,))
        targets = ((1, None),)
    else:
        rule, targets = None, ((1, 1),)
    return Scenario(label or _label(case, strategy, n=n, N=N, c=c, alpha=alpha), case, strategy,
                    model, rule, n, n1, n2, alpha, targets, sigma_eps, sigma_delta, c=c, N=N)


def build_large(N=10, c=1.0, sigma_eps=1.0, sigma_delta=1.0, n=10_000, alpha=1e-8,
                strategy=CATEGORY, n1=None, n2=None, label=None):
    """Case 4 at 10,000 subjects with alpha = 1e-8."""
    return build_case4(N=N, c=c, sigma_eps=sigma_eps, sigma_delta=sigma_delta, n=n, alpha=alpha,
                       strategy=strategy, n1=n1, n2=n2, label=label, case="large")


def comorbidity_weights(w1=1.0, w2=1.0, w3=1.0, w4=1.0):
    return [[w1, 0.0, 0.0, w4],
            [0.0, w2, 0.0, w4],
            [0.0, 0.0, w3, 0.0]]


def build_comorbidity(w1=1.0, w2=1.0, w3=1.0, w4=1.0, sigma_eps=1.0, sigma_delta=1.0,
                      n=100, alpha=0.01, n1=None, n2=None):
    """Two disorders sharing the symptom y3; returns ``(disorder_A, disorder_B)``.

    A requires y1 and y3 above threshold, B requires y2 and y3. x4 feeds both
    specific symptoms; x3 reaches both disorders only through y3.
    """
    weights = (float(w1), float(w2), float(w3), float(w4))
    _need(all(np.isfinite(weights)), "weights must be finite", "weights")
    _check_common(CATEGORY, sigma_eps, sigma_delta, alpha)
    n, n1, n2 = _split(CATEGORY, n, n1, n2)
    model = normalize(comorbidity_weights(*weights), sigma_eps, sigma_delta)
    targets = tuple((j, None) for j in range(1, 5))
    out = []
    for disorder, measures in (("A", (0, 2)), ("B", (1, 2))):
        rule = ClassificationRule((THRESHOLD, THRESHOLD), measures=measures)
        out.append(Scenario(_label("comorbidity", CATEGORY, disorder=disorder, n=n), "comorbidity",
                            CATEGORY, model, rule, n, n1, n2, alpha, targets, sigma_eps,
                            sigma_delta, weights=weights, disorder=disorder))
    return tuple(out)


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

_COMMON_KEYS = {"case", "strategy", "n", "n1", "n2", "sigma_eps", "sigma_delta", "alpha",
                "reps", "seed", "label"}
CASE_KEYS = {
    "case1": _COMMON_KEYS | {"d"},
    "case2": _COMMON_KEYS | {"M"},
    "case3": _COMMON_KEYS | {"c", "criteria"},
    "case4": _COMMON_KEYS | {"N", "c"},
    "large": _COMMON_KEYS | {"N", "c"},
    "comorbidity": (_COMMON_KEYS - {"strategy"}) | {"weights", "disorder"},
}
ALL_KEYS = set().union(*CASE_KEYS.values())

_INT_KEYS = {"n", "n1", "n2", "N", "M", "reps", "seed"}
_FLOAT_KEYS = {"d", "c", "sigma_eps", "sigma_delta", "alpha"}
_STR_KEYS = {"case", "strategy", "criteria", "disorder", "label"}

# emission order for serialization
_KEY_ORDER = ("case", "strategy", "label", "n", "n1", "n2", "N", "M", "c", "d", "criteria",
              "weights", "disorder", "sigma_eps", "sigma_delta", "alpha", "reps", "seed")


def _coerce(key, value):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"expected an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f"expected a number, got {value!r}")
        return float(value)
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise TypeError(f"expected a string, got {value!r}")
        return value
    if key == "weights":
        if not (isinstance(value, list) and len(value) == 4
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            raise TypeError(f"expected four numbers, got {value!r}")
        return tuple(float(v) for v in value)
    raise KeyError(key)


def _is_sweep(key, value):
    if key == "weights":
        return isinstance(value, list) and bool(value) and all(isinstance(v, list) for v in value)
    return isinstance(value, list)


def _key_lines(text):
    """Map (table index, key) -> line number, for diagnostics."""
    where = {}
    table = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if re.match(r"\s*\[\[\s*scenario\s*\]\]", line):
            table += 1
            where[(table, None)] = lineno
            continue
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=", line)
        if m:
            where.setdefault((table, m.group(1)), lineno)
    return where


def build_scenarios(entry):
    """Build every scenario described by one config table (sweeps expanded)."""
    case = entry.get("case")
    if case not in CASES:
        raise ConfigError(f"unknown case {case!r}; valid cases: {', '.join(CASES)}", field="case")
    allowed = CASE_KEYS[case]
    for key in entry:
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown key; valid keys: {', '.join(sorted(ALL_KEYS))}", field=key)
        if key not in allowed:
            raise ConfigError(f"key does not apply to {case}", field=key)

    keys = [k for k in _KEY_ORDER if k in entry and k != "case"]
    axes = []
    for key in keys:
        raw = entry[key]
        values = raw if _is_sweep(key, raw) else [raw]
        if not values:
            raise ConfigError("empty sweep", field=key)
        try:
            axes.append([_coerce(key, v) for v in values])
        except TypeError as exc:
            raise ConfigError(str(exc), field=key) from None

    out = []
    for combo in itertools.product(*axes):
        params = dict(zip(keys, combo))
        out.extend(_from_params(case, params))
    return out


def _from_params(case, params):
    p = dict(params)
    reps = p.pop("reps", None)
    seed = p.pop("seed", None)
    label = p.pop("label", None)
    sigma = {k: p.pop(k, DEFAULTS[k]) for k in DEFAULTS}
    if case == "comorbidity":
        weights = p.pop("weights", (1.0, 1.0, 1.0, 1.0))
        disorder = p.pop("disorder", None)
        _need(disorder in (None, "A", "B"), "disorder must be 'A' or 'B'", "disorder")
        default_n = None if "n1" in p else 100
        pair = build_comorbidity(*weights, n=p.pop("n", default_n), n1=p.pop("n1", None),
                                 n2=p.pop("n2", None), **sigma)
        chosen = [s for s in pair if disorder in (None, s.disorder)]
    else:
        builder = {"case1": build_case1, "case2": build_case2, "case3": build_case3,
                   "case4": build_case4, "large": build_large}[case]
        if "n" not in p:
            p["n"] = None if "n1" in p else (10_000 if case == "large" else 100)
        if label is not None:
            p["label"] = label
        chosen = [builder(**p, **sigma)]
        label = None
    out = []
    for s in chosen:
        if label is not None:
            s = replace(s, label=label)
        out.append(replace(s, reps=reps, seed=seed))
    return out


def parse_config(text):
    """Parse a TOML scenario document into a list of :class:`Scenario`."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed document: {exc}", line=int(m.group(1)) if m else None) from None
    extra = set(doc) - {"scenario"}
    if extra:
        raise ConfigError("only [[scenario]] tables are allowed at top level", field=sorted(extra)[0])
    tables = doc.get("scenario", [])
    if not isinstance(tables, list):
        raise ConfigError("'scenario' must be an array of tables ([[scenario]])", field="scenario")
    lines = _key_lines(text)
    out = []
    for idx, entry in enumerate(tables):
        if not isinstance(entry, dict):
            raise ConfigError("scenario entries must be tables", table=idx + 1)
        try:
            out.extend(build_scenarios(entry))
        except ConfigError as exc:
            line = lines.get((idx, exc.field), lines.get((idx, None)))
            raise ConfigError(exc.reason, line=line, field=exc.field, table=idx + 1) from None
    return out


def scenario_to_entry(s):
    """Flat key/value table reproducing ``s`` when parsed back."""
    entry = {"case": s.case}
    if s.case != "comorbidity":
        entry["strategy"] = s.strategy
    entry["label"] = s.label
    if s.is_category:
        entry["n1"] = s.n1
        entry["n2"] = s.n2
    else:
        entry["n"] = s.n
    for key in ("N", "M", "c", "d", "criteria", "disorder"):
        value = getattr(s, key)
        if value is not None:
            entry[key] = value
    if s.weights is not None:
        entry["weights"] = list(s.weights)
    entry["sigma_eps"] = s.sigma_eps
    entry["sigma_delta"] = s.sigma_delta
    entry["alpha"] = s.alpha
    if s.reps is not None:
        entry["reps"] = s.reps
    if s.seed is not None:
        entry["seed"] = s.seed
    return entry


def serialize_scenarios(scenarios):
    """Write scenarios as a TOML document accepted by :func:`parse_config`."""
    return tomli_w.dumps({"scenario": [scenario_to_entry(s) for s in scenarios]})
