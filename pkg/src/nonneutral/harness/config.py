"""Flat ``key=value`` scenario files.

One key per line, ``#`` starts a comment, blank lines are ignored. A value
holding a comma-separated list turns that parameter into a series: the
scenario is run once per listed value. ``sweep=var:start:stop:steps`` adds
an evenly spaced sweep, evaluated for every series combination.

Example::

    model=subscription
    D0=200
    alpha=10
    beta=0.5
    rho=0.5,1.5
    sweep=p_t:0:5:11
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidMarket
from ..model import AdMarket, BargainSetting, Normal, SubscriptionMarket, Timing, Uniform


class ParseError(ValueError):
    """Malformed line; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigValidationError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


SUBSCRIPTION = "subscription"
ADVERTISEMENT = "advertisement"

_SHARED = {"alpha", "beta", "delta", "p_r", "q_max", "p_t", "gamma"}
_NUMERIC = {
    SUBSCRIPTION: _SHARED | {"D0", "rho"},
    ADVERTISEMENT: _SHARED | {"D0_0", "K", "MB", "v_max", "mu", "sigma"},
}
_REQUIRED = {
    SUBSCRIPTION: ("D0", "alpha", "beta", "rho"),
    ADVERTISEMENT: ("D0_0", "K", "MB", "alpha", "beta", "dist"),
}
_DEFAULTS = {"delta": 0.0, "p_r": 1.0, "q_max": 10.0, "p_t": 0.0}
_TEXT = {"model", "dist", "timing", "sweep", "output"}
_ALL_KEYS = _NUMERIC[SUBSCRIPTION] | _NUMERIC[ADVERTISEMENT] | _TEXT

# (predicate, reason) per key
_RULES = {
    "D0": (lambda v: v >= 0, "must be >= 0"),
    "D0_0": (lambda v: v >= 0, "must be >= 0"),
    "alpha": (lambda v: v > 0, "must be > 0"),
    "beta": (lambda v: v > 0, "must be > 0"),
    "rho": (lambda v: v > 0, "must be > 0"),
    "p_r": (lambda v: v > 0, "must be > 0"),
    "q_max": (lambda v: v > 0, "must be > 0"),
    "K": (lambda v: v > 0, "must be > 0"),
    "MB": (lambda v: v > 0, "must be > 0"),
    "v_max": (lambda v: v > 0, "must be > 0"),
    "mu": (lambda v: v > 0, "must be > 0"),
    "sigma": (lambda v: v > 0, "must be > 0"),
    "delta": (lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
    "gamma": (lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
}


@dataclass(frozen=True)
class Sweep:
    var: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.

    ``params`` holds one value per numeric key (the first value of any
    series); ``series`` maps listed keys to all of their values in file order.
    """

    model: str
    params: dict
    dist: Optional[str] = None
    series: dict = field(default_factory=dict)
    sweep: Optional[Sweep] = None
    bargain: Optional[BargainSetting] = None
    output: Optional[str] = None

    def point(self, overrides: dict) -> dict:
        p = dict(self.params)
        p.update(overrides)
        return p

    def market(self, overrides: Optional[dict] = None):
        """Build the market for one evaluation point (``p_t`` included)."""
        p = self.point(overrides or {})
        isp = {k: p[k] for k in ("alpha", "beta", "delta", "p_r", "q_max", "p_t")}
        if self.model == SUBSCRIPTION:
            return SubscriptionMarket(D0=p["D0"], rho=p["rho"], **isp)
        dist = Uniform(p["v_max"]) if self.dist == "uniform" else Normal(p["mu"], p["sigma"])
        return AdMarket(D0_0=p["D0_0"], K=p["K"], MB=p["MB"], dist=dist, **isp)

    def bargain_at(self, overrides: Optional[dict] = None) -> Optional[BargainSetting]:
        if self.bargain is None:
            return None
        gamma = self.point(overrides or {}).get("gamma", self.bargain.gamma)
        return BargainSetting(gamma, self.bargain.timing)


def _number(text: str, line: int, key: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(line, f"{key}: '{text}' is not a number") from None
    if not math.isfinite(v):
        raise ParseError(line, f"{key}: value must be finite")
    return v


def _parse_sweep(text: str, line: int) -> Sweep:
    parts = text.split(":")
    if len(parts) != 4:
        raise ParseError(line, "sweep must be var:start:stop:steps")
    var = parts[0].strip()
    start, stop = _number(parts[1], line, "sweep"), _number(parts[2], line, "sweep")
    try:
        steps = int(parts[3])
    except ValueError:
        raise ParseError(line, "sweep steps must be an integer") from None
    return Sweep(var, start, stop, steps)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises:
        ParseError: syntax problems, unknown or repeated keys.
        ConfigValidationError: missing keys or out-of-range values.
    """
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(lineno, f"expected key=value, got '{body}'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ParseError(lineno, f"unknown key '{key}'")
        if key in raw:
            raise ParseError(lineno, f"duplicate key '{key}'")
        if not value:
            raise ParseError(lineno, f"empty value for '{key}'")
        raw[key] = (value, lineno)
    numbers = {key: [_number(v.strip(), lineno, key) for v in value.split(",")]
               for key, (value, lineno) in raw.items() if key not in _TEXT}

    if "model" not in raw:
        raise ConfigValidationError("model", "required")
    model = raw["model"][0].lower()
    if model not in _NUMERIC:
        raise ConfigValidationError("model", "must be subscription or advertisement")
    allowed = _NUMERIC[model] | _TEXT
    for key, (_, lineno) in raw.items():
        if key not in allowed:
            raise ParseError(lineno, f"key '{key}' does not apply to the {model} model")
    if model == SUBSCRIPTION and "dist" in raw:
        raise ParseError(raw["dist"][1], "key 'dist' does not apply to the subscription model")

    for key in _REQUIRED[model]:
        if key not in raw:
            raise ConfigValidationError(key, "required")

    dist = None
    if model == ADVERTISEMENT:
        dist = raw["dist"][0].lower()
        needed = {"uniform": ("v_max",), "normal": ("mu", "sigma")}.get(dist)
        if needed is None:
            raise ConfigValidationError("dist", "must be uniform or normal")
        for key in needed:
            if key not in raw:
                raise ConfigValidationError(key, "required")

    params: dict[str, float] = {}
    series: dict[str, list[float]] = {}
    for key, values in numbers.items():
        for v in values:
            rule = _RULES.get(key)
            if rule and not rule[0](v):
                raise ConfigValidationError(key, rule[1])
        params[key] = values[0]
        if len(values) > 1:
            series[key] = values
    for key, v in _DEFAULTS.items():
        params.setdefault(key, v)

    sweep = None
    if "sweep" in raw:
        value, lineno = raw["sweep"]
        sweep = _parse_sweep(value, lineno)
        numeric = _NUMERIC[model] if "gamma" in raw or "timing" in raw else _NUMERIC[model] - {"gamma"}
        if sweep.var not in numeric:
            raise ConfigValidationError("sweep", f"'{sweep.var}' is not a parameter of this scenario")
        if sweep.steps < 2:
            raise ConfigValidationError("sweep", "steps must be >= 2")
        if sweep.var in series:
            raise ConfigValidationError("sweep", f"'{sweep.var}' is already a series")
        rule = _RULES.get(sweep.var)
        if rule and not (rule[0](sweep.start) and rule[0](sweep.stop)):
            raise ConfigValidationError(sweep.var, rule[1])

    bargain = None
    if "gamma" in raw or "timing" in raw:
        if "gamma" not in raw:
            raise ConfigValidationError("gamma", "required when timing is given")
        timing = raw["timing"][0].lower() if "timing" in raw else "pre"
        if timing not in ("pre", "post"):
            raise ConfigValidationError("timing", "must be pre or post")
        bargain = BargainSetting(params["gamma"], Timing(timing))
        if (sweep and sweep.var == "p_t") or "p_t" in series:
            raise ConfigValidationError("p_t", "is the bargained output and cannot be swept")

    cfg = ScenarioConfig(model=model, params=params, dist=dist, series=series, sweep=sweep,
                         bargain=bargain, output=raw["output"][0] if "output" in raw else None)
    try:
        cfg.market()
    except InvalidMarket as exc:
        raise ConfigValidationError("market", str(exc)) from None
    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
