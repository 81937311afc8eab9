"""Market parameters, valuation distributions, outcome records and the raw
demand / utility formulas shared by every solver.

Two revenue models are covered. In the subscription model the CP charges
users a price ``p_c``; demand is linear in both prices and in the ISP's
QoS level. In the advertisement model the CP is free to users, invests
``c`` in content and sells user attention to advertisers.

Advertiser count and budget only ever enter as their product, so markets
store ``MB`` directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy import integrate

from .errors import InvalidMarket
from .numerics import gaussian_upper_integral


class Regime(str, enum.Enum):
    """Which constraints bind at a reported solution."""

    INTERIOR = "Interior"
    QOS_CAPPED = "QosCapped"
    ISP_PRICE_FLOOR = "IspPriceFloor"
    CP_PRICE_FLOOR = "CpPriceFloor"
    ZERO_DEMAND = "ZeroDemand"
    ZERO_INVESTMENT = "ZeroInvestment"
    BOTH = "Both"

    def __str__(self):
        return self.value


class Timing(str, enum.Enum):
    PRE = "pre"
    POST = "post"

    def __str__(self):
        return self.value


def _require(cond: bool, msg: str):
    if not cond:
        raise InvalidMarket(msg)


def _check_isp_side(alpha, beta, delta, p_r, q_max, p_t):
    for name, val in (("alpha", alpha), ("beta", beta), ("delta", delta),
                      ("p_r", p_r), ("q_max", q_max), ("p_t", p_t)):
        _require(math.isfinite(val), f"{name} must be finite")
    _require(alpha > 0, "alpha must be > 0")
    _require(beta > 0, "beta must be > 0")
    _require(p_r > 0, "p_r must be > 0")
    _require(q_max > 0, "q_max must be > 0")
    _require(0.0 <= delta <= 1.0, "delta must lie in [0, 1]")
    _require(4.0 * alpha * p_r > beta * beta,
             f"ISP utility not concave: need 4*alpha*p_r > beta^2 "
             f"(got {4 * alpha * p_r:g} <= {beta * beta:g})")


@dataclass(frozen=True)
class SubscriptionMarket:
    """Exogenous parameters of the subscription price game.

    ``p_t`` is the side payment per unit of demand from the CP to the ISP
    (negative values mean the ISP pays the CP).
    """

    D0: float
    alpha: float
    beta: float
    rho: float
    delta: float = 0.0
    p_r: float = 1.0
    q_max: float = 10.0
    p_t: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.D0) and self.D0 >= 0, "D0 must be finite and >= 0")
        _require(math.isfinite(self.rho) and self.rho > 0, "rho must be > 0")
        _check_isp_side(self.alpha, self.beta, self.delta, self.p_r, self.q_max, self.p_t)

    def with_side_payment(self, p_t: float) -> "SubscriptionMarket":
        return replace(self, p_t=float(p_t))


class ValuationDistribution:
    """Advertiser valuation law: density ``pdf``, CDF ``cdf`` and tail ``sf = 1 - cdf``."""

    def pdf(self, v):
        raise NotImplementedError

    def cdf(self, v):
        raise NotImplementedError

    def sf(self, v):
        return 1.0 - self.cdf(v)

    @property
    def scale(self) -> float:
        """Characteristic valuation magnitude, used to size search brackets."""
        raise NotImplementedError

    def _check_mass(self, lo, hi, points=None):
        mass, _ = integrate.quad(self.pdf, lo, hi, points=points, limit=200)
        _require(abs(mass - 1.0) <= 1e-6, f"pdf integrates to {mass:.9f}, not 1")


@dataclass(frozen=True)
class Uniform(ValuationDistribution):
    """Valuations uniform on ``[0, v_max]``."""

    v_max: float

    def __post_init__(self):
        _require(math.isfinite(self.v_max) and self.v_max > 0, "v_max must be > 0")
        self._check_mass(-1.0, 2.0 * self.v_max, points=[0.0, self.v_max])

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where((v >= 0) & (v <= self.v_max), 1.0 / self.v_max, 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, v):
        out = np.clip(np.asarray(v, dtype=float) / self.v_max, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    @property
    def scale(self) -> float:
        return self.v_max


@dataclass(frozen=True)
class Normal(ValuationDistribution):
    """Untruncated normal valuations; negative-valuation mass is kept as is."""

    mu: float
    sigma: float

    def __post_init__(self):
        _require(math.isfinite(self.mu) and self.mu > 0, "mu must be > 0")
        _require(math.isfinite(self.sigma) and self.sigma > 0, "sigma must be > 0")
        self._check_mass(-np.inf, np.inf)

    def pdf(self, v):
        z = (np.asarray(v, dtype=float) - self.mu) / self.sigma
        out = np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))
        return float(out) if out.ndim == 0 else out

    def cdf(self, v):
        return 1.0 - self.sf(v)

    def sf(self, v):
        return gaussian_upper_integral(self.mu, self.sigma, float(v)) / (self.sigma * math.sqrt(2.0 * math.pi))

    @property
    def scale(self) -> float:
        return self.mu + 4.0 * self.sigma


@dataclass(frozen=True)
class AdMarket:
    """Parameters of the advertisement model.

    Potential demand grows with CP investment as ``D0_0 + K*log(1 + c)``.
    """

    D0_0: float
    K: float
    MB: float
    dist: ValuationDistribution
    alpha: float
    beta: float
    delta: float = 0.0
    p_r: float = 1.0
    q_max: float = 10.0
    p_t: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.D0_0) and self.D0_0 >= 0, "D0_0 must be finite and >= 0")
        _require(math.isfinite(self.K) and self.K > 0, "K must be > 0")
        _require(math.isfinite(self.MB) and self.MB > 0, "MB must be > 0")
        _require(isinstance(self.dist, ValuationDistribution), "dist must be a ValuationDistribution")
        _check_isp_side(self.alpha, self.beta, self.delta, self.p_r, self.q_max, self.p_t)

    def with_side_payment(self, p_t: float) -> "AdMarket":
        return replace(self, p_t=float(p_t))

    def base_demand(self, c: float) -> float:
        """Potential demand ``D0(c)`` reached with investment ``c >= 0``."""
        return self.D0_0 + self.K * math.log1p(c)


Market = Union[SubscriptionMarket, AdMarket]


@dataclass(frozen=True)
class SubscriptionOutcome:
    p_s: float
    p_c: float
    q: float
    D: float
    u_isp: float
    u_cp: float
    regime: Regime
    p_t: float = 0.0
    iterations: int = 0
    binding: tuple = ()


@dataclass(frozen=True)
class AdOutcome:
    p_s: float
    q: float
    c: float
    D: float
    p_a: float
    u_isp: float
    u_cp: float
    regime: Regime
    p_t: float = 0.0
    iterations: int = 0
    notes: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class BargainSetting:
    """ISP bargaining power ``gamma`` and when the bargaining happens."""

    gamma: float
    timing: Timing = Timing.PRE

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        object.__setattr__(self, "timing", Timing(self.timing))


# ---------------------------------------------------------------------------
# raw formulas


def demand_subscription(m: SubscriptionMarket, p_s, p_c, q):
    """User demand ``max(0, D0 - alpha*(p_s + rho*p_c) + beta*q)``."""
    return np.maximum(0.0, m.D0 - m.alpha * (p_s + m.rho * p_c) + m.beta * q)


def utility_cp_subscription(m: SubscriptionMarket, p_s, p_c, q):
    """CP revenue ``(p_c - p_t) * D`` under subscriptions."""
    return (p_c - m.p_t) * demand_subscription(m, p_s, p_c, q)


def utility_isp(m: Market, p_s, p_c=None, q=0.0, demand=None):
    """ISP profit: user revenue plus taxed side payment, minus bandwidth cost.

    ``(p_s - p_r)*D + (1 - delta)*p_t*D - p_r*q^2``. Pass ``p_c`` for the
    subscription model, or ``demand`` directly (required for ad markets).
    """
    if demand is None:
        if p_c is None or not isinstance(m, SubscriptionMarket):
            raise TypeError("utility_isp needs p_c on a subscription market, otherwise demand=")
        demand = demand_subscription(m, p_s, p_c, q)
    return (p_s - m.p_r) * demand + (1.0 - m.delta) * m.p_t * demand - m.p_r * q * q


def attention_demand(a: AdMarket, p_a: float, user_demand: float = math.inf) -> float:
    """Attention sold at price ``p_a``: advertiser demand capped by user demand."""
    if not p_a > 0:
        raise ValueError("p_a must be > 0")
    advertiser = a.MB * a.dist.sf(p_a) / p_a
    return min(user_demand, advertiser)


def utility_cp_ad(a: AdMarket, p_a: float, attention: float, c: float) -> float:
    """Ad-funded CP profit ``(p_a - p_t) * attention - c``."""
    if c < 0:
        raise ValueError("investment c must be >= 0")
    return (p_a - a.p_t) * attention - c


def ad_demand(a: AdMarket, c: float, p_s: float, q: float) -> float:
    """User demand in the advertisement model, clamped at zero."""
    return max(0.0, a.base_demand(c) - a.alpha * p_s + a.beta * q)
