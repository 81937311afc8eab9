"""Equilibria, optimal strategies and bargained side payments in a two-sided
ISP / content-provider market, for subscription and ad-funded providers."""

from .advertisement import (
    ad_revenue,
    check_ad_concavity,
    cp_best_investment,
    cp_marginal_revenue,
    fixed_point_residuals,
    investment_monotonicity,
    isp_best_response_ad,
    optimal_ad_price,
    solve_equilibrium_ad,
    solve_equilibrium_ad_in_investment,
)
from .bargaining import (
    BargainResult,
    nash_log_objective,
    post_bargain_ad,
    post_bargain_subscription,
    pre_bargain_ad,
    pre_bargain_subscription,
    pre_bargain_subscription_numeric,
)
from .errors import (
    InfeasibleMarket,
    InvalidMarket,
    MonotonicityViolation,
    NoBracket,
    NoConvergence,
    NoFiniteCrossing,
    NoInteriorSolution,
    NonNeutralError,
    NonpositiveUtility,
    RegimeMismatch,
)
from .model import (
    AdMarket,
    AdOutcome,
    BargainSetting,
    Normal,
    Regime,
    SubscriptionMarket,
    SubscriptionOutcome,
    Timing,
    Uniform,
    ValuationDistribution,
    ad_demand,
    attention_demand,
    demand_subscription,
    utility_cp_ad,
    utility_cp_subscription,
    utility_isp,
)
from .numerics import (
    DEFAULT_CONFIG,
    Crossing,
    SolveConfig,
    bisect_root,
    expand_bracket,
    fixed_point_monotone,
    gaussian_lower_integral,
    gaussian_upper_integral,
    golden_max,
)
from .subscription import (
    QosShift,
    best_response_cp,
    best_response_isp,
    classify,
    max_deviation_gain,
    qos_shift_sign,
    solve_ne,
    solve_ne_iterative,
)

__version__ = "0.1.0"
