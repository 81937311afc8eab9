"""Strategic pricing and investment with an ad-funded CP.

The ISP sets ``(p_s, q)``; the CP invests ``c`` to raise potential demand
``D0(c) = D0_0 + K log(1 + c)`` and sells the resulting user attention to
advertisers at the market-clearing price ``y(D)``. The CP's revenue is
``F(D) = y(D) * D`` and its marginal revenue ``F'(D)`` drives investment.

The interior solution is the crossing of two curves in ``D``: the CP's
optimal investment (decreasing in ``D``) and the investment the ISP's
first-order conditions need to support demand ``D`` (increasing). Boundary
regimes are solved in ``c`` instead, using the fully clamped ISP best
response, where the CP's best investment is a decreasing function of ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidMarket, NoFiniteCrossing
from .model import (
    AdMarket,
    AdOutcome,
    Normal,
    Regime,
    Uniform,
    utility_cp_ad,
    utility_isp,
)
from .numerics import (
    DEFAULT_CONFIG,
    SolveConfig,
    bisect_root,
    expand_bracket,
    fixed_point_monotone,
    gaussian_upper_integral,
)

# demand floor used wherever y(D) would be evaluated at D = 0
DEMAND_FLOOR = 1e-12

# bisection on p_a runs to floating-point resolution so F(D) is smooth
_PRICE_CFG = SolveConfig(abs_tol=1e-300, max_iter=2000)


def optimal_ad_price(a: AdMarket, D: float) -> float:
    """Attention price ``y(D)`` at which advertiser demand equals user demand ``D``.

    Uniform valuations have the closed form ``MB*v_max / (MB + D*v_max)``.
    Other laws are inverted by bisection on ``MB * (1 - X(p)) / p = D``,
    whose left side is strictly decreasing in ``p``.

    Raises:
        NoFiniteCrossing: ``D == 0`` under an unbounded valuation law.
    """
    if D < 0:
        raise ValueError("demand must be >= 0")
    dist = a.dist
    if isinstance(dist, Uniform):
        return a.MB * dist.v_max / (a.MB + D * dist.v_max)
    if D == 0:
        raise NoFiniteCrossing("zero demand has no finite attention price under unbounded valuations")

    def excess(p):
        return a.MB * dist.sf(p) / p - D

    lo = dist.scale
    while excess(lo) < 0:
        lo *= 0.5
    lo, hi = expand_bracket(excess, lo, lo * 2.0, DEFAULT_CONFIG)
    return bisect_root(excess, lo, hi, _PRICE_CFG)


def ad_revenue(a: AdMarket, D: float) -> float:
    """Advertising revenue ``F(D) = y(D) * D``; zero at zero demand."""
    if D == 0:
        return 0.0
    if isinstance(a.dist, Normal):
        # F = MB * (1 - X(y(D))): avoids multiplying a large price by a tiny demand
        return a.MB * a.dist.sf(optimal_ad_price(a, D))
    return optimal_ad_price(a, D) * D


def cp_marginal_revenue(a: AdMarket, D: float) -> float:
    """Derivative ``F'(D) = D y'(D) + y(D)`` of the advertising revenue.

    Uniform: ``MB^2 v_max / (MB + D v_max)^2``. Normal: with ``p = y(D)``,
    ``e(p) p^2 / (e(p) p + I(p))`` where ``e`` is the unnormalized Gaussian
    kernel and ``I`` its upper-tail integral. Any other law uses the
    equivalent ``x(p) p^2 / (x(p) p + 1 - X(p))``.
    """
    dist = a.dist
    if isinstance(dist, Uniform):
        return a.MB ** 2 * dist.v_max / (a.MB + D * dist.v_max) ** 2
    p = optimal_ad_price(a, D)
    if isinstance(dist, Normal):
        kernel = math.exp(-((p - dist.mu) ** 2) / (2.0 * dist.sigma ** 2))
        tail = gaussian_upper_integral(dist.mu, dist.sigma, p)
        return kernel * p * p / (kernel * p + tail)
    dens = dist.pdf(p)
    return dens * p * p / (dens * p + dist.sf(p))


@dataclass(frozen=True)
class IspAdResponse:
    p_s: float
    q: float
    D: float
    price_floor: bool = False
    qos_capped: bool = False


def isp_best_response_ad(a: AdMarket, c: float) -> IspAdResponse:
    """ISP's optimal ``(p_s, q)`` and the resulting demand, given investment ``c``.

    Interior: with ``s = p_s + (1 - delta) p_t - p_r`` the conditions are
    ``D = alpha s`` and ``q = beta s / (2 p_r)``, which give
    ``D = 2 p_r alpha (D0(c) + alpha (1 - delta) p_t - alpha p_r) / (4 alpha p_r - beta^2)``.
    The QoS cap and the price floor are enforced in that order.
    """
    if c < 0:
        raise ValueError("investment c must be >= 0")
    al, b, pr = a.alpha, a.beta, a.p_r
    off = (1.0 - a.delta) * a.p_t - pr
    d0 = a.base_demand(c)
    n = d0 + al * off
    if n <= 0:
        return IspAdResponse(max(0.0, -off), 0.0, 0.0)

    capped = False
    s = 2.0 * pr * n / (4.0 * al * pr - b * b)
    q = b * s / (2.0 * pr)
    if q > a.q_max:
        capped, q = True, a.q_max
        s = (n + b * q) / (2.0 * al)
    p_s = s - off
    if p_s >= 0:
        return IspAdResponse(p_s, q, al * s, qos_capped=capped)

    q = b * off / (2.0 * pr)
    capped = q > a.q_max
    q = min(q, a.q_max)
    D = d0 + b * q
    if D <= 0:
        return IspAdResponse(0.0, 0.0, 0.0, price_floor=True)
    return IspAdResponse(0.0, q, D, price_floor=True, qos_capped=capped)


def _investment_unclamped(a: AdMarket, D: float) -> float:
    return a.K * (cp_marginal_revenue(a, max(D, DEMAND_FLOOR)) - a.p_t) - 1.0


def cp_best_investment(a: AdMarket, D: float) -> float:
    """CP's investment ``K (F'(D) - p_t) - 1``, floored at 0.

    Comes from ``dD0/dc = K / (1 + c)`` equated to ``1 / (F'(D) - p_t)``.
    """
    if D < 0:
        raise ValueError("demand must be >= 0")
    return max(0.0, _investment_unclamped(a, D))


def _isp_investment_curve(a: AdMarket, D: float) -> float:
    # investment that makes the ISP's interior demand equal D
    al, b, pr = a.alpha, a.beta, a.p_r
    expo = (D * (4.0 * pr * al - b * b) / (2.0 * pr * al) - a.D0_0 + al * pr - (1.0 - a.delta) * a.p_t * al) / a.K
    if expo > 700.0:
        return math.inf
    return math.expm1(expo)


def _outcome(a: AdMarket, c: float, isp: IspAdResponse, regime: Regime, iterations: int = 0, notes=()) -> AdOutcome:
    D = isp.D
    if D > 0:
        p_a = optimal_ad_price(a, D)
        u_cp = utility_cp_ad(a, p_a, D, c)
    else:
        p_a = a.dist.v_max if isinstance(a.dist, Uniform) else math.inf
        u_cp = -c
    return AdOutcome(
        p_s=isp.p_s, q=isp.q, c=c, D=D, p_a=p_a,
        u_isp=float(utility_isp(a, isp.p_s, q=isp.q, demand=D)),
        u_cp=u_cp, regime=regime, p_t=a.p_t, iterations=iterations, notes=tuple(notes),
    )


def _demand_bracket(a: AdMarket) -> float:
    c_max = cp_best_investment(a, 0.0)
    return a.base_demand(c_max) + a.beta * a.q_max


def _solve_interior(a: AdMarket, cfg: SolveConfig):
    hi = _demand_bracket(a)
    hi = max(hi, 1.0)

    def increasing(D):
        return _isp_investment_curve(a, D)

    def decreasing(D):
        return _investment_unclamped(a, D)

    # the ISP curve must overtake the CP curve by the upper end
    while decreasing(hi) > increasing(hi):
        hi *= cfg.bracket_expand
    return fixed_point_monotone(increasing, decreasing, DEMAND_FLOOR, hi, cfg)


def _counter():
    calls = [0]

    def tick():
        calls[0] += 1
        return calls[0]

    return tick


def _solve_in_investment(a: AdMarket, cfg: SolveConfig) -> tuple[float, IspAdResponse, int]:
    """Boundary-aware solve: root of ``cp_best_investment(D_isp(c)) - c``.

    The clamped ISP response makes demand nondecreasing in ``c`` and the
    CP's investment nonincreasing in demand, so the gap is strictly
    decreasing in ``c``.
    """
    tick = _counter()

    def gap(c):
        tick()
        return cp_best_investment(a, isp_best_response_ad(a, c).D) - c

    g0 = gap(0.0)
    if g0 <= 0:
        return 0.0, isp_best_response_ad(a, 0.0), tick()
    c_hi = max(g0, 1.0)
    lo, hi = expand_bracket(gap, 0.0, c_hi, cfg)
    c = bisect_root(gap, lo, hi, cfg)
    return c, isp_best_response_ad(a, c), tick()


def _regime(c: float, isp: IspAdResponse) -> Regime:
    if isp.price_floor and c <= 0:
        return Regime.BOTH
    if isp.price_floor:
        return Regime.ISP_PRICE_FLOOR
    if c <= 0:
        return Regime.ZERO_INVESTMENT
    if isp.qos_capped:
        return Regime.QOS_CAPPED
    return Regime.INTERIOR


def solve_equilibrium_ad(a: AdMarket, cfg: Optional[SolveConfig] = None) -> AdOutcome:
    """Simultaneous best response ``(p_s, q, c)`` of the ISP and the ad-funded CP.

    The interior crossing of the two investment curves is found by
    bisection in ``D``. If it does not exist, or the implied ``c`` or
    ``p_s`` is negative, or the QoS cap binds, the boundary solve in ``c``
    takes over and the regime records which bounds bind.
    """
    cfg = cfg or DEFAULT_CONFIG
    crossing = _solve_interior(a, cfg)
    if crossing.found:
        c = crossing.level
        if c > 0:
            isp = isp_best_response_ad(a, c)
            if not (isp.price_floor or isp.qos_capped):
                return _outcome(a, c, isp, Regime.INTERIOR, notes=("crossing-in-demand",))

    c, isp, calls = _solve_in_investment(a, cfg)
    return _outcome(a, c, isp, _regime(c, isp), iterations=calls, notes=("solved-in-investment",))


def solve_equilibrium_ad_in_investment(a: AdMarket, cfg: Optional[SolveConfig] = None) -> AdOutcome:
    """Same equilibrium via the boundary-aware route only (independent cross-check)."""
    c, isp, calls = _solve_in_investment(a, cfg or DEFAULT_CONFIG)
    return _outcome(a, c, isp, _regime(c, isp), iterations=calls, notes=("solved-in-investment",))


def fixed_point_residuals(a: AdMarket, out: AdOutcome) -> tuple[float, float]:
    """``(curve gap, ISP price FOC)`` at an interior outcome; both vanish at the solution.

    The curve gap is the CP investment rule minus the ISP's investment
    curve at ``D``; the second is ``D - alpha (p_s + (1 - delta) p_t - p_r)``.
    """
    gap = _investment_unclamped(a, out.D) - _isp_investment_curve(a, out.D)
    foc = out.D - a.alpha * (out.p_s + (1.0 - a.delta) * a.p_t - a.p_r)
    return gap, foc


def investment_monotonicity(a: AdMarket, p_t_grid: Iterable[float], cfg: Optional[SolveConfig] = None) -> list[tuple[float, float]]:
    """Equilibrium investment ``c*`` along a side-payment grid.

    Returns ``(p_t, c*)`` pairs in grid order. Investment falls as the
    side payment rises, and once it reaches 0 it stays there.
    """
    rows = []
    for p_t in sorted(float(x) for x in p_t_grid):
        rows.append((p_t, solve_equilibrium_ad(a.with_side_payment(p_t), cfg).c))
    return rows


@dataclass(frozen=True)
class ConcavityReport:
    D: np.ndarray
    second_differences: np.ndarray
    tolerance: float

    @property
    def violations(self) -> list[tuple[float, float]]:
        bad = np.nonzero(self.second_differences > self.tolerance)[0]
        return [(float(self.D[i + 1]), float(self.second_differences[i])) for i in bad]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_ad_concavity(a: AdMarket, D_grid: Sequence[float], tolerance: float = 1e-8) -> ConcavityReport:
    """Scan ``F(D) = y(D) D`` for concavity on a positive demand grid.

    Second differences ``F(D[i-1]) - 2 F(D[i]) + F(D[i+1])`` are reported;
    uneven spacing is handled by the divided-difference form scaled back to
    the local spacing.
    """
    D = np.asarray(sorted(float(x) for x in D_grid))
    if D.size < 3 or D[0] <= 0:
        raise InvalidMarket("need at least three positive demand points")
    F = np.array([ad_revenue(a, d) for d in D])
    h0 = D[1:-1] - D[:-2]
    h1 = D[2:] - D[1:-1]
    # second divided difference times the mean spacing squared: equals the plain
    # second difference on a uniform grid
    dd = 2.0 * ((F[2:] - F[1:-1]) / h1 - (F[1:-1] - F[:-2]) / h0) / (h0 + h1)
    scale = (0.5 * (h0 + h1)) ** 2
    return ConcavityReport(D=D, second_differences=dd * scale, tolerance=tolerance)
