"""Nash bargaining over the side payment ``p_t``.

The negotiated side payment maximizes ``(1 - gamma) log U_cp + gamma log U_isp``
where ``gamma`` is the ISP's bargaining power. Pre-bargaining fixes ``p_t``
before prices are set, anticipating the equilibrium; post-bargaining takes
the strategies as given and solves for ``p_t`` in closed form, which the
players then anticipate when choosing strategies.

The tax rate is held at zero throughout and ``p_t`` may take either sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from .advertisement import (
    DEMAND_FLOOR,
    cp_marginal_revenue,
    optimal_ad_price,
    solve_equilibrium_ad,
)
from .errors import InfeasibleMarket, InvalidMarket, NoInteriorSolution, NonpositiveUtility
from .model import (
    AdMarket,
    AdOutcome,
    Regime,
    SubscriptionMarket,
    SubscriptionOutcome,
    Timing,
    Uniform,
    demand_subscription,
    utility_cp_ad,
    utility_cp_subscription,
    utility_isp,
)
from .numerics import DEFAULT_CONFIG, SolveConfig, bisect_root, golden_max
from .subscription import solve_ne

Outcome = Union[SubscriptionOutcome, AdOutcome]


@dataclass(frozen=True)
class BargainResult:
    """Negotiated side payment and the strategies it goes with.

    ``indeterminate`` is set when the bargaining problem has a continuum of
    solutions; ``family`` then describes it and ``outcome`` is a canonical
    member. ``certificate`` carries evidence attached by the solver (for
    example objective values showing invariance, or both fixed-point roots).
    """

    p_t: float
    outcome: Outcome
    gamma: float
    timing: Timing
    indeterminate: bool = False
    family: str = ""
    certificate: dict = field(default_factory=dict)

    def __iter__(self):
        # allows ``p_t, outcome = pre_bargain_subscription(...)``
        return iter((self.p_t, self.outcome))


def nash_log_objective(u_isp: float, u_cp: float, gamma: float) -> float:
    """Weighted log Nash product ``(1 - gamma) log u_cp + gamma log u_isp``."""
    if not (u_isp > 0 and u_cp > 0):
        raise NonpositiveUtility(f"utilities must be positive (u_isp={u_isp:g}, u_cp={u_cp:g})")
    return (1.0 - gamma) * math.log(u_cp) + gamma * math.log(u_isp)


def _objective_or_ninf(out: Outcome, gamma: float) -> float:
    if out.u_isp > 0 and out.u_cp > 0:
        return nash_log_objective(out.u_isp, out.u_cp, gamma)
    return -math.inf


def _check_gamma(gamma: float):
    if not (0.0 <= gamma <= 1.0):
        raise ValueError("gamma must lie in [0, 1]")


def _require_untaxed(m):
    if m.delta != 0:
        raise InvalidMarket("side-payment bargaining is defined for delta = 0 only")


def maximize_scanned(f: Callable[[float], float], lo: float, hi: float,
                     cfg: Optional[SolveConfig] = None, points: int = 81,
                     max_expansions: int = 8) -> tuple[float, float]:
    """Maximize a unimodal ``f`` that may be ``-inf`` away from its peak.

    A coarse scan locates the best cell; the bracket is widened while the
    best point sits on an edge with a finite value; golden-section search
    then refines inside the neighbouring cells.
    """
    cfg = cfg or DEFAULT_CONFIG
    for _ in range(max_expansions + 1):
        xs = np.linspace(lo, hi, points)
        vals = np.array([f(x) for x in xs])
        i = int(np.argmax(vals))
        if not np.isfinite(vals[i]):
            raise NonpositiveUtility(f"no point with positive utilities in [{lo:g}, {hi:g}]")
        width = hi - lo
        if i == 0 and np.isfinite(vals[0]):
            lo -= width
            continue
        if i == points - 1 and np.isfinite(vals[-1]):
            hi += width
            continue
        break
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    x, fx = golden_max(f, float(a), float(b), cfg)
    return float(x), float(fx)


# ---------------------------------------------------------------------------
# subscription model


def pre_bargain_subscription(m: SubscriptionMarket, gamma: float) -> BargainResult:
    """Side payment fixed before the price game (closed form).

    ``rho < 1``: raise ``p_t`` until the ISP's price reaches 0,
    ``p_t = p_r (4 alpha p_r + 2 D0 - beta^2) / (4 alpha p_r + 2 rho alpha p_r - beta^2)``.
    ``rho > 1``: lower ``p_t`` until the CP's price reaches 0. ``rho = 1``:
    the equilibrium does not depend on ``p_t``; ``p_t = 0`` is returned with
    an invariance certificate. The result does not depend on ``gamma``.
    ``m.p_t`` is ignored.
    """
    _check_gamma(gamma)
    _require_untaxed(m)
    a, b, pr, rho = m.alpha, m.beta, m.p_r, m.rho
    if math.isclose(rho, 1.0, rel_tol=0.0, abs_tol=1e-12):
        out = solve_ne(m.with_side_payment(0.0))
        lo, hi = solve_ne(m.with_side_payment(-1.0)), solve_ne(m.with_side_payment(1.0))
        cert = {"U(p_t=-1)": _objective_or_ninf(lo, 0.5), "U(p_t=+1)": _objective_or_ninf(hi, 0.5)}
        return BargainResult(0.0, out, gamma, Timing.PRE, indeterminate=True,
                             family="any p_t with nonnegative equilibrium prices", certificate=cert)
    if rho < 1:
        p_t = pr * (4 * a * pr + 2 * m.D0 - b * b) / (4 * a * pr + 2 * rho * a * pr - b * b)
    else:
        if m.D0 <= a * pr:
            raise InfeasibleMarket("D0 <= alpha*p_r: no positive-demand equilibrium to bargain over")
        p_t = -2 * pr * (m.D0 - a * pr) / (2 * pr * a * (1 - rho) + rho * (6 * a * pr - b * b))
    out = solve_ne(m.with_side_payment(p_t))
    if out.D <= 0:
        raise InfeasibleMarket("bargained side payment leaves zero demand")
    return BargainResult(p_t, out, gamma, Timing.PRE)


def pre_bargain_subscription_numeric(m: SubscriptionMarket, gamma: float,
                                     cfg: Optional[SolveConfig] = None) -> BargainResult:
    """Pre-bargaining by direct maximization of the Nash product over ``p_t``.

    Every candidate ``p_t`` is scored at the equilibrium returned by
    :func:`solve_ne`, boundary regimes included.
    """
    _check_gamma(gamma)
    _require_untaxed(m)

    def score(p_t):
        return _objective_or_ninf(solve_ne(m.with_side_payment(p_t)), gamma)

    reach = max(m.p_r, m.D0 / m.alpha)
    p_t, _ = maximize_scanned(score, -reach, reach, cfg)
    return BargainResult(p_t, solve_ne(m.with_side_payment(p_t)), gamma, Timing.PRE)


def post_bargain_side_payment(p_s: float, p_c: float, q: float, D: float, p_r: float, gamma: float) -> float:
    """Nash-optimal ``p_t`` for fixed subscription strategies.

    ``gamma p_c - (1 - gamma)(p_s - p_r) + (1 - gamma) p_r q^2 / D``.
    """
    if not D > 0:
        raise InfeasibleMarket("post-bargaining needs positive demand")
    return gamma * p_c - (1.0 - gamma) * (p_s - p_r) + (1.0 - gamma) * p_r * q * q / D


def post_bargain_subscription(m: SubscriptionMarket, gamma: float) -> BargainResult:
    """Side payment bargained after the price game, anticipated by both players.

    With ``w = p_s + p_c - p_r`` both utilities become proportional to
    ``w D - p_r q^2``. For ``rho > 1`` the CP price falls to 0 and
    ``p_s = 2 p_r (D0 - alpha p_r) / (4 alpha p_r - beta^2) + p_r``,
    ``q = beta (D0 - alpha p_r) / (4 alpha p_r - beta^2)``, giving
    ``p_t = -(1 - gamma)(D0 - alpha p_r) / (2 alpha)``. For ``rho < 1`` the
    roles swap: ``p_s = 0`` and ``w`` solves the CP's condition
    ``D = alpha rho w``. At ``rho = 1`` only ``p_s + p_c`` is pinned down; the
    ``p_c = 0`` member is returned and flagged indeterminate.
    ``m.p_t`` is ignored.
    """
    _check_gamma(gamma)
    _require_untaxed(m)
    a, b, pr, rho, D0 = m.alpha, m.beta, m.p_r, m.rho, m.D0
    at_one = math.isclose(rho, 1.0, rel_tol=0.0, abs_tol=1e-12)
    if rho > 1 or at_one:
        if D0 <= a * pr:
            raise InfeasibleMarket("D0 <= alpha*p_r: no positive-demand solution")
        w = 2 * pr * (D0 - a * pr) / (4 * a * pr - b * b)
        p_s, p_c = w + pr, 0.0
        regime = Regime.CP_PRICE_FLOOR
    else:
        if 4 * a * rho * pr <= b * b:
            raise InfeasibleMarket("need 4*alpha*rho*p_r > beta^2 for the rho < 1 solution")
        if D0 <= a * rho * pr:
            raise InfeasibleMarket("D0 <= alpha*rho*p_r: no positive-demand solution")
        w = 2 * pr * (D0 - a * rho * pr) / (4 * a * rho * pr - b * b)
        p_s, p_c = 0.0, w + pr
        regime = Regime.ISP_PRICE_FLOOR
    q = b * w / (2 * pr)
    if q > m.q_max:
        raise InfeasibleMarket(f"post-bargain QoS {q:g} exceeds q_max={m.q_max:g}")
    D = float(demand_subscription(m, p_s, p_c, q))
    p_t = post_bargain_side_payment(p_s, p_c, q, D, pr, gamma)
    mt = m.with_side_payment(p_t)
    out = SubscriptionOutcome(
        p_s=p_s, p_c=p_c, q=q, D=D,
        u_isp=float(utility_isp(mt, p_s, p_c, q)),
        u_cp=float(utility_cp_subscription(mt, p_s, p_c, q)),
        regime=regime, p_t=p_t,
        binding=("p_c_floor",) if p_c == 0 else ("p_s_floor",),
    )
    if at_one:
        return BargainResult(p_t, out, gamma, Timing.POST, indeterminate=True,
                             family=f"p_s + p_c = {w + pr:.12g}",
                             certificate={"price_sum": w + pr})
    return BargainResult(p_t, out, gamma, Timing.POST)


def nash_side_payment_numeric(u_cp_of: Callable[[float], float], u_isp_of: Callable[[float], float],
                              lo: float, hi: float, gamma: float,
                              cfg: Optional[SolveConfig] = None) -> float:
    """Maximize the Nash product over ``p_t`` with strategies held fixed.

    ``u_cp_of`` / ``u_isp_of`` map ``p_t`` to utilities; ``[lo, hi]`` should
    cover the range where both are positive.
    """
    def score(p_t):
        u_cp, u_isp = u_cp_of(p_t), u_isp_of(p_t)
        if u_cp > 0 and u_isp > 0:
            return nash_log_objective(u_isp, u_cp, gamma)
        return -math.inf

    return maximize_scanned(score, lo, hi, cfg)[0]


# ---------------------------------------------------------------------------
# advertisement model


def pre_bargain_ad(a: AdMarket, gamma: float, cfg: Optional[SolveConfig] = None) -> BargainResult:
    """Pre-bargaining for the ad-funded CP, solved numerically.

    Each candidate ``p_t`` re-solves the equilibrium, including its boundary
    regimes, and scores the Nash product there. The search starts on
    ``[-v, v]`` for the valuation scale ``v`` and widens as needed.
    ``a.p_t`` is ignored.
    """
    _check_gamma(gamma)
    _require_untaxed(a)
    cfg = cfg or DEFAULT_CONFIG

    def score(p_t):
        return _objective_or_ninf(solve_equilibrium_ad(a.with_side_payment(p_t), cfg), gamma)

    v = a.dist.scale
    search_cfg = replace(cfg, abs_tol=max(cfg.abs_tol, 1e-9 * v))
    p_t, _ = maximize_scanned(score, -v, v, search_cfg)
    return BargainResult(p_t, solve_equilibrium_ad(a.with_side_payment(p_t), cfg), gamma, Timing.PRE)


def _post_ad_residual(a: AdMarket, D: float) -> float:
    # demand-side first-order system with c eliminated through D = alpha (1 + c) / K
    al, b, pr = a.alpha, a.beta, a.p_r
    c = a.K * D / al - 1.0
    return ((4 * al * pr - b * b) * D / (2 * al * pr) - al * cp_marginal_revenue(a, D)
            - (a.D0_0 - al * pr + a.K * math.log1p(c)))


def post_bargain_ad_fixed_points(a: AdMarket, cfg: Optional[SolveConfig] = None,
                                 scan_points: int = 400) -> tuple[list[float], bool]:
    """Demand levels solving the post-bargaining first-order system.

    Investment is tied to demand by ``D = alpha (1 + c) / K`` (so ``c >= 0``
    means ``D >= alpha / K``), and the ISP's conditions give
    ``(4 alpha p_r - beta^2) D / (2 alpha p_r) - alpha F'(D) = D0_0 - alpha p_r + K log(1 + c)``.
    Returns ``(roots, unique)`` where ``unique`` says whether the residual
    starts negative at ``D = alpha / K`` (which guarantees a single root).
    """
    cfg = cfg or DEFAULT_CONFIG
    if not isinstance(a.dist, Uniform):
        raise InvalidMarket("post-bargaining for the ad model is implemented for uniform valuations")
    lo = a.alpha / a.K

    def r(D):
        return _post_ad_residual(a, D)

    r_lo = r(lo)
    unique = r_lo < 0
    hi = 2.0 * lo
    while r(hi) <= 0 or hi < 4.0 * lo:
        hi *= 2.0
        if hi > 1e12:
            break
    xs = np.geomspace(lo, hi, scan_points)
    vals = [r(x) for x in xs]
    roots = []
    if vals[0] == 0.0:
        roots.append(lo)
    for x0, x1, v0, v1 in zip(xs, xs[1:], vals, vals[1:]):
        if v1 == 0.0:
            roots.append(float(x1))
        elif v0 * v1 < 0:
            roots.append(float(bisect_root(r, float(x0), float(x1), cfg)))
    return roots, unique


def _post_ad_strategy(a: AdMarket, D: float, gamma: float) -> tuple[AdOutcome, float]:
    al, b, pr = a.alpha, a.beta, a.p_r
    D = float(D)
    c = a.K * D / al - 1.0
    mr = float(cp_marginal_revenue(a, D))
    p_s = D / al - mr + pr
    q = b * D / (2 * al * pr)
    y = float(optimal_ad_price(a, D))
    joint = (y + p_s - pr) * D - c - pr * q * q
    p_t = gamma * y - gamma * c / D - (1 - gamma) * (p_s - pr) + (1 - gamma) * pr * q * q / D
    at = a.with_side_payment(p_t)
    out = AdOutcome(
        p_s=p_s, q=q, c=c, D=D, p_a=y,
        u_isp=float(utility_isp(at, p_s, q=q, demand=D)),
        u_cp=float(utility_cp_ad(at, y, D, max(c, 0.0))),
        regime=Regime.INTERIOR, p_t=p_t,
    )
    return out, joint


def post_bargain_ad(a: AdMarket, gamma: float, cfg: Optional[SolveConfig] = None) -> BargainResult:
    """Post-bargaining for the ad-funded CP (uniform valuations, interior strategies).

    Solves the fixed point between ``D = alpha (1 + c) / K`` and the ISP's
    demand condition. When the uniqueness inequality fails and two roots
    exist, the one with the larger joint surplus is returned and the result
    notes ``DualRoot``. ``p_t`` then follows from the Nash condition and
    the utilities split as ``U_cp = (1 - gamma) / gamma * U_isp``.

    Raises:
        NoInteriorSolution: no root, or the root has a negative price,
            QoS or investment. The roots found are attached to the error.
    """
    _check_gamma(gamma)
    _require_untaxed(a)
    roots, unique = post_bargain_ad_fixed_points(a, cfg)
    if not roots:
        raise NoInteriorSolution("post-bargaining system has no root with c >= 0")
    candidates = [_post_ad_strategy(a, D, gamma) for D in roots]
    admissible = [(o, j) for o, j in candidates if o.p_s > 0 and 0 < o.q <= a.q_max and o.c > 0 and j > 0]
    if not admissible:
        raise NoInteriorSolution(
            "post-bargaining fixed point violates p_s > 0, 0 < q <= q_max or c > 0",
            fixed_points=[(float(o.D), float(o.c), float(o.p_s)) for o, _ in candidates],
        )
    out, joint = max(admissible, key=lambda t: t[1])
    notes = ("DualRoot",) if len(roots) > 1 else ()
    out = replace(out, notes=notes)
    cert = {"roots": [float(r) for r in roots], "unique_condition": bool(unique), "joint": float(joint)}
    return BargainResult(out.p_t, out, gamma, Timing.POST, certificate=cert)


def post_bargain_ad_residuals(a: AdMarket, out: AdOutcome) -> tuple[float, float]:
    """Residuals of the two post-bargaining equations at ``out``.

    ``D - alpha (1 + c) / K`` and the ISP demand condition.
    """
    return out.D - a.alpha * (1.0 + out.c) / a.K, _post_ad_residual(a, max(out.D, DEMAND_FLOOR))
