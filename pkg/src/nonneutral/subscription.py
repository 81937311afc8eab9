"""Price competition between the ISP (price + QoS) and a subscription CP.

The ISP picks ``(p_s, q)`` with ``p_s >= 0`` and ``0 < q <= q_max``; the CP
picks ``p_c >= 0``. Both utilities are concave quadratics on the positive
demand branch, so every equilibrium is a KKT point of both players'
problems. :func:`solve_ne` enumerates the active sets in a fixed order and
returns the first that satisfies primal feasibility and the multiplier
signs. :func:`solve_ne_iterative` is an independent check that only uses
the best-response maps.
"""

from __future__ import annotations

import enum
import itertools
import math
from typing import Optional

import numpy as np

from .errors import InvalidMarket, NoConvergence, RegimeMismatch
from .model import (
    Regime,
    SubscriptionMarket,
    SubscriptionOutcome,
    demand_subscription,
    utility_cp_subscription,
    utility_isp,
)
from .numerics import DEFAULT_CONFIG, SolveConfig


class QosShift(str, enum.Enum):
    IMPROVED = "Improved"
    DEGRADED = "Degraded"
    UNAFFECTED = "Unaffected"

    def __str__(self):
        return self.value


def _eps(*vals) -> float:
    return 1e-9 * max(1.0, *(abs(v) for v in vals))


def _margin(m: SubscriptionMarket) -> float:
    # ISP margin offset: p_s + (1 - delta) p_t - p_r == p_s + _margin(m)
    return (1.0 - m.delta) * m.p_t - m.p_r


def _outcome(m, p_s, p_c, q, regime, iterations=0, binding=()):
    D = float(demand_subscription(m, p_s, p_c, q))
    return SubscriptionOutcome(
        p_s=float(p_s), p_c=float(p_c), q=float(q), D=D,
        u_isp=float(utility_isp(m, p_s, p_c, q)),
        u_cp=float(utility_cp_subscription(m, p_s, p_c, q)),
        regime=regime, p_t=m.p_t, iterations=iterations, binding=tuple(binding),
    )


# ---------------------------------------------------------------------------
# best responses


def best_response_isp(m: SubscriptionMarket, p_c: float) -> tuple[float, float]:
    """ISP's optimal ``(p_s, q)`` against a fixed CP price.

    The unconstrained optimum comes from the two first-order conditions;
    the price floor and the QoS cap are applied in turn, re-solving the
    remaining condition each time. When no positive demand is profitable
    the QoS collapses to 0 (the open lower bound) and the price is reported
    at the limit of the interior formula.
    """
    a, b, pr = m.alpha, m.beta, m.p_r
    off = _margin(m)
    # demand with p_s = 0 and q = 0 is reduced by this constant
    base = m.D0 - a * m.rho * p_c
    n = base + a * off
    if n <= 0:
        return max(0.0, -off), 0.0

    s = 2.0 * pr * n / (4.0 * a * pr - b * b)
    q = b * s / (2.0 * pr)
    if q > m.q_max:
        q = m.q_max
        s = (n + b * q) / (2.0 * a)
    p_s = s - off
    if p_s < 0:
        p_s = 0.0
        q = min(m.q_max, max(0.0, b * off / (2.0 * pr)))
    if base - a * p_s + b * q <= 0:
        return p_s, 0.0
    return p_s, q


def best_response_cp(m: SubscriptionMarket, p_s: float, q: float) -> float:
    """CP's optimal price given the ISP's ``(p_s, q)``, floored at 0."""
    a_rho = m.alpha * m.rho
    reach = m.D0 - m.alpha * p_s + m.beta * q
    return max(0.0, (reach + a_rho * m.p_t) / (2.0 * a_rho))


# ---------------------------------------------------------------------------
# closed forms


def interior_closed_form(m: SubscriptionMarket) -> tuple[float, float, float, float]:
    """Interior equilibrium ``(p_s, p_c, q, D)`` with no constraint enforcement.

    With ``s = 2 p_r N / (6 alpha p_r - beta^2)`` and
    ``N = D0 - alpha p_r + alpha p_t (1 - rho - delta)``:
    ``q = beta s / (2 p_r)``, ``p_c = s / rho + p_t``,
    ``p_s = s + p_r - (1 - delta) p_t`` and ``D = alpha s``.
    """
    a, b, pr = m.alpha, m.beta, m.p_r
    n = m.D0 - a * pr + a * m.p_t * (1.0 - m.rho - m.delta)
    s = 2.0 * pr * n / (6.0 * a * pr - b * b)
    return s + pr - (1.0 - m.delta) * m.p_t, s / m.rho + m.p_t, b * s / (2.0 * pr), a * s


def fixed_qos_closed_form(m: SubscriptionMarket) -> tuple[float, float]:
    """Equilibrium ``(p_s, p_c)`` when the QoS is pinned at ``q_max``."""
    a = m.alpha
    n = m.D0 + m.beta * m.q_max - a * m.p_r + a * (1.0 - m.rho - m.delta) * m.p_t
    return n / (3.0 * a) + m.p_r - (1.0 - m.delta) * m.p_t, n / (3.0 * a * m.rho) + m.p_t


def foc_residuals(m: SubscriptionMarket, p_s: float, p_c: float, q: float) -> tuple[float, float, float]:
    """Derivatives ``(dU_isp/dp_s, dU_isp/dq, dU_cp/dp_c)`` on the unclamped branch."""
    D = m.D0 - m.alpha * (p_s + m.rho * p_c) + m.beta * q
    s = p_s + _margin(m)
    return D - m.alpha * s, m.beta * s - 2.0 * m.p_r * q, D - m.alpha * m.rho * (p_c - m.p_t)


def _solve_active(m: SubscriptionMarket, ps_floor: bool, q_cap: bool, pc_floor: bool):
    a, b, pr, ar = m.alpha, m.beta, m.p_r, m.alpha * m.rho
    off = _margin(m)
    # rows: dU_isp/dp_s, dU_isp/dq, dU_cp/dp_c as linear forms in (p_s, q, p_c)
    A = np.array([[-2 * a, b, -ar], [b, -2 * pr, 0.0], [-a, b, -2 * ar]])
    rhs = np.array([-(m.D0 - a * off), -b * off, -(m.D0 + ar * m.p_t)])
    for row, fixed, value in ((0, ps_floor, 0.0), (1, q_cap, m.q_max), (2, pc_floor, 0.0)):
        if fixed:
            A[row] = 0.0
            A[row, row] = 1.0
            rhs[row] = value
    return np.linalg.solve(A, rhs)


def _kkt_ok(m, p_s, p_c, q, ps_floor, q_cap, pc_floor) -> bool:
    D = m.D0 - m.alpha * (p_s + m.rho * p_c) + m.beta * q
    g1, g2, g3 = foc_residuals(m, p_s, p_c, q)
    tol = _eps(p_s, p_c, q, D, m.D0)
    if D <= tol or p_s < -tol or p_c < -tol or q <= 0 or q > m.q_max + tol:
        return False
    if ps_floor and g1 > tol:
        return False
    if q_cap and g2 < -tol:
        return False
    if pc_floor and g3 > tol:
        return False
    return True


# enumeration order: interior, q cap, p_s floor, p_c floor, then combinations
_ACTIVE_SETS = sorted(itertools.product((False, True), repeat=3),
                      key=lambda t: (sum(t), (not t[1], not t[0], not t[2])))


def _regime_for(ps_floor, q_cap, pc_floor) -> Regime:
    if ps_floor:
        return Regime.ISP_PRICE_FLOOR
    if pc_floor:
        return Regime.CP_PRICE_FLOOR
    if q_cap:
        return Regime.QOS_CAPPED
    return Regime.INTERIOR


def solve_ne(m: SubscriptionMarket) -> SubscriptionOutcome:
    """Unique Nash equilibrium of the subscription price game.

    The interior closed form is tried first. Boundary cases are found by
    fixing the binding variables at their bounds, solving the remaining
    first-order conditions, and keeping the first candidate whose fixed
    variables have correctly signed derivatives. ``binding`` on the result
    lists every active bound; ``regime`` names the most significant one
    (price floors before the QoS cap).
    """
    if 6.0 * m.alpha * m.p_r <= m.beta ** 2:
        raise InvalidMarket("need 6*alpha*p_r > beta^2")

    for ps_floor, q_cap, pc_floor in _ACTIVE_SETS:
        if not (ps_floor or q_cap or pc_floor):
            p_s, p_c, q, _ = interior_closed_form(m)
        elif q_cap and not (ps_floor or pc_floor):
            p_s, p_c = fixed_qos_closed_form(m)
            q = m.q_max
        else:
            p_s, q, p_c = _solve_active(m, ps_floor, q_cap, pc_floor)
        if _kkt_ok(m, p_s, p_c, q, ps_floor, q_cap, pc_floor):
            binding = [name for name, on in (("p_s_floor", ps_floor), ("q_max", q_cap), ("p_c_floor", pc_floor)) if on]
            return _outcome(m, max(p_s, 0.0), max(p_c, 0.0), min(q, m.q_max),
                            _regime_for(ps_floor, q_cap, pc_floor), binding=binding)

    # No positive-demand KKT point, so prices are not pinned down. Report the
    # profile where each player's best-response formula, taken at the
    # zero-demand limit, is answered by the other's: the ISP prices at its
    # net marginal cost with q = 0, the CP at its unclamped optimum.
    p_s = max(0.0, -_margin(m))
    return _outcome(m, p_s, best_response_cp(m, p_s, 0.0), 0.0, Regime.ZERO_DEMAND)


def classify(m: SubscriptionMarket, p_s: float, p_c: float, q: float) -> Regime:
    """Regime tag for an arbitrary strategy profile (used by the iterative oracle)."""
    D = float(demand_subscription(m, p_s, p_c, q))
    tol = _eps(p_s, p_c, q, m.D0)
    if D <= tol:
        return Regime.ZERO_DEMAND
    return _regime_for(p_s <= tol, q >= m.q_max - tol, p_c <= tol)


def solve_ne_iterative(m: SubscriptionMarket, cfg: Optional[SolveConfig] = None) -> SubscriptionOutcome:
    """Equilibrium by alternating best responses from ``(p_r, p_r, q_max/2)``.

    Each sweep plays the ISP's best response and then the CP's. When the
    QoS-price coupling is strong the plain iteration can overshoot, so the
    step is averaged with the previous profile and the averaging weight is
    halved whenever the step size fails to shrink for three sweeps in a
    row. Any fixed point of the averaged map is a fixed point of the plain
    one.
    """
    cfg = cfg or DEFAULT_CONFIG
    p_s, p_c, q = m.p_r, m.p_r, 0.5 * m.q_max
    weight, last, stalls = 1.0, math.inf, 0
    for it in range(1, 50 * cfg.max_iter + 1):
        ns, nq = best_response_isp(m, p_c)
        nc = best_response_cp(m, ns, nq)
        step = max(abs(ns - p_s), abs(nq - q), abs(nc - p_c))
        p_s += weight * (ns - p_s)
        q += weight * (nq - q)
        p_c += weight * (nc - p_c)
        if step < cfg.abs_tol:
            return _outcome(m, p_s, p_c, q, classify(m, p_s, p_c, q), iterations=it)
        stalls = stalls + 1 if step >= last else 0
        if stalls >= 3:
            weight *= 0.5
            stalls = 0
        last = step
    raise NoConvergence(f"best-response iteration did not settle (last step {last:g})")


def qos_shift_sign(m: SubscriptionMarket) -> QosShift:
    """How a positive side payment moves the equilibrium QoS.

    The sign of ``1 - rho - delta`` decides it. The symbolic answer is
    cross-checked against the equilibria solved at ``p_t = 0`` and at
    ``m.p_t``; both must be interior.
    """
    if not m.p_t > 0:
        raise ValueError("qos_shift_sign needs a positive side payment p_t")
    k = 1.0 - m.rho - m.delta
    if abs(k) <= 1e-12:
        expected = QosShift.UNAFFECTED
    else:
        expected = QosShift.IMPROVED if k > 0 else QosShift.DEGRADED

    neutral = solve_ne(m.with_side_payment(0.0))
    charged = solve_ne(m)
    for label, out in (("p_t=0", neutral), (f"p_t={m.p_t:g}", charged)):
        if out.regime is not Regime.INTERIOR:
            raise RegimeMismatch(f"equilibrium at {label} is {out.regime}, not Interior")

    dq = charged.q - neutral.q
    if abs(dq) <= _eps(charged.q, neutral.q) * 1e-2:
        observed = QosShift.UNAFFECTED
    else:
        observed = QosShift.IMPROVED if dq > 0 else QosShift.DEGRADED
    if observed is not expected:
        raise RuntimeError(f"solved QoS moved {observed} but 1 - rho - delta = {k:g} predicts {expected}")
    return expected


def max_deviation_gain(m: SubscriptionMarket, out: SubscriptionOutcome, points: int = 201) -> tuple[float, float]:
    """Largest utility gain from a unilateral deviation on a grid.

    The ISP deviates over a ``points x points`` grid of ``(p_s, q)``; the CP
    over ``points`` prices. Grids span the feasible region around the
    equilibrium. Returns ``(isp_gain, cp_gain)``; both should be <= 0 up
    to rounding at a true equilibrium.
    """
    span_s = max(1.0, 2.0 * out.p_s, m.D0 / m.alpha)
    ps = np.linspace(0.0, out.p_s + span_s, points)
    qs = np.linspace(m.q_max / points, m.q_max, points)
    PS, Q = np.meshgrid(ps, qs)
    isp = utility_isp(m, PS, out.p_c, Q)
    isp_gain = float(np.max(isp) - out.u_isp)

    span_c = max(1.0, 2.0 * out.p_c, m.D0 / (m.alpha * m.rho))
    pc = np.linspace(0.0, out.p_c + span_c, points)
    cp = utility_cp_subscription(m, out.p_s, pc, out.q)
    cp_gain = float(np.max(cp) - out.u_cp)
    return isp_gain, cp_gain
