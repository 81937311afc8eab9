import math

import numpy as np
import pytest

from conftest import a1, s1
from nonneutral import (
    AdMarket,
    InfeasibleMarket,
    InvalidMarket,
    NoInteriorSolution,
    NonpositiveUtility,
    Uniform,
    nash_log_objective,
    post_bargain_ad,
    post_bargain_subscription,
    pre_bargain_ad,
    pre_bargain_subscription,
    pre_bargain_subscription_numeric,
    solve_equilibrium_ad,
    solve_ne,
    utility_cp_subscription,
    utility_isp,
)
from nonneutral.bargaining import (
    nash_side_payment_numeric,
    post_bargain_ad_fixed_points,
    post_bargain_ad_residuals,
    post_bargain_side_payment,
)


def test_nash_objective_examples():
    assert nash_log_objective(math.e, math.e, 0.5) == pytest.approx(1.0)
    for g in (0, 0.3, 1):
        assert nash_log_objective(1, 1, g) == 0
    out = solve_ne(s1())
    assert nash_log_objective(out.u_isp, out.u_cp, 0.5) == pytest.approx(6.346, abs=1e-3)
    with pytest.raises(NonpositiveUtility):
        nash_log_objective(0, 1, 0.5)


def test_pre_subscription_closed_forms():
    lo = pre_bargain_subscription(s1(0.5), 0.5)
    assert lo.p_t == pytest.approx(439.75 / 49.75, abs=1e-12) and lo.outcome.p_s == pytest.approx(0, abs=1e-12)
    hi = pre_bargain_subscription(s1(1.5), 0.5)
    assert hi.p_t == pytest.approx(-380 / 79.625, abs=1e-12)
    assert hi.outcome.p_c == pytest.approx(0, abs=1e-12) and hi.outcome.p_s == pytest.approx(12.93, abs=5e-3)
    p_t, outcome = hi
    assert p_t == hi.p_t and outcome is hi.outcome


def test_pre_subscription_gamma_invariant():
    for rho in (0.5, 1.5):
        assert pre_bargain_subscription(s1(rho), 0.1).p_t == pre_bargain_subscription(s1(rho), 0.9).p_t


def test_pre_subscription_rho_one_indeterminate():
    r = pre_bargain_subscription(s1(1.0), 0.5)
    assert r.indeterminate
    assert abs(r.certificate["U(p_t=-1)"] - r.certificate["U(p_t=+1)"]) < 1e-10


def test_pre_subscription_preconditions():
    with pytest.raises(InvalidMarket):
        pre_bargain_subscription(s1(0.5, delta=0.2), 0.5)
    with pytest.raises(ValueError):
        pre_bargain_subscription(s1(0.5), 1.2)
    from nonneutral import SubscriptionMarket
    with pytest.raises(InfeasibleMarket):
        pre_bargain_subscription(SubscriptionMarket(D0=5, alpha=10, beta=0.5, rho=1.5), 0.5)


def test_pre_subscription_numeric_rho_above_one():
    num = pre_bargain_subscription_numeric(s1(1.5), 0.5)
    assert num.p_t == pytest.approx(-380 / 79.625, abs=1e-5)


def test_pre_subscription_rho_below_one_kink():
    # the closed form sits where the ISP price reaches 0; the Nash product keeps
    # rising beyond it while the ISP stays on its price floor
    closed = pre_bargain_subscription(s1(0.5), 0.5)
    num = pre_bargain_subscription_numeric(s1(0.5), 0.5)
    u = lambda o: nash_log_objective(o.u_isp, o.u_cp, 0.5)
    assert u(num.outcome) > u(closed.outcome)
    assert num.p_t > closed.p_t and num.outcome.p_s == pytest.approx(0, abs=1e-9)


def _perturbation_never_helps(solve, p_t, gamma, eps=1e-3):
    base = solve(p_t)
    f0 = nash_log_objective(base.u_isp, base.u_cp, gamma)
    for dp in (-eps, eps):
        o = solve(p_t + dp)
        if o.u_isp > 0 and o.u_cp > 0:
            assert nash_log_objective(o.u_isp, o.u_cp, gamma) <= f0 + 1e-12


def test_pre_subscription_perturbation_rho_above_one():
    r = pre_bargain_subscription(s1(1.5), 0.5)
    _perturbation_never_helps(lambda p: solve_ne(s1(1.5, p_t=p)), r.p_t, 0.5)


def test_post_subscription_rho_above_one():
    r = post_bargain_subscription(s1(1.5), 0.5)
    o = r.outcome
    assert r.p_t == -4.75
    assert (o.q, o.p_s, o.p_c) == pytest.approx((2.389937, 10.559748, 0), abs=1e-5)
    assert o.u_cp == pytest.approx(o.u_isp, rel=1e-12)
    assert post_bargain_subscription(s1(1.5), 1.0).p_t == 0


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_post_subscription_gamma_affine(gamma):
    assert post_bargain_subscription(s1(1.5), gamma).p_t == pytest.approx(-(1 - gamma) * 190 / 20, abs=1e-12)


def test_post_subscription_rho_one_family():
    r = post_bargain_subscription(s1(1.0), 0.5)
    assert r.indeterminate and r.outcome.p_c == 0
    assert r.outcome.p_s + r.outcome.p_c == pytest.approx(1 + 380 / 39.75, abs=1e-10)


def _joint(m, p_s, p_c, q):
    return (p_s + p_c - m.p_r) * np.maximum(0, m.D0 - m.alpha * (p_s + m.rho * p_c) + m.beta * q) - m.p_r * q * q


@pytest.mark.parametrize("rho", [0.5, 0.8, 1.5, 2.5])
def test_post_subscription_no_profitable_deviation(rho):
    # both players receive a fixed share of the joint surplus once p_t is bargained
    m = s1(rho)
    o = post_bargain_subscription(m, 0.5).outcome
    j0 = _joint(m, o.p_s, o.p_c, o.q)
    ps, qs = np.meshgrid(np.linspace(0, 3 * o.p_s + 20, 301), np.linspace(0, m.q_max, 301))
    assert np.max(_joint(m, ps, o.p_c, qs)) <= j0 + 1e-9
    pcs = np.linspace(0, 3 * o.p_c + 20, 2001)
    assert np.max(_joint(m, o.p_s, pcs, o.q)) <= j0 + 1e-9


def test_post_subscription_side_payment_is_nash_optimal():
    m = s1(1.5)
    r = post_bargain_subscription(m, 0.5)
    o = r.outcome
    x = nash_side_payment_numeric(
        lambda p: float(utility_cp_subscription(m.with_side_payment(p), o.p_s, o.p_c, o.q)),
        lambda p: float(utility_isp(m.with_side_payment(p), o.p_s, o.p_c, o.q)),
        -20, 20, 0.5)
    assert x == pytest.approx(r.p_t, abs=1e-4)
    assert post_bargain_side_payment(o.p_s, o.p_c, o.q, o.D, 1.0, 0.5) == r.p_t
    with pytest.raises(InfeasibleMarket):
        post_bargain_side_payment(1, 1, 1, 0, 1, 0.5)


def test_pre_ad_trends_in_investment_scale():
    pts = [pre_bargain_ad(a1(K), 0.5).p_t for K in (10, 20, 30)]
    assert pts[0] >= pts[1] >= pts[2] and pts[2] < 0


def test_pre_ad_is_local_maximum():
    r = pre_bargain_ad(a1(20), 0.5)
    _perturbation_never_helps(lambda p: solve_equilibrium_ad(a1(20, p)), r.p_t, 0.5)


def test_post_ad_c_zero_point():
    a = a1(10)
    assert a.alpha * (1 + 0) / a.K == 1


def test_post_ad_k10_not_interior():
    with pytest.raises(NoInteriorSolution) as exc:
        post_bargain_ad(a1(10), 0.5)
    (D, c, p_s), = exc.value.fixed_points
    assert D == pytest.approx(a1().alpha * (1 + c) / 10) and p_s < 0


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_post_ad_interior_split(gamma):
    r = post_bargain_ad(a1(20), gamma)
    o = r.outcome
    assert o.u_cp / o.u_isp == pytest.approx((1 - gamma) / gamma, rel=1e-9)
    assert max(map(abs, post_bargain_ad_residuals(a1(20), o))) < 1e-8
    assert o.p_s > 0 and o.q > 0 and o.c > 0 and "DualRoot" not in o.notes


def test_post_ad_dual_root():
    a = AdMarket(D0_0=0, K=8, MB=7.5, dist=Uniform(1), alpha=3.5, beta=4.4, p_r=2.4)
    roots, unique = post_bargain_ad_fixed_points(a)
    assert not unique and len(roots) == 2
    r = post_bargain_ad(a, 0.5)
    assert "DualRoot" in r.outcome.notes and r.outcome.D == pytest.approx(max(roots))
