import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import a1, s1
from nonneutral import (
    BargainSetting,
    InvalidMarket,
    Normal,
    SubscriptionMarket,
    Timing,
    Uniform,
    ad_demand,
    attention_demand,
    demand_subscription,
    utility_cp_ad,
    utility_cp_subscription,
    utility_isp,
)

NE = (7.359832635983263, 12.719665271966527, 1.5899581589958158)


def test_market_validation():
    with pytest.raises(InvalidMarket):
        SubscriptionMarket(D0=200, alpha=1, beta=3, rho=1)  # 4 alpha p_r <= beta^2
    for bad in ({"alpha": 0}, {"beta": -1}, {"rho": 0}, {"delta": 1.5}, {"p_r": 0}, {"q_max": 0}, {"D0": -1}):
        kw = dict(D0=200, alpha=10, beta=0.5, rho=1)
        kw.update(bad)
        with pytest.raises(InvalidMarket):
            SubscriptionMarket(**kw)
    with pytest.raises(InvalidMarket):
        a1(K=0)
    with pytest.raises(InvalidMarket):
        Uniform(0)
    with pytest.raises(InvalidMarket):
        Normal(5, 0)


def test_bargain_setting():
    assert BargainSetting(0.3, "post").timing is Timing.POST
    with pytest.raises(ValueError):
        BargainSetting(1.5)


def test_demand_examples():
    m = s1()
    assert demand_subscription(m, *NE) == pytest.approx(63.598326, abs=1e-5)
    assert demand_subscription(m, 0, 0, 0) == 200
    assert demand_subscription(s1(rho=1), 100, 100, 0) == 0


def test_utility_examples():
    m = s1()
    assert utility_cp_subscription(m, *NE) == pytest.approx(808.949, abs=1e-3)
    assert utility_isp(m, *NE) == pytest.approx(401.9467, abs=1e-3)
    assert utility_cp_subscription(s1(p_t=3), 1, 3, 1) == 0
    assert utility_cp_subscription(m, 100, 100, 0) == 0
    assert utility_isp(m, 1.0, 5.0, 0.0) == 0
    taxed = [utility_isp(s1(delta=1, p_t=p), 5, 5, 1) for p in (-3, 0, 7)]
    assert taxed[0] == taxed[1] == taxed[2]


def test_utility_isp_needs_demand_on_ad_market():
    with pytest.raises(TypeError):
        utility_isp(a1(), 1.0)
    assert utility_isp(a1(), 3.0, q=1.0, demand=10.0) == pytest.approx(2 * 10 - 1)


def test_attention_demand_examples():
    a = a1()
    assert attention_demand(a, 5) == pytest.approx(100)
    assert attention_demand(a, 10) == 0
    assert attention_demand(a, 5, user_demand=10) == 10
    with pytest.raises(ValueError):
        attention_demand(a, 0)


def test_utility_cp_ad_examples():
    a = a1()
    assert utility_cp_ad(a, 3, 0, 0) == 0
    assert utility_cp_ad(a1(p_t=2), 2, 40, 5) == -5
    with pytest.raises(ValueError):
        utility_cp_ad(a, 3, 1, -1)


def test_ad_demand_clamps():
    a = a1()
    assert ad_demand(a, 0.0, 5.0, 0.0) == 0.0
    assert ad_demand(a, math.e - 1, 0.0, 2.0) == pytest.approx(10 + 1)


def test_distributions():
    u = Uniform(10)
    assert u.cdf(5) == 0.5 and u.sf(12) == 0 and u.pdf(11) == 0
    n = Normal(5, 2)
    assert n.sf(5) == pytest.approx(0.5, abs=1e-15)
    assert n.cdf(7) == pytest.approx(0.841344746, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.floats(50, 500), st.floats(1, 20), st.floats(0.1, 3), st.floats(0.2, 3),
       st.floats(0, 10), st.floats(0, 10), st.floats(0, 5))
def test_demand_monotone(D0, alpha, beta, rho, p_s, p_c, q):
    if 4 * alpha <= beta * beta:
        return
    m = SubscriptionMarket(D0=D0, alpha=alpha, beta=beta, rho=rho)
    d = demand_subscription(m, p_s, p_c, q)
    h = 1e-3
    assert demand_subscription(m, p_s + h, p_c, q) <= d
    assert demand_subscription(m, p_s, p_c + h, q) <= d
    assert demand_subscription(m, p_s, p_c, q + h) >= d


def test_cp_utility_second_difference():
    m = s1(p_t=1)
    h = 0.5
    vals = [utility_cp_subscription(m, 2.0, x, 1.0) for x in (4 - h, 4, 4 + h)]
    assert (vals[0] - 2 * vals[1] + vals[2]) / h ** 2 == pytest.approx(-2 * m.alpha * m.rho, rel=1e-9)


def test_isp_hessian_negative_definite():
    m = s1(p_t=1)
    h = 1e-3

    def u(ps, q):
        return utility_isp(m, ps, 3.0, q)

    ps, q = 4.0, 2.0
    uss = (u(ps + h, q) - 2 * u(ps, q) + u(ps - h, q)) / h ** 2
    uqq = (u(ps, q + h) - 2 * u(ps, q) + u(ps, q - h)) / h ** 2
    usq = (u(ps + h, q + h) - u(ps + h, q - h) - u(ps - h, q + h) + u(ps - h, q - h)) / (4 * h * h)
    assert uss < 0 and uss * uqq - usq ** 2 > 0


@pytest.mark.parametrize("dist", [Uniform(10), Normal(5, 2)])
def test_attention_monotone_in_price(dist):
    a = a1(dist=dist)
    prices = np.linspace(0.05, 15, 300)
    vals = [attention_demand(a, p) for p in prices]
    assert all(v1 <= v0 for v0, v1 in zip(vals, vals[1:]))
