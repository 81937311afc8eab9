import pytest

from nonneutral import AdMarket, SubscriptionMarket, Uniform


def s1(rho=0.5, delta=0.0, p_t=0.0, **kw):
    return SubscriptionMarket(D0=200, alpha=10, beta=0.5, rho=rho, delta=delta, p_r=1, p_t=p_t, **kw)


def a1(K=10.0, p_t=0.0, dist=None, **kw):
    return AdMarket(D0_0=0, K=K, MB=1000, dist=dist or Uniform(10), alpha=10, beta=0.5,
                    delta=0, p_r=1, p_t=p_t, **kw)


@pytest.fixture
def S1():
    return s1


@pytest.fixture
def A1():
    return a1


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
