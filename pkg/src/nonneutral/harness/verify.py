"""Built-in verification suites behind ``nonneutral verify``.

Each suite returns a :class:`SuiteReport` that serializes to JSON. Suites
are fast spot checks of the solvers against closed forms and brute-force
searches; the full acceptance run lives in the test suite.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from ..advertisement import (
    ad_revenue,
    check_ad_concavity,
    fixed_point_residuals,
    investment_monotonicity,
    solve_equilibrium_ad,
    solve_equilibrium_ad_in_investment,
)
from ..bargaining import (
    nash_side_payment_numeric,
    post_bargain_subscription,
    pre_bargain_subscription,
    pre_bargain_subscription_numeric,
)
from ..model import AdMarket, Normal, Regime, SubscriptionMarket, Uniform
from ..numerics import (
    DEFAULT_CONFIG,
    SolveConfig,
    bisect_root,
    fixed_point_monotone,
    gaussian_upper_integral,
    golden_max,
)
from ..subscription import QosShift, max_deviation_gain, qos_shift_sign, solve_ne, solve_ne_iterative


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [asdict(c) for c in self.checks], "table": self.table}


def _s1(rho=0.5, delta=0.0, p_t=0.0):
    return SubscriptionMarket(D0=200, alpha=10, beta=0.5, rho=rho, delta=delta, p_t=p_t)


def _a1(K=10.0, p_t=0.0, dist=None):
    return AdMarket(D0_0=0, K=K, MB=1000, dist=dist or Uniform(10), alpha=10, beta=0.5, p_t=p_t)


def suite_kernels(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("kernels")
    half = gaussian_upper_integral(5.0, 2.0, 5.0)
    expected = 0.5 * math.sqrt(2 * math.pi) * 2.0
    r.add("gaussian half mass", abs(half / expected - 1) < 1e-10, f"{half!r} vs {expected!r}")
    root = bisect_root(lambda x: x * x - 2, 0, 2, cfg)
    r.add("bisect sqrt(2)", abs(root - math.sqrt(2)) <= cfg.abs_tol, f"{root!r}")
    x, fx = golden_max(lambda t: math.log(t) - t, 0.1, 5.0, SolveConfig(abs_tol=1e-7))
    r.add("golden max of log(x) - x", abs(x - 1) < 1e-6 and abs(fx + 1) < 1e-12, f"x={x!r}")
    cross = fixed_point_monotone(lambda t: t, lambda t: 2 - t, 0, 2, cfg)
    r.add("monotone crossing", cross.found and abs(cross.x - 1) <= cfg.abs_tol, f"{cross}")
    return r


def suite_lemma4(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("lemma4")
    for rho in (0.5, 0.75, 1.0, 1.25, 1.5):
        for delta in (0.0, 0.25, 0.5):
            m = _s1(rho, delta, p_t=2.0)
            k = 1 - rho - delta
            want = QosShift.UNAFFECTED if abs(k) < 1e-12 else (QosShift.IMPROVED if k > 0 else QosShift.DEGRADED)
            try:
                got = qos_shift_sign(m)
                ok = got is want
                detail = str(got)
            except Exception as exc:  # report, do not abort the table
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            q0, q2 = solve_ne(m.with_side_payment(0)).q, solve_ne(m).q
            r.table.append({"rho": rho, "delta": delta, "1-rho-delta": k, "q(p_t=0)": q0,
                            "q(p_t=2)": q2, "shift": detail})
            r.add(f"rho={rho:g} delta={delta:g}", ok, detail)
    return r


def suite_lemma6(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("lemma6")
    grid = [0.5 * i for i in range(7)]
    for K in (10.0, 20.0, 30.0):
        pairs = investment_monotonicity(_a1(K), grid, cfg)
        cs = [c for _, c in pairs]
        ok, clamped = True, False
        for c0, c1 in zip(cs, cs[1:]):
            if clamped:
                ok &= c1 == 0.0
            elif c1 == 0.0:
                clamped = True
            else:
                ok &= c1 < c0
        r.table.append({"K": K, "c": dict(zip(grid, cs))})
        r.add(f"K={K:g} investment decreasing", ok, ", ".join(f"{c:.6g}" for c in cs))
    return r


def suite_concavity(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("concavity")
    normal = _a1(dist=Normal(5.0, 2.0))
    rep = check_ad_concavity(normal, np.linspace(0.1, 500.0, 500), tolerance=1e-8)
    r.add("normal second differences <= 1e-8", rep.ok,
          f"max={float(np.max(rep.second_differences)):.3g}")
    uni = _a1()
    worst = 0.0
    for D in np.linspace(0.1, 500.0, 500):
        exact = 1000 * 10 * D / (1000 + 10 * D)
        worst = max(worst, abs(ad_revenue(uni, D) - exact))
    r.add("uniform revenue matches MBvD/(MB+Dv)", worst <= 1e-10, f"max err {worst:.3g}")
    return r


def suite_ne(cfg: SolveConfig, draws: int = 200, seed: int = 7) -> SuiteReport:
    r = SuiteReport("ne")
    rng = random.Random(seed)
    worst_gap, worst_gain, n = 0.0, -math.inf, 0
    while n < draws:
        lu = lambda lo, hi: math.exp(rng.uniform(math.log(lo), math.log(hi)))
        alpha, beta, p_r = lu(1, 20), lu(0.1, 3), lu(0.5, 2)
        if 4 * alpha * p_r <= beta * beta:
            continue
        m = SubscriptionMarket(D0=lu(50, 500), alpha=alpha, beta=beta, rho=lu(0.2, 3),
                               delta=rng.uniform(0, 0.5), p_r=p_r, q_max=lu(0.5, 20),
                               p_t=rng.uniform(-5, 5))
        n += 1
        a, b = solve_ne(m), solve_ne_iterative(m, cfg)
        worst_gap = max(worst_gap, abs(a.p_s - b.p_s), abs(a.p_c - b.p_c), abs(a.q - b.q))
        if n % 10 == 0:
            worst_gain = max(worst_gain, *max_deviation_gain(m, a))
    r.add("closed form agrees with best-response iteration", worst_gap <= 1e-6, f"max gap {worst_gap:.3g}")
    r.add("no improving grid deviation", worst_gain <= 1e-8, f"max gain {worst_gain:.3g}")
    return r


def suite_bargain(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("bargain")
    pre = pre_bargain_subscription(_s1(1.5), 0.5)
    num = pre_bargain_subscription_numeric(_s1(1.5), 0.5, cfg)
    r.add("pre-bargain rho=1.5 closed form", abs(pre.p_t + 380 / 79.625) < 1e-9 and pre.outcome.p_c == 0,
          f"p_t={pre.p_t!r}")
    r.add("pre-bargain rho=1.5 numeric agrees", abs(pre.p_t - num.p_t) < 1e-5, f"numeric {num.p_t!r}")
    r.add("pre-bargain gamma invariance",
          pre_bargain_subscription(_s1(0.5), 0.1).p_t == pre_bargain_subscription(_s1(0.5), 0.9).p_t)
    post = post_bargain_subscription(_s1(1.5), 0.5)
    o = post.outcome
    r.add("post-bargain rho=1.5 values",
          post.p_t == -4.75 and abs(o.q - 2.389937) < 1e-5 and abs(o.p_s - 10.559748) < 1e-5,
          f"p_t={post.p_t!r} q={o.q!r} p_s={o.p_s!r}")
    base = _s1(1.5)

    def u_cp(p_t):
        return (o.p_c - p_t) * o.D

    def u_isp(p_t):
        return (o.p_s - base.p_r + p_t) * o.D - base.p_r * o.q ** 2

    lo = base.p_r * o.q ** 2 / o.D - (o.p_s - base.p_r)
    x = nash_side_payment_numeric(u_cp, u_isp, lo, o.p_c, 0.5, cfg)
    r.add("post-bargain numeric Nash maximizer", abs(x - post.p_t) < 1e-4, f"numeric {x!r}")
    return r


def suite_ad(cfg: SolveConfig) -> SuiteReport:
    r = SuiteReport("ad")
    a = _a1()
    out = solve_equilibrium_ad(a, cfg)
    alt = solve_equilibrium_ad_in_investment(a, cfg)
    gap, foc = fixed_point_residuals(a, out)
    r.add("A1 K=10 interior", out.regime is Regime.INTERIOR, str(out.regime))
    r.add("fixed-point residuals < 1e-8", abs(gap) < 1e-8 and abs(foc) < 1e-8, f"{gap:.3g}, {foc:.3g}")
    r.add("investment-space solve agrees", abs(out.c - alt.c) < 1e-6, f"{out.c!r} vs {alt.c!r}")
    r.table.append({"c": out.c, "D": out.D, "p_s": out.p_s, "q": out.q, "p_a": out.p_a})
    return r


SUITES: dict[str, Callable[[SolveConfig], SuiteReport]] = {
    "kernels": suite_kernels,
    "lemma4": suite_lemma4,
    "lemma6": suite_lemma6,
    "concavity": suite_concavity,
    "ne": suite_ne,
    "bargain": suite_bargain,
    "ad": suite_ad,
}


def run_suites(name: str, cfg: Optional[SolveConfig] = None) -> list[SuiteReport]:
    """Run one suite, or every suite for ``"all"``. Unknown names raise ``KeyError``."""
    cfg = cfg or DEFAULT_CONFIG
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
    return [SUITES[n](cfg) for n in names]
