"""Scenario execution and CSV emission."""

from __future__ import annotations

import csv
import io
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Union

from ..advertisement import solve_equilibrium_ad
from ..bargaining import (
    post_bargain_ad,
    post_bargain_subscription,
    pre_bargain_ad,
    pre_bargain_subscription,
)
from ..errors import NonNeutralError
from ..model import AdOutcome, Timing
from ..numerics import DEFAULT_CONFIG, SolveConfig
from ..subscription import solve_ne
from .config import SUBSCRIPTION, ScenarioConfig

CSV_COLUMNS = ("swept_var", "swept_value", "p_s", "p_c_or_c", "q", "D", "p_a",
               "u_isp", "u_cp", "p_t", "regime")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated scenario point.

    ``label`` names the swept variable and, when series are present, the
    series values (``p_t|K=10``). ``p_c_or_c`` holds the CP price for
    subscription runs and the investment for ad runs. When the solver
    failed, ``error`` holds the exception name and message and the numeric
    fields are ``None``.
    """

    label: str
    swept_value: Optional[float]
    point: tuple
    p_s: Optional[float] = None
    p_c_or_c: Optional[float] = None
    q: Optional[float] = None
    D: Optional[float] = None
    p_a: Optional[float] = None
    u_isp: Optional[float] = None
    u_cp: Optional[float] = None
    p_t: Optional[float] = None
    regime: str = ""
    iterations: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def scenario_points(cfg: ScenarioConfig) -> list[tuple[str, Optional[float], dict]]:
    """Enumerate (label, swept value, overrides) in output order."""
    series_keys = list(cfg.series)
    combos = list(itertools.product(*(cfg.series[k] for k in series_keys))) or [()]
    sweep_vals = cfg.sweep.values() if cfg.sweep else [None]
    base = cfg.sweep.var if cfg.sweep else ""
    points = []
    for combo in combos:
        overrides = dict(zip(series_keys, combo))
        tag = "|".join(f"{k}={v:g}" for k, v in overrides.items())
        label = "|".join(s for s in (base, tag) if s)
        for x in sweep_vals:
            ov = dict(overrides)
            if x is not None:
                ov[cfg.sweep.var] = x
            points.append((label, x, ov))
    return points


def evaluate_point(cfg: ScenarioConfig, label: str, x: Optional[float], overrides: dict,
                   solve_cfg: SolveConfig = DEFAULT_CONFIG) -> SweepRow:
    key = tuple(sorted(overrides.items()))
    try:
        market = cfg.market(overrides)
        setting = cfg.bargain_at(overrides)
        if setting is None:
            out = solve_ne(market) if cfg.model == SUBSCRIPTION else solve_equilibrium_ad(market, solve_cfg)
        elif cfg.model == SUBSCRIPTION:
            fn = pre_bargain_subscription if setting.timing is Timing.PRE else post_bargain_subscription
            out = fn(market, setting.gamma).outcome
        else:
            fn = pre_bargain_ad if setting.timing is Timing.PRE else post_bargain_ad
            out = fn(market, setting.gamma, solve_cfg).outcome
    except (NonNeutralError, ValueError, ArithmeticError) as exc:
        return SweepRow(label, x, key, regime="Error", error=f"{type(exc).__name__}: {exc}")
    is_ad = isinstance(out, AdOutcome)
    return SweepRow(
        label, x, key,
        p_s=float(out.p_s), p_c_or_c=float(out.c if is_ad else out.p_c), q=float(out.q), D=float(out.D),
        p_a=float(out.p_a) if is_ad else None, u_isp=float(out.u_isp), u_cp=float(out.u_cp),
        p_t=float(out.p_t), regime=str(out.regime), iterations=out.iterations,
    )


def _evaluate_star(args):
    return evaluate_point(*args)


def run_scenario(cfg: ScenarioConfig, workers: int = 1, solve_cfg: Optional[SolveConfig] = None) -> list[SweepRow]:
    """Evaluate every scenario point; failures are recorded per row.

    With ``workers > 1`` points are solved in a process pool; rows always
    come back in sweep order.
    """
    solve_cfg = solve_cfg or DEFAULT_CONFIG
    jobs = [(cfg, label, x, ov, solve_cfg) for label, x, ov in scenario_points(cfg)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_star, jobs))
    return [_evaluate_star(j) for j in jobs]


def _fmt(v) -> str:
    return "" if v is None else format(v, ".12g")


def emit_csv(rows: Iterable[SweepRow], destination: Union[str, TextIO, None] = None) -> str:
    """Write rows as CSV (header first) and return the text.

    ``destination`` may be a path, an open text stream, or ``None`` for
    standard output. Failed rows carry ``Error: ...`` in the regime column.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        regime = r.regime if r.ok else f"Error: {r.error}"
        writer.writerow([r.label, _fmt(r.swept_value), _fmt(r.p_s), _fmt(r.p_c_or_c), _fmt(r.q),
                         _fmt(r.D), _fmt(r.p_a), _fmt(r.u_isp), _fmt(r.u_cp), _fmt(r.p_t), regime])
    text = buf.getvalue()
    if destination is None:
        sys.stdout.write(text)
    elif isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        destination.write(text)
    return text
