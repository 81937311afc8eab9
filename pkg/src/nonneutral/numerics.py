"""One-dimensional numerical kernels: bracketing, bisection, golden-section
maximization, Gaussian tail integrals and monotone fixed-point crossings.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import MonotonicityViolation, NoBracket, NoConvergence

ScalarFn = Callable[[float], float]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SolveConfig:
    """Tolerances shared by the iterative kernels.

    Attributes:
        abs_tol: Absolute tolerance on the argument (interval width).
        max_iter: Iteration cap before ``NoConvergence`` is raised.
        bracket_expand: Geometric growth factor used by auto-bracketing.
    """

    abs_tol: float = 1e-10
    max_iter: int = 200
    bracket_expand: float = 2.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.bracket_expand > 1:
            raise ValueError("bracket_expand must be > 1")


DEFAULT_CONFIG = SolveConfig()

# 60 doublings of the initial width before giving up on a bracket
MAX_EXPANSIONS = 60


def bisect_root(f: ScalarFn, lo: float, hi: float, cfg: Optional[SolveConfig] = None) -> float:
    """Find a sign change of ``f`` inside ``[lo, hi]`` by bisection.

    Iteration stops once the bracket is narrower than ``cfg.abs_tol`` or
    cannot be split any further in floating point.

    Raises:
        NoBracket: ``f(lo)`` and ``f(hi)`` have the same strict sign.
        NoConvergence: ``cfg.max_iter`` halvings were not enough.
    """
    cfg = cfg or DEFAULT_CONFIG
    if lo > hi:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoBracket(f"f({lo:g})={flo:g} and f({hi:g})={fhi:g} share a sign")

    for _ in range(cfg.max_iter):
        mid = lo + 0.5 * (hi - lo)
        if hi - lo <= cfg.abs_tol or mid <= lo or mid >= hi:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    raise NoConvergence(f"bisection did not reach width {cfg.abs_tol:g} in {cfg.max_iter} steps")


def expand_bracket(f: ScalarFn, lo: float, hi: float, cfg: Optional[SolveConfig] = None) -> tuple[float, float]:
    """Grow ``hi`` geometrically away from ``lo`` until ``f`` changes sign.

    ``lo`` stays fixed; the width ``hi - lo`` is multiplied by
    ``cfg.bracket_expand`` at every step, at most ``MAX_EXPANSIONS`` times.
    Works in either direction (``hi < lo`` expands downward).
    """
    cfg = cfg or DEFAULT_CONFIG
    flo = f(lo)
    width = hi - lo
    if width == 0.0:
        raise ValueError("initial bracket has zero width")
    if flo == 0.0:
        return lo, lo
    for _ in range(MAX_EXPANSIONS + 1):
        b = lo + width
        fb = f(b)
        if fb == 0.0 or (fb > 0) != (flo > 0):
            return (lo, b) if b > lo else (b, lo)
        width *= cfg.bracket_expand
    raise NoBracket(f"no sign change within {MAX_EXPANSIONS} expansions from {lo:g}")


def golden_max(f: ScalarFn, lo: float, hi: float, cfg: Optional[SolveConfig] = None) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Returns ``(argmax, max)``. The end points are compared against the final
    interior estimate, so a maximum sitting on the boundary is found too.

    The argmax of a smooth maximum is only resolvable from function values
    to about ``sqrt(machine eps)`` relative to the scale of ``f``; asking for
    a tighter ``abs_tol`` shrinks the bracket but not the true error.
    """
    cfg = cfg or DEFAULT_CONFIG
    if lo > hi:
        lo, hi = hi, lo
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(cfg.max_iter):
        if b - a <= cfg.abs_tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    else:
        raise NoConvergence(f"golden search did not reach width {cfg.abs_tol:g} in {cfg.max_iter} steps")

    x = 0.5 * (a + b)
    best = (x, f(x))
    for cand in ((c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))):
        if cand[1] > best[1]:
            best = cand
    return best


def gaussian_upper_integral(mu: float, sigma: float, p: float) -> float:
    """Return the unnormalized Gaussian tail ``int_p^inf exp(-(t-mu)^2 / (2 sigma^2)) dt``.

    Equal to ``sqrt(2 pi sigma^2) * (1 - X(p))`` for the normal CDF ``X``;
    evaluated through ``math.erfc`` so the far tail keeps full relative precision.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    z = (p - mu) / (sigma * math.sqrt(2.0))
    return 0.5 * sigma * _SQRT_2PI * math.erfc(z)


def gaussian_lower_integral(mu: float, sigma: float, p: float) -> float:
    """Complement of :func:`gaussian_upper_integral` (integral from -inf to ``p``)."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    z = (p - mu) / (sigma * math.sqrt(2.0))
    return 0.5 * sigma * _SQRT_2PI * math.erfc(-z)


@dataclass(frozen=True)
class Crossing:
    """Outcome of :func:`fixed_point_monotone`.

    ``status`` is ``"crossing"`` when the two curves meet inside the
    interval, in which case ``x`` is the crossing point and ``level`` the
    common value. ``"increasing_dominates"`` means the increasing curve is
    already on top at ``lo``; ``"decreasing_dominates"`` means the
    decreasing curve is still on top at ``hi``. For both boundary reports
    ``x`` is the dominant end and ``level`` is ``None``.
    """

    status: str
    x: float
    level: Optional[float] = None

    @property
    def found(self) -> bool:
        return self.status == "crossing"


def _check_monotone(fn: ScalarFn, xs, sign: int, name: str) -> list[float]:
    values = [fn(x) for x in xs]
    for x0, x1, v0, v1 in zip(xs, xs[1:], values, values[1:]):
        if math.isnan(v0) or math.isnan(v1):
            raise MonotonicityViolation(f"{name} returned NaN near x={x1:g}")
        if v0 == v1:
            continue
        # infinite endpoints compare exactly; finite ones get a rounding allowance
        slack = 0.0 if math.isinf(v0) or math.isinf(v1) else 1e-9 * max(1.0, abs(v0), abs(v1))
        if sign * (v1 - v0) < -slack:
            raise MonotonicityViolation(f"{name} not monotone between {x0:g} and {x1:g}")
    return values


def fixed_point_monotone(
    increasing: ScalarFn,
    decreasing: ScalarFn,
    lo: float,
    hi: float,
    cfg: Optional[SolveConfig] = None,
    samples: int = 17,
) -> Crossing:
    """Locate where a nondecreasing curve meets a nonincreasing one on ``[lo, hi]``.

    Monotonicity of both curves is checked on ``samples`` evenly spaced
    points before solving. The crossing is unique whenever it exists; if the
    difference does not change sign, a boundary report says which curve
    dominates so the caller can pick the corner regime.

    Raises:
        MonotonicityViolation: a sampled curve moves the wrong way.
        NoConvergence: the bisection cap was hit.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not hi > lo:
        raise ValueError("need lo < hi")
    xs = [lo + (hi - lo) * i / (samples - 1) for i in range(samples)]
    _check_monotone(increasing, xs, +1, "increasing curve")
    _check_monotone(decreasing, xs, -1, "decreasing curve")

    def gap(x):
        return decreasing(x) - increasing(x)

    if gap(lo) <= 0:
        return Crossing("increasing_dominates", lo)
    if gap(hi) >= 0:
        return Crossing("decreasing_dominates", hi)
    x = bisect_root(gap, lo, hi, cfg)
    return Crossing("crossing", x, decreasing(x))
