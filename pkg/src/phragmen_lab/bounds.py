"""
PJR-degree bounds for the Phragmén and Thiele families.

Every "largest l such that ..." bound is evaluated by an ascending integer
scan in exact arithmetic and clamped to ``[0, k]``; no logarithms are taken
on the decision path. ``gamma`` must be an exact rational in ``(0, 1)``;
the evaluators a PJR check may call with the whole electorate also accept
``gamma = 1``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath

from .functions import CostFunction, IrrationalValue, SpeedSchedule, ThieleWeights, as_fraction

_GUARD = 1e-9
_MP_DPS = 80


def _gamma(gamma, allow_one: bool = False) -> Fraction:
    gamma = as_fraction(gamma)
    if not (0 < gamma < 1 or (allow_one and gamma == 1)):
        raise ValueError(f"gamma={gamma} outside (0, 1)")
    return gamma


def _inverse_speed_sums(alpha: SpeedSchedule, k: int) -> list[Fraction]:
    """``[0, 1/a(1), 1/a(1)+1/a(2), ...]`` up to ``k`` terms."""
    sums = [Fraction(0)]
    for i in range(1, k + 1):
        sums.append(sums[-1] + 1 / alpha(i))
    return sums


def f_alpha_exact(alpha: SpeedSchedule, gamma, k: int, strict: bool = False) -> int:
    """
    Largest ``l`` with ``sum_{i<=l} 1/alpha(i) <= (k-l+1) * gamma/(1-gamma)``.

    ``strict`` asks for ``<`` instead, which is the version that survives
    adversarial tie-breaking (at equality the group may lose a tie).
    """
    gamma = _gamma(gamma, allow_one=True)
    if gamma == 1:
        return k
    ratio = gamma / (1 - gamma)
    sums = _inverse_speed_sums(alpha, k)
    if strict:
        return max(l for l in range(k + 1) if l == 0 or sums[l] < (k - l + 1) * ratio)
    return max(l for l in range(k + 1) if sums[l] <= (k - l + 1) * ratio)


def f_alpha_simple(alpha: SpeedSchedule, gamma, k: int) -> int:
    """Largest ``l`` with ``sum_{i<=l} 1/alpha(i) <= gamma * (k+1)``."""
    gamma = _gamma(gamma, allow_one=True)
    sums = _inverse_speed_sums(alpha, k)
    return max(l for l in range(k + 1) if sums[l] <= gamma * (k + 1))


def f_alpha_geometric_closed(q, gamma, k: int) -> int:
    """
    ``floor(log_{1/q}(gamma(k+1)(1/q - 1) + 1) - 1)`` for ``alpha(i) = q**(i-1)``,
    i.e. the largest ``e`` with ``(1/q)**(e+1) <= gamma(k+1)(1/q - 1) + 1``,
    clamped to ``[0, k]``.
    """
    q, gamma = as_fraction(q), _gamma(gamma)
    if not 0 < q < 1:
        raise ValueError("closed form needs 0 < q < 1")
    target = gamma * (k + 1) * (1 / q - 1) + 1
    base = 1 / q
    e = 0
    while e < k and base ** (e + 2) <= target:
        e += 1
    return e if base ** (e + 1) <= target else 0


def _beta_pair(beta: CostFunction, gamma: Fraction):
    """``(beta(gamma), beta(1-gamma))`` exactly, or None when irrational."""
    try:
        return beta.exact(gamma), beta.exact(1 - gamma)
    except IrrationalValue:
        return None


def f_beta_expression(beta: CostFunction, gamma, k: int):
    """Un-floored ``(k+1) g b(1-g) / ((1-g) b(g) + g b(1-g))``; Fraction when exact."""
    gamma = _gamma(gamma, allow_one=True)
    pair = _beta_pair(beta, gamma)
    if pair is not None:
        bg, bc = pair
        return (k + 1) * gamma * bc / ((1 - gamma) * bg + gamma * bc)
    bg, bc = beta.approx(gamma), beta.approx(1 - gamma)
    g = float(gamma)
    return (k + 1) * g * bc / ((1 - g) * bg + g * bc)


def _mp_floor(compute: Callable, approx: float, strict: bool = False) -> int:
    """
    Floor of a real quantity, re-evaluated at high precision near integers.
    With ``strict``, the largest integer strictly below it.
    """
    nearest = round(approx)
    if abs(approx - nearest) > _GUARD:
        return math.floor(approx)
    ctx = mpmath.mp.clone()
    ctx.dps = _MP_DPS
    value = compute(ctx)
    if abs(value - nearest) < ctx.mpf(10) ** (-(_MP_DPS - 20)):
        return int(nearest) - 1 if strict else int(nearest)
    return int(ctx.floor(value))


def _mp_frac(ctx, x: Fraction):
    return ctx.mpf(x.numerator) / x.denominator


def f_beta(beta: CostFunction, gamma, k: int, strict: bool = False) -> int:
    """
    Floor of :func:`f_beta_expression`, clamped to ``[0, k]``; with
    ``strict``, the largest integer strictly below the expression.
    """
    gamma = _gamma(gamma, allow_one=True)
    value = f_beta_expression(beta, gamma, k)
    if isinstance(value, Fraction):
        floored = math.ceil(value) - 1 if strict else math.floor(value)
    else:

        def compute(ctx):
            g = _mp_frac(ctx, gamma)
            bg, bc = beta.mp(gamma, ctx), beta.mp(1 - gamma, ctx)
            return (k + 1) * g * bc / ((1 - g) * bg + g * bc)

        floored = _mp_floor(compute, value, strict)
    return min(max(floored, 0), k)


def f_beta_simple_check(beta: CostFunction, gamma, k: int) -> bool:
    """
    Whether ``f_beta`` meets its simplified lower bound: ``floor((k+1)g)`` for
    ``g >= 1/2`` and ``floor((k+1) g b(1-g)/b(g))`` for ``g <= 1/2``.
    """
    gamma = _gamma(gamma)
    value = f_beta(beta, gamma, k)
    bounds = []
    if gamma >= Fraction(1, 2):
        bounds.append(min(math.floor((k + 1) * gamma), k))
    if gamma <= Fraction(1, 2):
        pair = _beta_pair(beta, gamma)
        if pair is not None:
            bounds.append(min(math.floor((k + 1) * gamma * pair[1] / pair[0]), k))
        else:
            approx = (k + 1) * float(gamma) * beta.approx(1 - gamma) / beta.approx(gamma)

            def compute(ctx):
                g = _mp_frac(ctx, gamma)
                return (k + 1) * g * beta.mp(1 - gamma, ctx) / beta.mp(gamma, ctx)

            bounds.append(min(_mp_floor(compute, approx), k))
    return all(value >= b for b in bounds)


def _max_x_lambda(lam: ThieleWeights, k: int) -> Fraction:
    return max(x * lam(x) for x in range(1, k + 1))


def thiele_lower(lam: ThieleWeights, gamma, k: int) -> int:
    """Largest ``f <= k`` with ``(k-f) lambda(1+f) >= (1-g)/g * max_x x lambda(x)``."""
    gamma = _gamma(gamma, allow_one=True)
    rhs = (1 - gamma) / gamma * _max_x_lambda(lam, k)
    valid = [f for f in range(k + 1) if (k - f) * lam(1 + f) >= rhs]
    return max(valid, default=0)


def thiele_upper(lam: ThieleWeights, gamma, k: int) -> int:
    """
    Largest ``f`` such that ``(k-f+x+1) lambda(f) >= (1-g)/g * x lambda(x)``
    for every ``x`` in ``1..k-f+1``; 0 when no positive ``f`` qualifies.
    """
    gamma = _gamma(gamma)
    ratio = (1 - gamma) / gamma
    xl = [None] + [x * lam(x) for x in range(1, k + 2)]

    def ok(f):
        return all((k - f + x + 1) * lam(f) >= ratio * xl[x] for x in range(1, k - f + 2))

    return max((f for f in range(1, k + 1) if ok(f)), default=0)


# ---------------------------------------------------------------------------
# smooth (pre-floor) counterparts used for curve derivatives


def _piecewise_root(sums, slopes, k, rhs_at, rhs_slope):
    """
    Root of ``S(l) = R(l)`` on ``[0, k]`` where ``S`` linearly interpolates
    ``sums`` (increasing) and ``R(l) = rhs_at - rhs_slope * l``.
    """
    for j in range(k):
        if sums[j + 1] > rhs_at - rhs_slope * (j + 1):
            a = slopes[j + 1]
            return (rhs_at - sums[j] + j * a) / (a + rhs_slope)
    return Fraction(k)


def _geometric_root(alpha: SpeedSchedule, k: int, rhs_at: Fraction, rhs_slope: Fraction):
    """
    Real root of ``S(l) = rhs_at - rhs_slope * l`` where ``S`` is the smooth
    extension ``c (r**l - 1) / (r - 1)`` of the inverse-speed partial sums of
    a geometric schedule (``r = 1/q``; ``c = 1`` or ``r``).
    """
    ctx = mpmath.mp.clone()
    ctx.dps = 30
    r = _mp_frac(ctx, 1 / alpha.q)
    c = r if alpha.kind == "geomshift" else ctx.mpf(1)
    a, b = _mp_frac(ctx, rhs_at), _mp_frac(ctx, rhs_slope)

    def gap(l):
        if r == 1:
            return c * l - (a - b * l)
        return c * (r**l - 1) / (r - 1) - (a - b * l)

    lo, hi = ctx.mpf(0), ctx.mpf(k + 1)
    while gap(hi) < 0:
        hi *= 2
    for _ in range(120):
        mid = (lo + hi) / 2
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return min(float((lo + hi) / 2), float(k))


def alpha_exact_smooth(alpha: SpeedSchedule, gamma, k: int):
    """
    Real-valued relaxation of :func:`f_alpha_exact`. Geometric schedules use
    the smooth geometric-sum extension; other schedules interpolate the
    partial sums linearly (an exact rational). The floor of either is the
    integer bound.
    """
    gamma = _gamma(gamma)
    ratio = gamma / (1 - gamma)
    if alpha.kind in ("geom", "geomshift"):
        return _geometric_root(alpha, k, (k + 1) * ratio, ratio)
    sums = _inverse_speed_sums(alpha, k)
    slopes = [None] + [1 / alpha(i) for i in range(1, k + 1)]
    return _piecewise_root(sums, slopes, k, (k + 1) * ratio, ratio)


def alpha_simple_smooth(alpha: SpeedSchedule, gamma, k: int):
    """Real-valued relaxation of :func:`f_alpha_simple`, as above."""
    gamma = _gamma(gamma)
    if alpha.kind in ("geom", "geomshift"):
        return _geometric_root(alpha, k, gamma * (k + 1), Fraction(0))
    sums = _inverse_speed_sums(alpha, k)
    slopes = [None] + [1 / alpha(i) for i in range(1, k + 1)]
    return _piecewise_root(sums, slopes, k, gamma * (k + 1), Fraction(0))


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class BoundFamily:
    """One bound evaluator bound to its rule parameter."""

    name: str
    value: Callable[[Fraction, int], int]
    smooth: Callable[[Fraction, int], object] | None = None


def parse_family(text: str) -> BoundFamily:
    """
    Bound family from text.

    ``alpha-<speed>`` (largest-l bound), ``alpha-simple-<speed>``,
    ``alpha-closed:Q``, ``beta-<cost>``, ``thiele-lower-<weights>``,
    ``thiele-upper-<weights>``, where ``<speed>`` is ``const``, ``geom:Q``
    (``Q**(i-1)``) or ``geomshift:Q`` (``Q**i``); ``<cost>`` is ``const`` or
    ``exp:B[:C]``; ``<weights>`` is ``av``, ``pav`` or ``geom:Q``.
    """
    from .rules import RuleSyntaxError, _alpha, _beta, _weights

    def split(rest):
        return rest.split(":")

    try:
        if text.startswith("alpha-closed:"):
            q = as_fraction(text.split(":", 1)[1])
            return BoundFamily(text, lambda g, k: f_alpha_geometric_closed(q, g, k))
        if text.startswith("alpha-simple-"):
            alpha = _alpha(split(text[len("alpha-simple-"):]), text)
            return BoundFamily(
                text,
                lambda g, k: f_alpha_simple(alpha, g, k),
                lambda g, k: alpha_simple_smooth(alpha, g, k),
            )
        if text.startswith("alpha-"):
            alpha = _alpha(split(text[len("alpha-"):]), text)
            return BoundFamily(
                text,
                lambda g, k: f_alpha_exact(alpha, g, k),
                lambda g, k: alpha_exact_smooth(alpha, g, k),
            )
        if text.startswith("beta-"):
            parts = split(text[len("beta-"):])
            if parts[0] == "exp" and len(parts) == 2:
                parts.append("1")
            beta = _beta(parts, text)
            return BoundFamily(
                text,
                lambda g, k: f_beta(beta, g, k),
                lambda g, k: f_beta_expression(beta, g, k),
            )
        for side, fn in (("lower", thiele_lower), ("upper", thiele_upper)):
            prefix = f"thiele-{side}-"
            if text.startswith(prefix):
                lam = _weights(split(text[len(prefix):]), text)
                return BoundFamily(text, lambda g, k, fn=fn, lam=lam: fn(lam, g, k))
    except (RuleSyntaxError, ValueError) as err:
        raise ValueError(f"bad bound family {text!r}: {err}") from None
    raise ValueError(f"unknown bound family {text!r}")


@dataclass(frozen=True)
class BoundCurve:
    family: str
    k: int
    gamma_grid: tuple[Fraction, ...]
    values: tuple[Fraction, ...]  # floored bound / k
    derivative: tuple[float | None, ...]  # forward difference of the smooth bound / k

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gamma", "value_over_k", "derivative"])
        for g, v, d in zip(self.gamma_grid, self.values, self.derivative):
            writer.writerow([repr(float(g)), repr(float(v)), "" if d is None else repr(d)])
        return buf.getvalue()


def gamma_grid(resolution) -> list[Fraction]:
    """``resolution, 2*resolution, ...`` strictly inside ``(0, 1)``."""
    step = as_fraction(resolution)
    if not 0 < step < 1:
        raise ValueError("grid resolution must lie in (0, 1)")
    grid, g = [], step
    while g < 1:
        grid.append(g)
        g += step
    return grid


def emit_bound_curve(family: BoundFamily | str, k: int, resolution="0.01") -> BoundCurve:
    if isinstance(family, str):
        family = parse_family(family)
    grid = gamma_grid(resolution)
    values = [Fraction(family.value(g, k), k) for g in grid]
    if family.smooth is not None:
        smooth = [family.smooth(g, k) for g in grid]
    else:
        smooth = [v * k for v in values]
    deriv: list[float | None] = []
    for i in range(len(grid)):
        if i + 1 == len(grid):
            deriv.append(None)
        else:
            step = float(grid[i + 1] - grid[i])
            deriv.append(float(smooth[i + 1] - smooth[i]) / step / k)
    return BoundCurve(family.name, k, tuple(grid), tuple(values), tuple(deriv))
