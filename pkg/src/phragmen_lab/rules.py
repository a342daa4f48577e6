"""
Rule descriptions and their textual form.

Grammar accepted by :func:`parse_rule`::

    classic
    alpha:const | alpha:geom:Q | alpha:geomshift:Q | alpha:power:P | alpha:table:V1,V2,...
    beta:const  | beta:exp:B:C
    <alpha part>+<beta part>          (both at once)
    thiele:av | thiele:pav | thiele:geom:Q | thiele:table:V1,V2,...
    seqthiele:<same as thiele>

``alpha:geom:Q`` is ``Q**(i-1)``; ``alpha:geomshift:Q`` is ``Q**i``;
``beta:exp:B:C`` is ``B**(C*x)``. Numbers are read as exact decimals or
``p/q`` fractions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .election import Election
from .functions import CostFunction, SpeedSchedule, ThieleWeights, as_fraction
from .phragmen import TieRule, run_phragmen
from .thiele import exact_thiele, seq_thiele


class RuleSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSpec:
    kind: str  # "phragmen", "thiele" or "seqthiele"
    alpha: SpeedSchedule | None = None
    beta: CostFunction | None = None
    lam: ThieleWeights | None = None
    text: str = ""

    @property
    def sequential(self) -> bool:
        return self.kind in ("phragmen", "seqthiele")

    @property
    def family(self) -> str:
        """``classic``, ``alpha``, ``beta``, ``alpha+beta``, ``thiele`` or ``seqthiele``."""
        if self.kind != "phragmen":
            return self.kind
        a = self.alpha is not None and self.alpha.kind != "const"
        b = self.beta is not None and self.beta.kind != "const"
        if a and b:
            return "alpha+beta"
        return "alpha" if a else "beta" if b else "classic"

    def winners(self, e: Election, tie: TieRule | None = None, mode: str = "auto",
                eps: float = 1e-9) -> list[tuple[int, ...]]:
        """Winning committees; sequential rules return exactly one."""
        if self.kind == "thiele":
            return exact_thiele(e, self.lam)
        return [self.committee(e, tie, mode, eps)]

    def committee(self, e: Election, tie: TieRule | None = None, mode: str = "auto",
                  eps: float = 1e-9) -> tuple[int, ...]:
        """One winning committee (the first in canonical order for set-valued rules)."""
        if self.kind == "phragmen":
            return run_phragmen(e, self.alpha, self.beta, tie, mode, eps).committee
        if self.kind == "seqthiele":
            return seq_thiele(e, self.lam, tie)
        return exact_thiele(e, self.lam)[0]


def _num(token: str, rule: str):
    try:
        return as_fraction(token)
    except (ValueError, ZeroDivisionError):
        raise RuleSyntaxError(f"{rule!r}: bad number {token!r}") from None


def _alpha(parts: list[str], rule: str) -> SpeedSchedule:
    try:
        match parts:
            case ["const"]:
                return SpeedSchedule.constant()
            case ["geom", q]:
                return SpeedSchedule.geometric(_num(q, rule))
            case ["geomshift", q]:
                return SpeedSchedule.geometric_shifted(_num(q, rule))
            case ["power", p]:
                return SpeedSchedule.power(int(p))
            case ["table", values]:
                return SpeedSchedule.from_table(_num(v, rule) for v in values.split(","))
    except ValueError as err:
        raise RuleSyntaxError(f"{rule!r}: {err}") from None
    raise RuleSyntaxError(f"{rule!r}: unknown speed schedule")


def _beta(parts: list[str], rule: str) -> CostFunction:
    try:
        match parts:
            case ["const"]:
                return CostFunction.constant()
            case ["exp", b, c]:
                return CostFunction.exponential(_num(b, rule), _num(c, rule))
    except ValueError as err:
        raise RuleSyntaxError(f"{rule!r}: {err}") from None
    raise RuleSyntaxError(f"{rule!r}: unknown cost function")


def _weights(parts: list[str], rule: str) -> ThieleWeights:
    try:
        match parts:
            case ["av"]:
                return ThieleWeights.av()
            case ["pav"]:
                return ThieleWeights.pav()
            case ["geom", q]:
                return ThieleWeights.geometric(_num(q, rule))
            case ["table", values]:
                return ThieleWeights.from_table(_num(v, rule) for v in values.split(","))
    except ValueError as err:
        raise RuleSyntaxError(f"{rule!r}: {err}") from None
    raise RuleSyntaxError(f"{rule!r}: unknown Thiele weights")


def parse_rule(text: str) -> RuleSpec:
    text = text.strip()
    if text == "classic":
        return RuleSpec("phragmen", SpeedSchedule.constant(), CostFunction.constant(), text=text)
    head, _, rest = text.partition(":")
    if head in ("thiele", "seqthiele"):
        return RuleSpec(head, lam=_weights(rest.split(":"), text), text=text)
    alpha = beta = None
    for piece in text.split("+"):
        head, _, rest = piece.partition(":")
        if head == "alpha" and alpha is None:
            alpha = _alpha(rest.split(":"), text)
        elif head == "beta" and beta is None:
            beta = _beta(rest.split(":"), text)
        else:
            raise RuleSyntaxError(f"{text!r}: cannot parse {piece!r}")
    return RuleSpec(
        "phragmen",
        alpha or SpeedSchedule.constant(),
        beta or CostFunction.constant(),
        text=text,
    )
