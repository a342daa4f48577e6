from fractions import Fraction

import pytest

from phragmen_lab.functions import (
    CostFunction,
    IrrationalValue,
    SpeedSchedule,
    ThieleWeights,
    as_fraction,
    rational_power,
)


def test_as_fraction_decimal_is_exact():
    assert as_fraction("0.1") == Fraction(1, 10)
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction("3/7") == Fraction(3, 7)


@pytest.mark.parametrize(
    "base, exp, expected",
    [
        (Fraction(1, 4), Fraction(7, 7), Fraction(1, 4)),
        (Fraction(1, 4), Fraction(1, 2), Fraction(1, 2)),
        (Fraction(8, 27), Fraction(2, 3), Fraction(4, 9)),
        (Fraction(9, 10), Fraction(10), Fraction(9, 10) ** 10),
    ],
)
def test_rational_power(base, exp, expected):
    assert rational_power(base, exp) == expected


def test_rational_power_irrational():
    with pytest.raises(IrrationalValue):
        rational_power(Fraction(1, 2), Fraction(1, 2))


def test_speed_schedules():
    assert SpeedSchedule.geometric("1/10")(3) == Fraction(1, 100)
    assert SpeedSchedule.geometric_shifted("1/2")(1) == Fraction(1, 2)
    assert SpeedSchedule.power(100)(2) == 2**100
    table = SpeedSchedule.from_table([1, "1/2"])
    assert table(5) == Fraction(1, 2)
    assert SpeedSchedule.geometric("0.5").is_non_increasing(10)
    assert not SpeedSchedule.power(2).is_non_increasing(3)
    with pytest.raises(ValueError):
        SpeedSchedule.geometric(0)


def test_cost_function_exact_and_approx():
    beta = CostFunction.exponential("1/4", 7)
    assert beta.exact(Fraction(4, 7)) == Fraction(1, 256)
    assert beta.approx(Fraction(4, 7)) == pytest.approx(1 / 256)
    with pytest.raises(IrrationalValue):
        CostFunction.exponential("0.9", 100).exact(Fraction(1, 300))
    with pytest.raises(ValueError):
        CostFunction.exponential(2, 1)


def test_thiele_weights():
    assert ThieleWeights.pav().prefix(3) == [0, 1, Fraction(3, 2), Fraction(11, 6)]
    assert ThieleWeights.geometric("1/2")(3) == Fraction(1, 8)
    ThieleWeights.pav().validate(10)
    with pytest.raises(ValueError):
        ThieleWeights.from_table([1, "1/2", "1/2"]).validate(3)  # not convex
