from src.nonlinearity.antiderivative import GEvaluator, antiderivative_G
from src.nonlinearity.conditions import ConditionReport, Verdict, keller_osserman, ko2_check
from src.nonlinearity.expression import compile_expression
from src.nonlinearity.nonlinearity import (
    Nonlinearity,
    check_positivity,
    make_custom,
    make_exponential,
    make_power,
    with_linear_extension,
)
from src.nonlinearity.tail import TailFamily, TailModel
from src.nonlinearity.profile import leading_distance, leading_profile
