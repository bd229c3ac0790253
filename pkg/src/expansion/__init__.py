from src.expansion.power_law import (
    LatticeCollision,
    PowerLawExpansion,
    collisions,
    leading_coefficient,
    power_law_expansion,
    residual_order,
    residual_series,
    singular_term_count,
)
from src.expansion.puiseux import (
    PuiseuxSeries,
    series_add,
    series_compose_shift,
    series_derivative,
    series_integrate,
    series_mul,
    series_pow,
    series_recip,
    series_revert,
    series_sqrt,
)
from src.expansion.three_term import ThreeTermFormula, ThreeTermTable, invert_three_term, three_term_table
