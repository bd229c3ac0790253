from src.universality.criterion import (
    Universality,
    UniversalityReport,
    classify,
    closed_form_limit,
    phi,
    phi_along_profile,
    phi_power_closed_form,
    sample_phi,
    sampled_verdict,
)
from src.universality.gaps import GapTable, default_oracle, second_term_gap, verify_one_term
