from src.nonlinearity.profile import leading_profile
from src.picard.fixed_point import PicardResult, asymptotic_gap, fixed_point, invert_uk, invert_uk_distance
from src.picard.iterate import PicardConfig, VIterate, apply_N, choose_U0, choose_Umax
