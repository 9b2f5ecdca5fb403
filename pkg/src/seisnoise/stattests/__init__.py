"""Classical hypothesis tests used by the characterization pipeline."""
from .heteroskedasticity import PsrOutcome, arch_lm_test, psr_test
from .normality import SwWeights, shapiro_wilk, sw_weights
from .outcome import TestOutcome
from .unitroot import AR1_UNIT_ROOT_THRESHOLD, UnitRootConfig, adf_test, ar1_coefficient, pp_test
from .whiteness import ljung_box, whiteness_test

__all__ = [
    "AR1_UNIT_ROOT_THRESHOLD",
    "PsrOutcome",
    "SwWeights",
    "TestOutcome",
    "UnitRootConfig",
    "adf_test",
    "ar1_coefficient",
    "arch_lm_test",
    "ljung_box",
    "pp_test",
    "psr_test",
    "shapiro_wilk",
    "sw_weights",
    "whiteness_test",
]
