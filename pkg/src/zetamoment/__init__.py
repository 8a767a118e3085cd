"""Desk-scale numerics for the discrete second moment of zeta on the critical line."""
from .cf import (
    ContinuedFractionRecord,
    continued_fraction,
    convergents,
    irrationality_exponent_estimate,
    lemma1_check,
    waldschmidt_check,
)
from .divisor import DivisorTable, delta, divisor_sieve, divisor_sum_halved
from .errors import (
    DomainError,
    OutOfRangeError,
    PrecisionError,
    ResourceError,
    UncertifiedError,
    ZetaMomentError,
)
from .expsum import (
    WiltonQuery,
    conditional_bound_report,
    resonant_divisor_sum,
    wilton_identity_residual,
    wilton_sum,
)
from .moments import (
    MomentReport,
    build_report,
    continuous_second_moment,
    discrete_second_moment,
    error_envelope,
    first_discrete_moment,
    fourth_moment_check,
)
from .precision import PrecisionComplex
from .saddle import (
    OscillatorSpec,
    derivative_test_bounds,
    oscillatory_integral,
    phase_eval,
    s1_contributions,
    s2_main,
    saddle_point_value,
    truncated_poisson_defect,
)
from .zeta_eval import (
    chi,
    motohashi_residual,
    zeta_many,
    zeta_reference,
    zeta_sq_critical_approx,
)

__version__ = "0.1.0"
