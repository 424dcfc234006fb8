"""Spectral statistics of banded empirical covariance matrices.

Simulation of banded Gram estimators for stationary linear processes,
their exact limit formulas, an exact small-instance cumulant oracle, and a
reproducible Monte Carlo harness that verifies the law of large numbers and
the central limit theorem for traces of powers.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    ValidationError,
)
from .partitions import (
    AuditReport,
    Partition,
    audit_join_bounds,
    enumerate_no_singleton,
    enumerate_partitions,
    enumerate_perfect_matchings,
    is_perfect_matching,
    join,
    mobius_weight,
    refines,
    standard_matchings,
)
from .cumulants import (
    CumulantFunctional,
    MomentFunctional,
    cumulant_from_moments,
    cumulant_product,
    empirical_joint_cumulant,
    linear_process_cumulant,
    moment_product,
    moments_from_cumulants,
)
from .process import (
    DriverSpec,
    Kernel,
    ProcessModel,
    autocovariance,
    iterated_autocovariance,
    nu_moment,
    q_coefficient,
    simulate_data_matrix,
    spectral_density,
)
from .matrices import (
    BandedMatrix,
    banded_covariance,
    centered_banded_covariance,
    dump_banded,
    empirical_spectral_histogram,
    load_banded,
    symmetric_eigenvalues,
    trace_power,
)
from .histogram import Histogram, l1_distance
from .limits import (
    LimitTable,
    build_limit_table,
    clt_covariance,
    clt_covariance_matrix,
    lln_limit,
    nu_reference_histogram,
)
from .oracle import exact_mean_trace, exact_trace_cumulant
from .rng import RandomStream
from .config import ExperimentConfig, parse_model
from .harness import (
    CltReport,
    LlnReport,
    OracleReport,
    emit_reports,
    run_clt,
    run_lln,
    run_oracle_check,
)
