"""Prime quintuples under Diophantine inequalities.

Builds Piatetski-Shapiro prime tables, evaluates the smoothed counting
integral for five-term forms (four prime squares plus one prime k-th power,
k in {2,3,4}), and searches for explicit near-zero quintuples.
"""

__version__ = "0.1.0"

from .cli import (
    RunConfig,
    RunReport,
    emit_report,
    main,
    parse_config,
    serialize_config,
)
from .errors import (
    AdmissibilityError,
    BudgetExceeded,
    CapacityExceeded,
    DegenerateRatio,
    EmptyWindow,
    IoError,
    NonConvergence,
    PsQuintetError,
    SchemaError,
    SpecMismatch,
)
from .dh_pipeline import (
    DhParams,
    GammaDecomposition,
    ProblemInstance,
    derive_params,
    gamma_direct,
    gamma_integral,
    instance_tables,
    tail_bound,
)
from .exp_sums import (
    Family,
    GapKind,
    MomentResult,
    SumSpec,
    asym_gap,
    eval_sum,
    export_tscan,
    min_pair,
    moment_integral,
    tscan,
    weyl_bound_check,
)
from .quintet_search import (
    HalfSumArray,
    QuintetSolution,
    brute_oracle,
    export_solutions,
    search_mitm,
    solutions_to_dicts,
)
from .numerics import (
    QuadratureSpec,
    Rational,
    SmoothingKernel,
    cf_convergents,
    dirichlet_approx,
    kernel_eval,
    kernel_fourier,
    kernel_fourier_bound,
    oscillatory_integral,
)
from .ps_primes import (
    GammaParam,
    PsPrimeTable,
    build_table,
    export_table,
    import_table,
    is_ps_prime,
    ps_prime_count,
    sieve_primes,
    window_bounds,
)

__all__ = [
    "AdmissibilityError",
    "BudgetExceeded",
    "CapacityExceeded",
    "DegenerateRatio",
    "DhParams",
    "EmptyWindow",
    "Family",
    "GammaDecomposition",
    "GammaParam",
    "GapKind",
    "HalfSumArray",
    "IoError",
    "MomentResult",
    "NonConvergence",
    "ProblemInstance",
    "PsPrimeTable",
    "PsQuintetError",
    "QuadratureSpec",
    "QuintetSolution",
    "Rational",
    "SchemaError",
    "SmoothingKernel",
    "SpecMismatch",
    "SumSpec",
    "RunConfig",
    "RunReport",
    "asym_gap",
    "brute_oracle",
    "build_table",
    "cf_convergents",
    "derive_params",
    "dirichlet_approx",
    "emit_report",
    "eval_sum",
    "export_solutions",
    "export_table",
    "export_tscan",
    "gamma_direct",
    "gamma_integral",
    "import_table",
    "instance_tables",
    "is_ps_prime",
    "kernel_eval",
    "kernel_fourier",
    "kernel_fourier_bound",
    "main",
    "min_pair",
    "moment_integral",
    "oscillatory_integral",
    "parse_config",
    "ps_prime_count",
    "search_mitm",
    "serialize_config",
    "sieve_primes",
    "solutions_to_dicts",
    "tail_bound",
    "tscan",
    "weyl_bound_check",
    "__version__",
]
