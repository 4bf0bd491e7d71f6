"""coupledmm: biorthogonal polynomial machinery for the coupled two-matrix
model, with determinantal correlators verified against brute-force
eigenvalue integrals.
"""

__version__ = "0.1.0"

from .biortho import (
    BiorthogonalSystem,
    cd_kernel,
    cd_kernel_wave,
    dual_cd_kernel,
    eval_P,
    eval_P_all,
    eval_Q,
    eval_Q_all,
    factorize,
    hilbert_dual_P,
    hilbert_dual_P_all,
    hilbert_dual_Q,
    hilbert_dual_Q_all,
    hilbert_grids,
    kernel_trace,
    reproducing_residual,
    wave_phi,
    wave_psi,
)
from .correlators import (
    CorrelatorResult,
    charpoly_average,
    charpoly_inverse_average_large,
    charpoly_inverse_average_small,
    mixed_pair_average,
    mixed_pair_m1_remark,
    pair_charpoly_average,
    pair_inverse_average_large,
    pair_inverse_average_small,
    partition_function,
    schur_average,
)
from .errors import (
    CacheError,
    ConfigError,
    CoupledModelError,
    IllConditionedWarning,
    NumericalError,
)
from .model import (
    CauchyShift,
    ChainEffective,
    ExpProduct,
    ModelSpec,
    PolynomialPotential,
    SpectralPoints,
    Tabulated,
    gaussian_reference_model,
    model_fingerprint,
    validate_model,
)
from .oracle import (
    OracleEstimate,
    ah_identity_check,
    brute_force_Z,
    brute_force_expectation,
    mc_expectation,
)
from .polyensemble import (
    EnsembleBiorthogonalSystem,
    FunctionFamily,
    monomial_family,
    pe_cd_kernel,
    pe_charpoly_average,
    pe_factorize,
    pe_mixed_moments,
    pe_partition_function,
    pe_schur_average,
    shifted_exponential_family,
)
from .quadrature import (
    BimomentMatrix,
    Grids,
    QuadratureRule,
    bimoment,
    bimoment_matrix,
    build_grids,
    build_rule,
    effective_chain_kernel,
    exactness_check,
)
from .schur import (
    Partition,
    charpoly_product_via_schur,
    dual_partition,
    partitions_in_box,
    schur_eval_bialternant,
    schur_eval_jt,
)
