"""Moments of characteristic polynomials of random permutation matrices.

``Z_n(x) = det(I - x g)`` for ``g`` uniform on the permutation matrices of
size ``n``.  The package computes ``E[prod_k Z_n(x_k)**s_k]`` exactly
(partition sums, generating functions), its ``n -> infinity`` limit for
``|x| < 1``, Monte Carlo estimates through the Feller coupling, and the
leading growth on ``|x| = 1``.
"""

__version__ = "0.1.0"

from .errors import QueryError, RootOfUnityError, TruncationError
from .partitions import (
    MomentQuery,
    Partition,
    brute_force_moment,
    exact_moment_partition_sum,
    partitions_of,
    z_weight,
)
from .moments import (
    generating_function,
    gf_moment,
    gf_moment_complex,
    gf_moment_integer,
    limit_complex,
    limit_integer,
    mellin_fourier_limit,
    ratio_limit,
)
from .feller import (
    DEFAULT_SEED,
    mc_moment,
    mc_Z_infty,
    simulate_coupling,
    simulate_coupling_batch,
)
from .asymptotics import (
    leading_terms,
    predict_abs_moment,
    predict_mixed_moment,
    real_imag_moment_growth,
    verify_ratio,
)

__all__ = [
    "__version__",
    "QueryError",
    "RootOfUnityError",
    "TruncationError",
    "MomentQuery",
    "Partition",
    "partitions_of",
    "z_weight",
    "brute_force_moment",
    "exact_moment_partition_sum",
    "generating_function",
    "gf_moment",
    "gf_moment_integer",
    "gf_moment_complex",
    "limit_integer",
    "limit_complex",
    "ratio_limit",
    "mellin_fourier_limit",
    "DEFAULT_SEED",
    "mc_moment",
    "mc_Z_infty",
    "simulate_coupling",
    "simulate_coupling_batch",
    "leading_terms",
    "predict_mixed_moment",
    "predict_abs_moment",
    "real_imag_moment_growth",
    "verify_ratio",
]
