# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""tensor-ccs - low-tubal-rank tensor completion from cross-concentrated samples."""

from tensor_ccs._version import VERSION
from tensor_ccs.exceptions import (
    CapExceededError,
    ConvergenceFailure,
    DivergenceError,
    DomainError,
    IndexRangeError,
    NumericalError,
    ParameterError,
    ParseError,
    PlanValidationError,
    ShapeError,
    SubsolverError,
    TensorCcsError,
    TensorIOError,
)
from tensor_ccs.models import (
    BoundInputs,
    ExactnessReport,
    ExperimentConfig,
    IncoherenceTransferReport,
    MultiRank,
    SamplingBounds,
    SolverConfig,
    SolverReport,
)
from tensor_ccs.tensor import (
    DenseTensor3,
    IndexSet,
    bcirc,
    fold,
    identity_tensor,
    inner_product,
    norm,
    sampling_tensor,
    subtensor,
    tprod,
    ttranspose,
    unfold,
)
from tensor_ccs.spectral import (
    SpectralSlices,
    TSvdFactors,
    condition_number,
    dft3,
    idft3,
    incoherence_mu0,
    ranks,
    spectral_norm,
    tnn,
    tpinv,
    truncate_rank,
    tsvd,
)
from tensor_ccs.sampling import (
    CcsPlan,
    ObservationSet,
    bernoulli_mask,
    capture,
    make_ccs_plan,
    overall_rate,
    project,
)
from tensor_ccs.tcur import CurFactors, check_exact, cur_reconstruct, extract_cur
from tensor_ccs.solvers import itcurtc, itcurtc_step, tstc
from tensor_ccs.metrics import psnr, rel_error, ssim_avg
from tensor_ccs.theory import bounds, subtensor_incoherence_check

__version__ = VERSION

__all__ = [
    "VERSION",
    # Exceptions
    "TensorCcsError",
    "ParameterError",
    "ShapeError",
    "IndexRangeError",
    "CapExceededError",
    "PlanValidationError",
    "TensorIOError",
    "ParseError",
    "NumericalError",
    "DomainError",
    "ConvergenceFailure",
    "DivergenceError",
    "SubsolverError",
    # Models
    "MultiRank",
    "SolverConfig",
    "SolverReport",
    "ExactnessReport",
    "BoundInputs",
    "SamplingBounds",
    "IncoherenceTransferReport",
    "ExperimentConfig",
    # Tensor algebra
    "DenseTensor3",
    "IndexSet",
    "unfold",
    "fold",
    "bcirc",
    "tprod",
    "ttranspose",
    "identity_tensor",
    "norm",
    "inner_product",
    "subtensor",
    "sampling_tensor",
    # Spectral
    "SpectralSlices",
    "TSvdFactors",
    "dft3",
    "idft3",
    "tsvd",
    "truncate_rank",
    "ranks",
    "tpinv",
    "spectral_norm",
    "condition_number",
    "tnn",
    "incoherence_mu0",
    # Sampling
    "ObservationSet",
    "CcsPlan",
    "bernoulli_mask",
    "make_ccs_plan",
    "project",
    "capture",
    "overall_rate",
    # t-CUR and solvers
    "CurFactors",
    "extract_cur",
    "cur_reconstruct",
    "check_exact",
    "itcurtc",
    "itcurtc_step",
    "tstc",
    # Metrics and theory
    "psnr",
    "ssim_avg",
    "rel_error",
    "bounds",
    "subtensor_incoherence_check",
]
