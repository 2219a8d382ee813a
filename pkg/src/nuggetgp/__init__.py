"""Gaussian-process maximum likelihood in one dimension, with and without a nugget."""
__version__ = "0.1.0"

from ._backend import available as available_backends, get_backend, set_backend
from .exact_exponential import (
    BidiagFactor,
    EquidistantSpec,
    det_inv_sqrt_equidistant,
    psi_hat_expansion,
    quad_form_equidistant,
    quad_form_linear_model,
    v_factor,
)
from .kernels import DuplicatePoints, Family, KernelSpec, corr, corr_matrix
from .likelihood import (
    AllInfeasible,
    Dataset,
    DegenerateData,
    FitOptions,
    FitResult,
    Flag,
    LikelihoodProfile,
    Status,
    beta_hat,
    find_modes,
    fit_mle,
    profile_loglik,
    scan_profile,
    sigma2_hat,
)
from .linalg import CholFactor, NotPositiveDefinite, cholesky, condition_number, log_det, quad_form
from .predictor import Emulator, build_emulator, predict_interpolating, predict_metamodel
from .simulation import SimConfig, StudySummary, run_study, sample_gp_path
