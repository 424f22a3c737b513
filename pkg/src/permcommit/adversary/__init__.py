"""Cheating committers and the machinery used to bound how well they can do."""

from .distill import (
    DistillationError,
    DistillResult,
    EtaProjection,
    corrected_norm,
    distill,
    eta_projected,
    omega,
    projector_eta_perf,
    published_norm,
)
from .hpsp import REJECT, HpspResult, claim1_factor, hpsp_solve, hpsp_sweep, mean_success
from .measurements import ProjectorSpec, XiDecomposition, apply_m, m_tilde, norm_sq_term, t_value, xi_coefficients, xi_weights
from .reductions import (
    DistinguisherResult,
    GenieOracle,
    QscdResult,
    biased_decoder,
    brute_force_oracle,
    decoder_to_distinguisher,
    genie_oracle,
    perfect_decoder,
    qscd_advantage,
    qscd_distinguish,
    random_decoder,
)
from .report import BindingReport, binding_report
from .strategies import (
    BUILTIN,
    CheatStrategy,
    MalformedStrategy,
    builtin,
    equal_superposition,
    honest,
    key_swap,
    library,
    normalize_strategy,
    uniform_key,
)

__all__ = [name for name in dir() if not name.startswith("_")]
