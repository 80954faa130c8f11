"""Continuous-variable entanglement swapping with local certification.

Covariance-matrix conventions: quadrature order (x1, p1, ..., xN, pN),
[x, p] = i, vacuum variance 1/2 per quadrature.
"""

from .gaussian import (
    CovMatrix,
    PhysicalityReport,
    apply_beamsplitter,
    apply_local_symplectic,
    cm_from_dict,
    cm_from_json,
    cm_to_dict,
    cm_to_json,
    log_negativity,
    ppt_min_eig,
    purity,
    random_physical_cm,
    symplectic_eigenvalues,
    symplectic_form,
    thermal,
    tmsv,
    vacuum,
    validate_physical,
)
from .threemode import (
    CertificationCheck,
    PurityTriple,
    StandardFormCM,
    ThreeModeState,
    is_certifying,
    purities,
    random_certifying_state,
    random_standard_form_state,
    standard_form_reduce,
)
from .swap import (
    BellOutcome,
    ProtocolRecord,
    SwapResult,
    bell_outcome_distribution,
    bell_swap,
    eta_closed_form,
    run_protocol,
    swap_displacements,
)
from .optomech import (
    FilterSpec,
    LinearModel,
    OmParams,
    build_linear_model,
    coupling_constants,
    reference_params,
    filter_transfer,
    intracavity_steady_cm,
    semiclassical_steady_state,
    stability_check,
)
from .spectrum import (
    IntegrationConfig,
    commutator_matrix,
    intracavity_spectral_cm,
    output_cm,
    output_cm_with_info,
)
from .pipeline import SweepAxis, SweepSpec, default_sweep_spec, run_pipeline, run_sweep

__version__ = "0.1.0"
