"""Non-Bayesian social learning with Gaussian uncertain likelihood models.

Agents on a weighted digraph each observe a private Gaussian signal, score a
shared table of Gaussian hypotheses through uncertain likelihood ratios
built from finite training evidence, and pool log beliefs with their
neighbours by geometric averaging.  The package provides the closed-form
scalar operations, network validation, a seeded simulation harness with a
numba-accelerated inner loop, and a command line front end.
"""

__version__ = "0.1.0"

from .core import (
    EvidenceSummary,
    GaussGammaParams,
    GaussianParams,
    NONINFORMATIVE_PRIOR,
    ObservationStream,
    evidence_from_samples,
    gaussian_logpdf,
    kl_gaussian,
    log_asymptotic_ulr,
    log_ell_step,
    log_gamma,
    log_predictive,
    log_prior_predictive,
    log_ulr,
    posterior_params,
    push_observation,
    stream_from_samples,
)
from .network import (
    AgentModel,
    BeliefMatrix,
    Disconnected,
    IdentifiabilityReport,
    Network,
    NetworkValidationError,
    NotDoublyStochastic,
    ZeroDiagonal,
    belief_step,
    check_global_identifiability,
    directed_cycle,
    distinguishable_set,
    validate_network,
)
from .simulate import (
    CycleNetworkSpec,
    DogmaticEvidence,
    EnsembleDiagnostics,
    ExplicitNetworkSpec,
    FixedEvidence,
    RangeEvidence,
    RunResult,
    Scenario,
    Verdict,
    checkpoint_grid,
    ensemble,
    generate_evidence,
    identifiability_report,
    run_simulation,
    verdict,
)
from .config import parse_config, scenario_to_mapping

__all__ = [name for name in dir() if not name.startswith("_")]
