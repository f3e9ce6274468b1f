"""Precision analysis of local measurement strategies for two-qubit entanglement.

The package provides exact state algebra (:mod:`entmeter.states`),
reproducible isotropic sampling (:mod:`entmeter.sampling`), two minimal
local estimation strategies with first-order error propagation
(:mod:`entmeter.local_tomography`, :mod:`entmeter.local_cc`), a numerical
verifier of the single-observable impossibility result
(:mod:`entmeter.nogo`), and deterministic experiment drivers with a CLI
(:mod:`entmeter.experiments`, :mod:`entmeter.cli`).
"""
from .sampling import (
    CountVector,
    SeededStream,
    derive_seed,
    multinomial_counts,
    sample_state,
    sample_states,
)
from .states import (
    EntanglementValues,
    PureState,
    ReducedState,
    basis_state,
    bell_state,
    concurrence_sq,
    det_from_bloch,
    entanglement,
    entropy_from_concurrence_sq,
    normalize,
    reduced_density,
)
from .local_tomography import (
    DirectionTriple,
    LocalProbabilities,
    UncertaintyReport,
    analytic_uncertainty,
    average_uncertainty,
    estimate_entanglement_local,
    outcome_probabilities,
    reconstruct_bloch,
)
from .local_cc import (
    PhaseCosines,
    RoundOneProbs,
    RoundTwoProbs,
    analytic_uncertainty_cc,
    concurrence_sq_cc,
    estimate_entanglement_cc,
    phase_cosines,
    round1_probabilities,
    round2_probabilities,
)
from .nogo import (
    KMatrixReport,
    ObservableBasis,
    counterexample,
    k_matrix,
    s_matrix,
    sigma_matrix,
    verify_lemma,
)

__version__ = "0.1.0"

__all__ = [
    "CountVector",
    "SeededStream",
    "derive_seed",
    "multinomial_counts",
    "sample_state",
    "sample_states",
    "EntanglementValues",
    "PureState",
    "ReducedState",
    "basis_state",
    "bell_state",
    "concurrence_sq",
    "det_from_bloch",
    "entanglement",
    "entropy_from_concurrence_sq",
    "normalize",
    "reduced_density",
    "DirectionTriple",
    "LocalProbabilities",
    "UncertaintyReport",
    "analytic_uncertainty",
    "average_uncertainty",
    "estimate_entanglement_local",
    "outcome_probabilities",
    "reconstruct_bloch",
    "PhaseCosines",
    "RoundOneProbs",
    "RoundTwoProbs",
    "analytic_uncertainty_cc",
    "concurrence_sq_cc",
    "estimate_entanglement_cc",
    "phase_cosines",
    "round1_probabilities",
    "round2_probabilities",
    "KMatrixReport",
    "ObservableBasis",
    "counterexample",
    "k_matrix",
    "s_matrix",
    "sigma_matrix",
    "verify_lemma",
    "__version__",
]
