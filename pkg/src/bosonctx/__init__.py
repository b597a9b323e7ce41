"""Fock-space linear optics and bosonic contextuality experiments."""

from ._validation import (
    CapExceededError,
    DimensionError,
    InvalidOccupationError,
    NotUnitaryError,
)
from .classical import (
    AssignmentDistribution,
    AssignmentModel,
    feasibility_gap,
    max_specker_lhs_classical,
    predict,
)
from .contextuality import (
    CycleExperiment,
    EventSpec,
    InequalityReport,
    MeasurementScenario,
    PairTable,
    classical_bound_bruteforce,
    event_probability,
    event_state,
    measurement_distribution,
    ncycle_report,
    nodisturbance_check,
    nodisturbance_extremal_assignment,
    overlap_matrix,
    pair_table_from_quantum,
    projector_exclusivity_contrast,
    specker_report,
)
from .fock import (
    FockState,
    ZeroNormError,
    apply_annihilation,
    apply_creation,
    inner_product,
    make_basis,
    norm,
    normalize,
)
from .interferometer import (
    BeamSplitterSpec,
    ModeUnitary,
    beamsplitter_unitary,
    evolve_substitution,
    output_distribution,
    permanent,
    permanent_naive,
    random_unitary,
    transition_amplitude,
)

__version__ = "0.1.0"
