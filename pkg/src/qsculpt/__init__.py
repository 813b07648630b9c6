"""Heralded qudit entanglement from sculpting bigraphs.

Layers: ``fock`` (sparse second-quantized algebra), ``sculpt`` (bigraph model,
schemes, protocol, matchings), ``targets`` (reference states and extraction),
``circuit`` (compiler and heralded simulator), ``cli``/``serialize`` (front
end and formats).
"""

from .circuit import (
    BeamSplitter,
    Circuit,
    DFTPort,
    HeraldReport,
    IdealRun,
    PhaseShift,
    SweepPoint,
    compile_bigraph,
    fidelity_sweep,
    ideal_heralded_run,
    projection_probability,
    protocol_input,
    reference_success_probability,
    simulate,
)
from .fock import (
    ATOL,
    COMPUTATIONAL,
    FOURIER,
    PRUNE_TOL,
    ModeLayout,
    ModeSuperposition,
    SparseState,
    annihilate,
    apply_superposition,
    create,
    fourier_matrix,
    inner,
    normalize,
    prune,
    tilde_superposition,
    vacuum,
    zero_state,
)
from .sculpt import (
    ColorLabel,
    Dot,
    Edge,
    Matching,
    SculptingBigraph,
    apply_sculpting,
    dicke_bigraph,
    dot_superposition,
    enumerate_matchings,
    initial_state,
    singlet_bigraph,
    state_from_matchings,
    swap_spatial,
    symmetric_variant_bigraph,
)
from .targets import (
    ExtractionError,
    PhaseMatch,
    QuditState,
    collective_unitary,
    d33_reference,
    dicke_1n_state,
    equal_up_to_phase,
    extract_qudits,
    singlet_state,
)

__version__ = "0.1.0"
