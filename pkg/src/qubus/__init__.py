"""qubus: exact simulation of coherent-bus mediated two-qubit phase gates."""

from .errors import (
    CutoffTooSmall,
    DegenerateAngle,
    DegenerateGeometry,
    FitFailed,
    NormError,
    NotDisentangled,
    NumericalFailure,
    PhaseUndefined,
    QubusError,
)
from .fock import (
    FockState,
    coherent_vector,
    fock_apply,
    fock_apply_sequence,
    fock_initial,
    fock_reduce,
    recommended_cutoff,
)
from .metrics import (
    GateMetrics,
    QubitDensityMatrix,
    bus_spread,
    coefficient_concurrence,
    concurrence_pure,
    concurrence_traced,
    entangling_phase,
    gate_metrics,
    is_disentangled,
    reduce_to_qubits,
    trace_distance,
)
from .protocols import (
    GateSequence,
    GeometrySolution,
    Provenance,
    build_specific_example,
    build_square_path,
    solve_general_geometry,
    square_initial_amplitude,
)
from .state import (
    BITS,
    LABELS,
    Branch,
    BranchState,
    ControlledRotation,
    Displacement,
    GateOp,
    PhaseDecomposition,
    apply_controlled_rotation,
    apply_displacement,
    apply_op,
    apply_sequence,
    extract_phases,
    make_initial,
    wrap_phase,
)
from .sweeps import (
    EQUAL_SUPERPOSITION,
    MethodComparison,
    Metric,
    OracleReport,
    SweepConfig,
    SweepPoint,
    SweepResult,
    build_protocol,
    compare_methods,
    run_simulation,
    run_sweep,
    tolerance_radius,
    verify_oracle,
)

__version__ = "0.1.0"
