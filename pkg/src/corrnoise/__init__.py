"""Few-qubit circuit simulation and scoring under spatially correlated
quasi-static dephasing noise."""

from .circuits import Circuit, GateOp, canonical_circuits, format_circuit, gate_unitary, parse_circuit, ramsey_circuit
from .core import DensityMatrix, Operator, StateVector, basis_state, dephasing_hamiltonian, embed_pauli, evolve
from .measures import DfsSpec, d_c, d_c_mc, d_g, measure_along_trajectory, pair_dfs
from .noise import NoiseModel, NoiseRealization, build_covariance, sample, two_qubit_model, variance_of_sum
from .ramsey import (
    CorrelationEstimate,
    EnvelopeFit,
    RamseyResult,
    classify_dfs,
    extract_correlation,
    fit_envelope,
    ramsey_closed_form,
    run_qubit_ramsey,
    run_ramsey,
)
from .scoring import (
    CircuitScore,
    GateScore,
    badness,
    pairwise_dfs_assignment,
    rank_circuits,
    score_circuit,
    score_circuit_pairwise,
)
from .simulate import EnsembleConfig, TrajectoryReport, run_ensemble, run_ideal, sweep_rc

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CircuitScore",
    "CorrelationEstimate",
    "DensityMatrix",
    "DfsSpec",
    "EnsembleConfig",
    "EnvelopeFit",
    "GateOp",
    "GateScore",
    "NoiseModel",
    "NoiseRealization",
    "Operator",
    "RamseyResult",
    "StateVector",
    "TrajectoryReport",
    "badness",
    "basis_state",
    "build_covariance",
    "canonical_circuits",
    "classify_dfs",
    "d_c",
    "d_c_mc",
    "d_g",
    "dephasing_hamiltonian",
    "embed_pauli",
    "evolve",
    "extract_correlation",
    "fit_envelope",
    "format_circuit",
    "gate_unitary",
    "measure_along_trajectory",
    "pair_dfs",
    "pairwise_dfs_assignment",
    "parse_circuit",
    "ramsey_circuit",
    "ramsey_closed_form",
    "rank_circuits",
    "run_ensemble",
    "run_ideal",
    "run_qubit_ramsey",
    "run_ramsey",
    "sample",
    "score_circuit",
    "score_circuit_pairwise",
    "sweep_rc",
    "two_qubit_model",
    "variance_of_sum",
    "__version__",
]
