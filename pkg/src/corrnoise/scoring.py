"""Circuit scoring against a protected subspace, without simulating anything.

Each gate unitary is partitioned into blocks by the protected span: amplitudes
that stay inside, stay outside, or cross between the two.  The badness of a
gate is a Euclidean size of the two crossing blocks,

    badness = (1/4) sqrt(w_in_out + w_out_in),

where the weights are squared Frobenius norms and unitarity forces them equal.
Diagonal gates and WAIT score zero.  A circuit accumulates gate badness in
quadrature; ranking candidate circuits by that total predicts their relative
ensemble infidelity without running a single trajectory.

Scoring is algebraic on gate matrices only.  For the two-qubit pairwise
protocol every gate is resolved on a 4-dimensional local space (constant work
per gate); a subspace spanning the whole register falls back to the dense
embedded unitary, capped at the package-wide qubit limit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .circuits import Circuit, GateOp, circuit_unitary, gate_unitary
from .core import MAX_QUBITS, basis_state
from .measures import DfsSpec, pair_dfs

_WEIGHT_MATCH_TOL = 1e-10
_BADNESS_BOUND_TOL = 1e-12

QubitPair = tuple[int, int]


@dataclass(frozen=True)
class GateScore:
    """Badness of one gate with its off-diagonal block weights."""

    op: GateOp
    badness: float
    block_weights: tuple[float, float]

    def __post_init__(self) -> None:
        if not 0.0 <= self.badness <= 1.0 + _BADNESS_BOUND_TOL:
            raise ValueError(
                f"badness {self.badness} outside [0, 1]; the gate is not "
                "nearly diagonal with respect to this subspace"
            )


@dataclass(frozen=True)
class CircuitScore:
    """Per-gate badness breakdown and its quadrature total.

    `partial` marks scores where one or more gates acted on a pair without a
    usable protected span ("none" classification); those gates contribute
    zero rather than a guessed penalty, so the total is a lower bound.
    """

    label: str
    gate_scores: tuple[GateScore, ...]
    total_badness: float
    partial: bool = False

    @property
    def n_gates(self) -> int:
        return len(self.gate_scores)


# ---------------------------------------------------------------------------
# single-gate badness


def _block_weights(unitary: np.ndarray, inside: Iterable[int]) -> tuple[float, float]:
    dim = unitary.shape[0]
    inside_idx = np.fromiter(inside, dtype=np.intp)
    mask = np.zeros(dim, dtype=bool)
    mask[inside_idx] = True
    outside_idx = np.nonzero(~mask)[0]
    if outside_idx.size == 0:
        return 0.0, 0.0
    w_in_out = float(np.sum(np.abs(unitary[np.ix_(inside_idx, outside_idx)]) ** 2))
    w_out_in = float(np.sum(np.abs(unitary[np.ix_(outside_idx, inside_idx)]) ** 2))
    return w_in_out, w_out_in


def _score_from_weights(op: GateOp, weights: tuple[float, float]) -> GateScore:
    w1, w2 = weights
    if abs(w1 - w2) > _WEIGHT_MATCH_TOL * max(1.0, w1, w2):
        raise ValueError(
            f"off-diagonal block weights of {op.name} differ ({w1} vs {w2}); "
            "the gate matrix is not unitary"
        )
    return GateScore(op=op, badness=float(0.25 * np.sqrt(w1 + w2)), block_weights=(w1, w2))


def badness(op: GateOp, dfs: DfsSpec, n_qubits: int) -> GateScore:
    """Score one gate against a protected span of the full register.

    The span's qubit count must match `n_qubits`.  WAIT scores zero without
    touching a matrix; everything else goes through its embedded unitary
    (4x4 for the two-qubit case).
    """
    if dfs.n_qubits != n_qubits:
        raise ValueError(
            f"subspace is on {dfs.n_qubits} qubits but the register has {n_qubits};"
            " for pairwise assignments use score_circuit_pairwise"
        )
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"dense scoring capped at {MAX_QUBITS} qubits")
    if op.name == "WAIT":
        return GateScore(op=op, badness=0.0, block_weights=(0.0, 0.0))
    u = gate_unitary(op, n_qubits).elems
    return _score_from_weights(op, _block_weights(u, dfs.basis_states))


def _pair_local_score(op: GateOp, pair: QubitPair, spec: DfsSpec) -> GateScore:
    """Score a gate acting inside one pair, on the pair's 4-dim local space."""
    mapping = {pair[0]: 1, pair[1]: 2}
    local_op = GateOp(op.name, tuple(mapping[q] for q in op.qubits), op.theta, op.duration)
    u = gate_unitary(local_op, 2).elems
    return _score_from_weights(op, _block_weights(u, spec.basis_states))


def _cross_pair_score(
    op: GateOp, pair_a: QubitPair, spec_a: DfsSpec, pair_b: QubitPair, spec_b: DfsSpec
) -> GateScore:
    """Score a gate spanning two pairs on their joint 16-dim space, with the
    protected span being the tensor product of the two pair spans."""
    order = (*pair_a, *pair_b)
    mapping = {q: i + 1 for i, q in enumerate(order)}
    local_op = GateOp(op.name, tuple(mapping[q] for q in op.qubits), op.theta, op.duration)
    u = gate_unitary(local_op, 4).elems
    inside = [(ia << 2) | ib for ia in spec_a.basis_states for ib in spec_b.basis_states]
    return _score_from_weights(op, _block_weights(u, inside))


# ---------------------------------------------------------------------------
# circuit scoring and ranking


def score_circuit(circuit: Circuit, dfs: DfsSpec) -> CircuitScore:
    """Quadrature total of per-gate badness against one full-register span."""
    scores = tuple(badness(op, dfs, circuit.n_qubits) for op in circuit.ops)
    total = float(np.sqrt(sum(s.badness**2 for s in scores)))
    return CircuitScore(label=circuit.label, gate_scores=scores, total_badness=total)


def pairwise_dfs_assignment(
    pair_signs: Mapping[QubitPair, str],
) -> dict[QubitPair, DfsSpec | None]:
    """Turn per-pair classification signs into local protected-span specs.

    Signs are "+" (span{|00>,|11>}), "-" (span{|01>,|10>}), or "none"; a
    "none" pair maps to None and later scores its gates as zero with the
    circuit marked partial.
    """
    assignment: dict[QubitPair, DfsSpec | None] = {}
    seen: set[int] = set()
    for pair, sign in pair_signs.items():
        a, b = (int(q) for q in pair)
        if a == b or a < 1 or b < 1:
            raise ValueError(f"invalid qubit pair {pair}")
        if a in seen or b in seen:
            raise ValueError(f"qubit appears in more than one pair: {pair}")
        seen.update((a, b))
        key = (a, b) if a < b else (b, a)
        if sign == "none":
            assignment[key] = None
        else:
            assignment[key] = pair_dfs(sign)
    return assignment


def score_circuit_pairwise(
    circuit: Circuit, assignment: Mapping[QubitPair, DfsSpec | None]
) -> CircuitScore:
    """Score a circuit whose qubits are grouped into classified pairs.

    Gates inside a pair are scored on that pair's 4-dim space; a two-qubit
    gate bridging two pairs is scored on the joint 16-dim space against the
    tensor product of the two spans.  Every non-WAIT gate must only touch
    qubits covered by the assignment.
    """
    owner: dict[int, QubitPair] = {}
    for pair in assignment:
        a, b = pair
        if a == b or a in owner or b in owner:
            raise ValueError(f"assignment pairs must be disjoint, got {pair}")
        owner[a] = pair
        owner[b] = pair

    scores: list[GateScore] = []
    partial = False
    for op in circuit.ops:
        if op.name == "WAIT":
            scores.append(GateScore(op=op, badness=0.0, block_weights=(0.0, 0.0)))
            continue
        missing = [q for q in op.qubits if q not in owner]
        if missing:
            raise ValueError(f"{op.name} touches unassigned qubit(s) {missing}")
        pairs = sorted({owner[q] for q in op.qubits})
        if len(pairs) == 1:
            spec = assignment[pairs[0]]
            if spec is None:
                partial = True
                scores.append(GateScore(op=op, badness=0.0, block_weights=(0.0, 0.0)))
            else:
                scores.append(_pair_local_score(op, pairs[0], spec))
        else:
            spec_a, spec_b = assignment[pairs[0]], assignment[pairs[1]]
            if spec_a is None or spec_b is None:
                partial = True
                scores.append(GateScore(op=op, badness=0.0, block_weights=(0.0, 0.0)))
            else:
                scores.append(_cross_pair_score(op, pairs[0], spec_a, pairs[1], spec_b))

    total = float(np.sqrt(sum(s.badness**2 for s in scores)))
    return CircuitScore(
        label=circuit.label, gate_scores=tuple(scores), total_badness=total, partial=partial
    )


def _final_state(circuit: Circuit) -> np.ndarray:
    return circuit_unitary(circuit).elems @ basis_state(circuit.n_qubits, 0).amps


def rank_circuits(
    circuits: Iterable[Circuit],
    dfs: DfsSpec,
    check_equivalence: bool = False,
) -> list[CircuitScore]:
    """Order candidate circuits by ascending total badness.

    Ties break toward fewer gates, then lexicographic label.  With
    check_equivalence, candidates whose noise-free final states (from the
    all-zeros input) differ beyond global phase draw a warning per pair; the
    ranking is still returned.
    """
    pool = list(circuits)
    if not pool:
        raise ValueError("need at least one candidate circuit")
    n = pool[0].n_qubits
    if any(c.n_qubits != n for c in pool):
        raise ValueError("candidate circuits must share a qubit count")

    if check_equivalence:
        finals = [_final_state(c) for c in pool]
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                overlap = abs(np.vdot(finals[i], finals[j]))
                if overlap < 1.0 - 1e-9:
                    warnings.warn(
                        f"circuits {pool[i].label!r} and {pool[j].label!r} produce "
                        f"different final states (overlap {overlap:.6f})",
                        stacklevel=2,
                    )

    scored = [score_circuit(c, dfs) for c in pool]
    scored.sort(key=lambda s: (s.total_badness, s.n_gates, s.label))
    return scored
