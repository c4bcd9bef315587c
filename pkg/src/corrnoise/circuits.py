"""Circuit IR, a small text format, and ideal gate unitaries.

Text format, one op per line::

    qubits 2
    label bell_cz
    X 2 @ 1.0
    RY 1 theta=1.5707963267948966 @ 1.0
    CNOT 1 2 @ 2.0
    WAIT @ 5.0

* Line 1 (first significant line) must be ``qubits <n>``.
* ``label <text>`` is optional and names the circuit.
* ``theta=<radians>`` is required for RX/RY/RZ and forbidden elsewhere.
* ``@ <duration>`` is optional (default 1.0); durations are the time the
  system sits exposed to noise before the ideal gate fires.
* ``#`` starts a comment; blank lines are ignored.
* WAIT is a global idle and takes no operands (any given are ignored).

Qubit operands are 1-based; qubit 1 is the most significant basis bit.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .core import Operator, _check_n_qubits

# name -> (operand count, takes theta)
GATE_DEFS: dict[str, tuple[int, bool]] = {
    "I": (1, False),
    "X": (1, False),
    "Y": (1, False),
    "Z": (1, False),
    "H": (1, False),
    "S": (1, False),
    "RX": (1, True),
    "RY": (1, True),
    "RZ": (1, True),
    "CNOT": (2, False),
    "CZ": (2, False),
    "SWAP": (2, False),
    "SQRTSWAP": (2, False),
    "WAIT": (0, False),
}

CIRCUIT_SCHEMA = "corrnoise.circuit.v1"


class CircuitError(Exception):
    """Base class for circuit construction and parse failures."""


class CircuitParseError(CircuitError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class UnknownGateError(CircuitParseError):
    pass


class DuplicateOperandError(CircuitParseError):
    pass


class OperandRangeError(CircuitParseError):
    pass


class NegativeDurationError(CircuitParseError):
    pass


# ── IR ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GateOp:
    """One scheduled operation: named gate, 1-based operands, duration."""

    name: str
    qubits: tuple[int, ...]
    theta: float | None = None
    duration: float = 1.0

    def __post_init__(self) -> None:
        if self.name not in GATE_DEFS:
            raise CircuitError(f"unknown gate {self.name!r}")
        n_operands, takes_theta = GATE_DEFS[self.name]
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != n_operands:
            raise CircuitError(f"{self.name} takes {n_operands} operand(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name} operands must be distinct: {self.qubits}")
        if takes_theta:
            if self.theta is None:
                raise CircuitError(f"{self.name} requires theta")
            object.__setattr__(self, "theta", float(self.theta))
        elif self.theta is not None:
            raise CircuitError(f"{self.name} does not take theta")
        if self.duration < 0:
            raise CircuitError(f"duration must be non-negative, got {self.duration}")
        object.__setattr__(self, "duration", float(self.duration))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...]
    label: str = ""

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            for q in op.qubits:
                if not 1 <= q <= self.n_qubits:
                    raise CircuitError(f"{op.name} operand {q} out of range 1..{self.n_qubits}")

    @property
    def n_gates(self) -> int:
        return len(self.ops)

    @property
    def total_duration(self) -> float:
        return float(sum(op.duration for op in self.ops))

    def to_dict(self) -> dict:
        return {
            "schema": CIRCUIT_SCHEMA,
            "n_qubits": self.n_qubits,
            "label": self.label,
            "ops": [
                {"name": op.name, "qubits": list(op.qubits), "theta": op.theta, "duration": op.duration}
                for op in self.ops
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        ops = tuple(
            GateOp(o["name"], tuple(o["qubits"]), o.get("theta"), o.get("duration", 1.0)) for o in data["ops"]
        )
        return cls(int(data["n_qubits"]), ops, data.get("label", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


# ── text format ──────────────────────────────────────────────────────────


def _tokens(line: str) -> list[tuple[str, int]]:
    """(token, 1-based column) pairs; '#' cuts the rest of the line."""
    hash_pos = line.find("#")
    if hash_pos >= 0:
        line = line[:hash_pos]
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_circuit(text: str) -> Circuit:
    n_qubits: int | None = None
    label = ""
    ops: list[GateOp] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks: list[tuple[str, int]] = []
        for tok, col in _tokens(raw):
            # allow '@0.5' as well as '@ 0.5'
            if tok.startswith("@") and len(tok) > 1:
                toks.append(("@", col))
                toks.append((tok[1:], col + 1))
            else:
                toks.append((tok, col))
        if not toks:
            continue
        head, head_col = toks[0]

        if n_qubits is None:
            if head.lower() != "qubits":
                raise CircuitParseError("first directive must be 'qubits <n>'", lineno, head_col)
            if len(toks) != 2 or not toks[1][0].isdigit():
                raise CircuitParseError("expected 'qubits <n>'", lineno, head_col)
            n_qubits = int(toks[1][0])
            continue

        if head.lower() == "qubits":
            raise CircuitParseError("duplicate 'qubits' directive", lineno, head_col)
        if head.lower() == "label":
            body = raw[: raw.find("#")] if "#" in raw else raw
            label = body.split(None, 1)[1].strip() if len(body.split(None, 1)) > 1 else ""
            continue

        name = head.upper()
        if name not in GATE_DEFS:
            raise UnknownGateError(f"unknown gate {head!r}", lineno, head_col)
        n_operands, takes_theta = GATE_DEFS[name]

        operands: list[int] = []
        theta: float | None = None
        duration = 1.0
        i = 1
        while i < len(toks):
            tok, col = toks[i]
            if tok == "@":
                if i + 1 >= len(toks):
                    raise CircuitParseError("expected a duration after '@'", lineno, col)
                dtok, dcol = toks[i + 1]
                try:
                    duration = float(dtok)
                except ValueError:
                    raise CircuitParseError(f"bad duration {dtok!r}", lineno, dcol) from None
                if duration < 0:
                    raise NegativeDurationError(f"duration must be non-negative, got {dtok}", lineno, dcol)
                if i + 2 < len(toks):
                    raise CircuitParseError(f"unexpected trailing token {toks[i + 2][0]!r}", lineno, toks[i + 2][1])
                break
            if tok.lower().startswith("theta="):
                try:
                    theta = float(tok[len("theta="):])
                except ValueError:
                    raise CircuitParseError(f"bad theta in {tok!r}", lineno, col) from None
            else:
                try:
                    operands.append(int(tok))
                except ValueError:
                    raise CircuitParseError(f"expected a qubit operand, got {tok!r}", lineno, col) from None
            i += 1

        if name == "WAIT":
            operands = []  # a global idle; any operands are ignored
        else:
            if len(operands) != n_operands:
                raise CircuitParseError(
                    f"{name} takes {n_operands} operand(s), got {len(operands)}", lineno, head_col
                )
            if len(set(operands)) != len(operands):
                raise DuplicateOperandError(f"{name} operands must be distinct", lineno, head_col)
            for q in operands:
                if not 1 <= q <= n_qubits:
                    raise OperandRangeError(f"operand {q} out of range 1..{n_qubits}", lineno, head_col)
        if takes_theta and theta is None:
            raise CircuitParseError(f"{name} requires theta=<radians>", lineno, head_col)
        if not takes_theta and theta is not None:
            raise CircuitParseError(f"{name} does not take theta", lineno, head_col)

        ops.append(GateOp(name, tuple(operands), theta, duration))

    if n_qubits is None:
        raise CircuitParseError("empty circuit text: missing 'qubits <n>'", 1)
    return Circuit(n_qubits, tuple(ops), label)


def format_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    if circuit.label:
        lines.append(f"label {circuit.label}")
    for op in circuit.ops:
        parts = [op.name] + [str(q) for q in op.qubits]
        if op.theta is not None:
            parts.append(f"theta={op.theta!r}")
        parts.append(f"@ {op.duration!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# ── ideal unitaries ──────────────────────────────────────────────────────


def _local_matrix(op: GateOp) -> np.ndarray:
    t = op.theta
    if op.name == "I":
        return np.eye(2, dtype=np.complex128)
    if op.name == "X":
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if op.name == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    if op.name == "Z":
        return np.array([[1, 0], [0, -1]], dtype=np.complex128)
    if op.name == "H":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
    if op.name == "S":
        return np.array([[1, 0], [0, 1j]], dtype=np.complex128)
    if op.name == "RX":
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if op.name == "RY":
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if op.name == "RZ":
        return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=np.complex128)
    if op.name == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
    if op.name == "CZ":
        return np.diag([1, 1, 1, -1]).astype(np.complex128)
    if op.name == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
    if op.name == "SQRTSWAP":
        p, m = (1 + 1j) / 2, (1 - 1j) / 2
        return np.array([[1, 0, 0, 0], [0, p, m, 0], [0, m, p, 0], [0, 0, 0, 1]], dtype=np.complex128)
    raise CircuitError(f"no matrix for {op.name}")


def _embed_local(local: np.ndarray, qubits: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Expand a 2^k local matrix (operand order = local MSB order) to 2^n."""
    k = len(qubits)
    dim = 1 << n_qubits
    shifts = [n_qubits - q for q in qubits]
    op_mask = 0
    for s in shifts:
        op_mask |= 1 << s
    full = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        loc_col = 0
        for s in shifts:
            loc_col = (loc_col << 1) | ((col >> s) & 1)
        base = col & ~op_mask
        for loc_row in range(1 << k):
            val = local[loc_row, loc_col]
            if val == 0:
                continue
            row = base
            for i, s in enumerate(shifts):
                if (loc_row >> (k - 1 - i)) & 1:
                    row |= 1 << s
            full[row, col] = val
    return full


def gate_unitary(op: GateOp, n_qubits: int) -> Operator:
    """Ideal unitary of one op embedded in the full 2^n space."""
    _check_n_qubits(n_qubits)
    if op.name == "WAIT":
        return Operator(n_qubits, np.eye(1 << n_qubits, dtype=np.complex128))
    for q in op.qubits:
        if not 1 <= q <= n_qubits:
            raise CircuitError(f"{op.name} operand {q} out of range 1..{n_qubits}")
    return Operator(n_qubits, _embed_local(_local_matrix(op), op.qubits, n_qubits))


def circuit_unitary(circuit: Circuit) -> Operator:
    """Product of all ideal gate unitaries (durations ignored)."""
    u = np.eye(1 << circuit.n_qubits, dtype=np.complex128)
    for op in circuit.ops:
        u = gate_unitary(op, circuit.n_qubits).elems @ u
    return Operator(circuit.n_qubits, u)


# ── named circuits ───────────────────────────────────────────────────────

_HALF_PI = math.pi / 2


def _dur(durations: dict[str, float] | None, name: str) -> float:
    if durations is None:
        return 1.0
    return float(durations.get(name, 1.0))


def canonical_circuits(durations: dict[str, float] | None = None) -> dict[str, Circuit]:
    """The four reference two-qubit circuits, keyed by label.

    All map |00> to their documented target (up to global phase) when run
    noise-free.  Gate durations default to 1.0 and may be overridden per
    gate name, since exposure time is configuration, not structure.

    * bell_sqrtswap: X, SQRTSWAP, then RZ corrections; target (|01>+|10>)/sqrt2.
    * bell_cz: X and RY(+-pi/2) basis changes around CZ; same target.
    * dj_y: balanced-oracle check with RY(+-pi/2) stages around CNOT; target |11>.
    * dj_h: same structure with each Hadamard stage compiled as RY(pi/2)
      then X, which is why it carries the largest gate-badness score.
    """

    def op(name: str, *qubits: int, theta: float | None = None) -> GateOp:
        return GateOp(name, tuple(qubits), theta, _dur(durations, name))

    bell_sqrtswap = Circuit(
        2,
        (
            op("X", 2),
            op("SQRTSWAP", 1, 2),
            op("RZ", 1, theta=math.pi / 4),
            op("RZ", 2, theta=-math.pi / 4),
        ),
        label="bell_sqrtswap",
    )
    bell_cz = Circuit(
        2,
        (
            op("X", 2),
            op("RY", 1, theta=_HALF_PI),
            op("RY", 2, theta=-_HALF_PI),
            op("CZ", 1, 2),
            op("RY", 2, theta=_HALF_PI),
        ),
        label="bell_cz",
    )
    dj_y = Circuit(
        2,
        (
            op("X", 2),
            op("RY", 1, theta=_HALF_PI),
            op("RY", 2, theta=_HALF_PI),
            op("CNOT", 1, 2),
            op("RY", 1, theta=-_HALF_PI),
            op("RY", 2, theta=-_HALF_PI),
        ),
        label="dj_y",
    )
    dj_h = Circuit(
        2,
        (
            op("X", 2),
            op("RY", 1, theta=_HALF_PI),
            op("X", 1),
            op("RY", 2, theta=_HALF_PI),
            op("X", 2),
            op("CNOT", 1, 2),
            op("RY", 1, theta=_HALF_PI),
            op("X", 1),
            op("RY", 2, theta=_HALF_PI),
            op("X", 2),
        ),
        label="dj_h",
    )
    return {c.label: c for c in (bell_sqrtswap, bell_cz, dj_y, dj_h)}


CANONICAL_TARGETS: dict[str, np.ndarray] = {
    "bell_sqrtswap": np.array([0, 1, 1, 0], dtype=np.complex128) / math.sqrt(2),
    "bell_cz": np.array([0, 1, 1, 0], dtype=np.complex128) / math.sqrt(2),
    "dj_y": np.array([0, 0, 0, 1], dtype=np.complex128),
    "dj_h": np.array([0, 0, 0, 1], dtype=np.complex128),
}


def ramsey_circuit(variant: str, wait_duration: float) -> Circuit:
    """Two-qubit Ramsey interference circuit for the summed ("plus", pair
    |00>/|11>) or differenced ("minus", pair |01>/|10>) frequency.

    Preparation and analysis gates run at duration 0 so the decay envelope
    reflects the wait interval alone.  The analysis stage repeats the
    preparation rotation, steering the t=0 state to the measured target
    |11>; the minus variant adds three X ops on qubit 2.
    """
    if variant not in ("plus", "minus"):
        raise ValueError(f"variant must be 'plus' or 'minus', got {variant!r}")
    if wait_duration < 0:
        raise ValueError("wait_duration must be non-negative")

    def op(name: str, *qubits: int, theta: float | None = None, duration: float = 0.0) -> GateOp:
        return GateOp(name, tuple(qubits), theta, duration)

    ops: list[GateOp] = [op("RY", 1, theta=_HALF_PI), op("CNOT", 1, 2)]
    if variant == "minus":
        ops.append(op("X", 2))
    ops.append(op("WAIT", duration=wait_duration))
    if variant == "minus":
        ops.append(op("X", 2))
    ops += [op("CNOT", 1, 2), op("RY", 1, theta=_HALF_PI), op("X", 2)]
    return Circuit(2, tuple(ops), label=f"ramsey_{variant}")


RAMSEY_TARGET_INDEX = 3  # |11>


def qubit_ramsey_circuit(qubit: int, wait_duration: float, n_qubits: int = 2) -> Circuit:
    """Single-qubit Ramsey on one qubit of an n-qubit register; measures the
    basis state with that qubit flipped, so P(t) tracks cos^2((b_q+db_q) t)."""
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"qubit {qubit} out of range 1..{n_qubits}")
    if wait_duration < 0:
        raise ValueError("wait_duration must be non-negative")
    ops = (
        GateOp("RY", (qubit,), _HALF_PI, 0.0),
        GateOp("WAIT", (), None, wait_duration),
        GateOp("RY", (qubit,), _HALF_PI, 0.0),
    )
    return Circuit(n_qubits, ops, label=f"ramsey_q{qubit}")


def qubit_ramsey_target_index(qubit: int, n_qubits: int = 2) -> int:
    return 1 << (n_qubits - qubit)
