"""Dense state-vector primitives for few-qubit dephasing studies.

Conventions used throughout the package:

* hbar = 1, so fields and frequencies share units and U(t) = exp(-i H t).
* Qubits are numbered 1..n with qubit 1 the most significant bit of the
  computational basis index.  For n=2 the basis order is
  |00>, |01>, |10>, |11>.
* Everything is dense and capped at MAX_QUBITS; this toolkit targets the
  few-qubit regime where exact ensemble averages are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 12

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_HERMITICITY_ATOL = 1e-10


def _check_n_qubits(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# ── value types ──────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of n qubits; amplitudes in MSB-first basis order."""

    n_qubits: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amps", _frozen(amps.copy()))

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amps / n)

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.overlap(other)) ** 2

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amps, self.amps.conj()))


def basis_state(n_qubits: int, index: int) -> StateVector:
    """Computational basis state |index> (qubit 1 = most significant bit)."""
    _check_n_qubits(n_qubits)
    dim = 2**n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on n qubits."""

    n_qubits: int
    elems: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        elems = np.asarray(self.elems, dtype=np.complex128)
        dim = 2**self.n_qubits
        if elems.shape != (dim, dim):
            raise ValueError(f"expected shape ({dim}, {dim}), got {elems.shape}")
        object.__setattr__(self, "elems", _frozen(elems.copy()))

    @property
    def dim(self) -> int:
        return self.elems.shape[0]

    def is_hermitian(self, atol: float = _HERMITICITY_ATOL) -> bool:
        return bool(np.allclose(self.elems, self.elems.conj().T, atol=atol, rtol=0.0))

    def is_diagonal(self, atol: float = 1e-12) -> bool:
        off = self.elems - np.diag(np.diag(self.elems))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)

    def expectation(self, state: StateVector) -> complex:
        return complex(np.vdot(state.amps, self.elems @ state.amps))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state of n qubits.  Hermiticity and unit trace are enforced at
    construction; positivity is checked on demand via :meth:`validate`."""

    n_qubits: int
    elems: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        elems = np.asarray(self.elems, dtype=np.complex128)
        dim = 2**self.n_qubits
        if elems.shape != (dim, dim):
            raise ValueError(f"expected shape ({dim}, {dim}), got {elems.shape}")
        if not np.allclose(elems, elems.conj().T, atol=1e-9, rtol=0.0):
            raise ValueError("density matrix must be Hermitian")
        tr = float(np.trace(elems).real)
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"density matrix trace is {tr}, expected 1")
        object.__setattr__(self, "elems", _frozen(elems.copy()))

    @property
    def dim(self) -> int:
        return self.elems.shape[0]

    def purity(self) -> float:
        """Tr rho^2, computed as the squared Frobenius norm."""
        return float(np.sum(np.abs(self.elems) ** 2))

    def fidelity_pure(self, state: StateVector) -> float:
        """<psi|rho|psi> for a pure reference state."""
        return float(np.vdot(state.amps, self.elems @ state.amps).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elems)

    def validate(self, atol: float = 1e-9) -> None:
        """Raise if any eigenvalue is below -atol."""
        lo = float(self.eigenvalues().min())
        if lo < -atol:
            raise ValueError(f"density matrix has eigenvalue {lo} < -{atol}")


# ── operator builders ────────────────────────────────────────────────────


def pauli_matrix(axis: str) -> np.ndarray:
    """2x2 Pauli matrix for axis in {I, X, Y, Z}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def embed_pauli(axis: str, qubit: int, n_qubits: int) -> Operator:
    """Single-qubit Pauli on the given 1-based qubit, identity elsewhere."""
    _check_n_qubits(n_qubits)
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"qubit {qubit} out of range 1..{n_qubits}")
    m = np.ones((1, 1), dtype=np.complex128)
    for q in range(1, n_qubits + 1):
        m = np.kron(m, _PAULI[axis] if q == qubit else _PAULI["I"])
    return Operator(n_qubits, m)


def z_diagonal(qubit: int, n_qubits: int) -> np.ndarray:
    """Diagonal of Z on the given qubit as a length-2^n array of +-1."""
    _check_n_qubits(n_qubits)
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"qubit {qubit} out of range 1..{n_qubits}")
    idx = np.arange(2**n_qubits)
    bit = (idx >> (n_qubits - qubit)) & 1
    return np.where(bit == 0, 1.0, -1.0)


def z_diagonals(n_qubits: int) -> np.ndarray:
    """Stacked Z diagonals, shape (n_qubits, 2^n)."""
    return np.array([z_diagonal(q, n_qubits) for q in range(1, n_qubits + 1)])


def static_hamiltonian_diagonal(fields: np.ndarray | list[float], n_qubits: int) -> np.ndarray:
    """Diagonal of H0 = sum_i b_i Z_i."""
    b = np.asarray(fields, dtype=np.float64)
    if b.shape != (n_qubits,):
        raise ValueError(f"expected {n_qubits} field values, got shape {b.shape}")
    return b @ z_diagonals(n_qubits)


def dephasing_hamiltonian(offsets: np.ndarray | list[float], n_qubits: int) -> Operator:
    """Hn = sum_i db_i Z_i for one noise realization (diagonal)."""
    diag = static_hamiltonian_diagonal(offsets, n_qubits)
    return Operator(n_qubits, np.diag(diag.astype(np.complex128)))


# ── time evolution ───────────────────────────────────────────────────────


def evolve(state: StateVector, hamiltonian: Operator, duration: float) -> StateVector:
    """Propagate |psi> -> exp(-i H t)|psi>.

    Diagonal H takes a phase-multiplication fast path; general Hermitian H
    goes through an eigendecomposition.  Non-Hermitian input is rejected.
    """
    if hamiltonian.n_qubits != state.n_qubits:
        raise ValueError("state and Hamiltonian act on different qubit counts")
    if not hamiltonian.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    h = hamiltonian.elems
    if hamiltonian.is_diagonal():
        phases = np.exp(-1j * duration * np.diag(h).real)
        return StateVector(state.n_qubits, phases * state.amps)
    evals, evecs = np.linalg.eigh(h)
    amps = evecs @ (np.exp(-1j * duration * evals) * (evecs.conj().T @ state.amps))
    return StateVector(state.n_qubits, amps)
