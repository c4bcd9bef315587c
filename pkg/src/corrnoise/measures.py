"""Hilbert-space-local decoherence measures.

Two cheap diagnostics, both computable from the noise-free state alone:

* d_g: squared distance from the state to the span of a protected set of
  basis states (a decoherence-free subspace candidate).
* d_c: noise-averaged variance of the dephasing generator in the state,
  sum_ij Sigma_ij (<Z_i Z_j> - <Z_i><Z_j>).  It is the curvature scale of
  short-time ensemble purity loss: 1 - gamma(dt) = 2 d_c dt^2 + O(dt^4).

d_c extends to mixed states as sum_ij Sigma_ij (Tr[rho^2 Z_i Z_j] -
Tr[rho Z_i rho Z_j]), which reduces to the variance form on pure states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DensityMatrix, StateVector, embed_pauli, z_diagonals
from .noise import NoiseModel, sample_offsets


@dataclass(frozen=True)
class DfsSpec:
    """A candidate protected subspace: a set of computational basis states."""

    n_qubits: int
    basis_states: tuple[int, ...]
    sign_label: str = ""

    def __post_init__(self) -> None:
        states = tuple(sorted(int(i) for i in self.basis_states))
        if len(set(states)) != len(states) or not states:
            raise ValueError("basis_states must be a non-empty set of distinct indices")
        dim = 1 << self.n_qubits
        if states[0] < 0 or states[-1] >= dim:
            raise ValueError(f"basis_states out of range for {self.n_qubits} qubits")
        object.__setattr__(self, "basis_states", states)

    @property
    def dimension(self) -> int:
        return len(self.basis_states)


def pair_dfs(sign: str, n_qubits: int = 2) -> DfsSpec:
    """Two-qubit protected pairs: '-' is span{|01>,|10>}, '+' is span{|00>,|11>}."""
    if n_qubits != 2:
        raise ValueError("pair_dfs covers the two-qubit case")
    if sign == "-":
        return DfsSpec(2, (1, 2), "-")
    if sign == "+":
        return DfsSpec(2, (0, 3), "+")
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def d_g(state: StateVector, dfs: DfsSpec) -> float:
    """Squared norm of the state component outside the protected span."""
    if dfs.n_qubits != state.n_qubits:
        raise ValueError("state and DFS act on different qubit counts")
    inside = sum(abs(state.amps[i]) ** 2 for i in dfs.basis_states)
    return float(min(1.0, max(0.0, 1.0 - inside)))


def _z_moments(state: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """(<Z_i>, <Z_i Z_j>) from the probability vector."""
    z = z_diagonals(state.n_qubits)
    p = state.probabilities()
    zbar = z @ p
    zz = (z * p) @ z.T
    return zbar, zz


def d_c(state: StateVector | DensityMatrix, model: NoiseModel) -> float:
    """Noise-averaged variance of the dephasing generator in the state."""
    if model.n_qubits != state.n_qubits:
        raise ValueError("state and noise model act on different qubit counts")
    cov = model.covariance
    if isinstance(state, StateVector):
        zbar, zz = _z_moments(state)
        val = float(np.sum(cov * (zz - np.outer(zbar, zbar))))
    else:
        z = z_diagonals(state.n_qubits)
        rho = state.elems
        diag_rho2 = np.einsum("ij,ji->i", rho, rho).real
        zz = (z * diag_rho2) @ z.T
        weights = np.abs(rho) ** 2
        cross = z @ weights @ z.T
        val = float(np.sum(cov * (zz - cross)))
    return max(0.0, val)


def d_c_trace_oracle(state: StateVector | DensityMatrix, model: NoiseModel) -> float:
    """d_c by brute-force matrix evaluation of
    sum_ij Sigma_ij (Tr[rho^2 Z_i Z_j] - Tr[rho Z_i rho Z_j]).

    Deliberately naive (explicit embedded operators and matrix products);
    used to cross-check the closed form.
    """
    if isinstance(state, StateVector):
        state = state.to_density_matrix()
    n = state.n_qubits
    rho = state.elems
    rho2 = rho @ rho
    zs = [embed_pauli("Z", q, n).elems for q in range(1, n + 1)]
    total = 0.0
    for i in range(n):
        for j in range(n):
            term = np.trace(rho2 @ zs[i] @ zs[j]) - np.trace(rho @ zs[i] @ rho @ zs[j])
            total += model.covariance[i, j] * term.real
    return total


def d_c_mc(state: StateVector | DensityMatrix, model: NoiseModel, seed: int, n_samples: int) -> float:
    """Monte-Carlo estimate of d_c from sampled offset realizations."""
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    n = state.n_qubits
    offs = sample_offsets(model, seed, 0, n_samples)
    h = offs @ z_diagonals(n)  # (n_samples, dim) diagonal generators
    if isinstance(state, StateVector):
        p = state.probabilities()
        mean = h @ p
        second = (h * h) @ p
        return float(np.mean(second - mean**2))
    weights = np.abs(state.elems) ** 2  # (dim, dim)
    diffs = h[:, :, None] - h[:, None, :]
    return float(np.mean(0.5 * np.einsum("kij,ij->k", diffs**2, weights)))


@dataclass(frozen=True)
class MeasureTrace:
    """d_g and d_c sampled along a trajectory, with time integrals."""

    times: tuple[float, ...]
    d_g: tuple[float, ...]
    d_c: tuple[float, ...]
    integral_d_g: float
    integral_d_c: float


def measure_along_trajectory(
    times: np.ndarray | list[float],
    states: list[StateVector],
    dfs: DfsSpec,
    model: NoiseModel,
) -> MeasureTrace:
    """Evaluate both measures on each trajectory state; trapezoid integrals."""
    t = np.asarray(times, dtype=np.float64)
    if t.size != len(states):
        raise ValueError("times and states length mismatch")
    dg = [d_g(s, dfs) for s in states]
    dc = [d_c(s, model) for s in states]
    ig = float(np.trapezoid(dg, t)) if t.size > 1 else 0.0
    ic = float(np.trapezoid(dc, t)) if t.size > 1 else 0.0
    return MeasureTrace(tuple(t.tolist()), tuple(dg), tuple(dc), ig, ic)
