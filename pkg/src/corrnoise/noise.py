"""Correlated quasi-static dephasing noise.

The noise source is a zero-mean multivariate Gaussian over per-qubit
frequency offsets db_i, held constant for the lifetime of one circuit run
(one "realization").  Cov(db_i, db_j) = c_ij * sigma_i * sigma_j.

Sampling contract: realization *i* under seed *s* is a pure function of
(s, i).  Each realization owns a fixed, block-aligned window of the Philox
counter stream keyed by the seed, and normals come from the inverse CDF of
the raw uniforms (fixed word consumption, no rejection), so any chunking of
[start, stop) reproduces bit-identical draws.  This is what makes threaded
ensemble runs deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtri

# Philox hands out 4 64-bit words per counter increment; Generator.random
# consumes one word per double.  Pad each realization to whole blocks so
# Philox.advance() can jump straight to any realization index.
_WORDS_PER_BLOCK = 4
_U_FLOOR = 2.0**-54  # keeps ndtri away from u=0


def build_covariance(sigmas: np.ndarray | list[float], correlations: np.ndarray | list[list[float]]) -> np.ndarray:
    """Covariance matrix Sigma_ij = c_ij * sigma_i * sigma_j."""
    s = np.asarray(sigmas, dtype=np.float64)
    c = np.asarray(correlations, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("sigmas must be a non-empty 1-d sequence")
    if np.any(s < 0):
        raise ValueError("sigmas must be non-negative")
    if c.shape != (s.size, s.size):
        raise ValueError(f"correlations must be {s.size}x{s.size}, got {c.shape}")
    if not np.allclose(c, c.T, atol=1e-12, rtol=0.0):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(c), 1.0, atol=1e-12, rtol=0.0):
        raise ValueError("correlation matrix must have unit diagonal")
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise ValueError("correlation entries must lie in [-1, 1]")
    return c * np.outer(s, s)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Zero-mean Gaussian offset model over n qubits."""

    sigmas: np.ndarray = field(repr=True)
    correlations: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        cov = build_covariance(self.sigmas, self.correlations)
        s = np.asarray(self.sigmas, dtype=np.float64).copy()
        c = np.asarray(self.correlations, dtype=np.float64).copy()
        scale = float(np.max(np.abs(cov), initial=0.0))
        evals, evecs = np.linalg.eigh(cov)
        # |c|=1 rows make Sigma singular; tiny negative eigenvalues are
        # rounding, anything worse is a genuinely invalid model.
        floor = -1e-10 * max(scale, 1e-300)
        if np.any(evals < floor):
            raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {evals.min()})")
        evals = np.clip(evals, 0.0, None)
        factor = evecs * np.sqrt(evals)  # offsets = factor @ xi, xi ~ N(0, I)
        for name, value in (("sigmas", s), ("correlations", c), ("covariance", cov), ("_factor", factor)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    covariance: np.ndarray = field(init=False, repr=False)
    _factor: np.ndarray = field(init=False, repr=False)

    @property
    def n_qubits(self) -> int:
        return int(self.sigmas.size)

    @property
    def r(self) -> float:
        """Asymmetry sigma_1 / sigma_2 (two-qubit models)."""
        if self.n_qubits != 2:
            raise ValueError("r is defined for two-qubit models only")
        return float(self.sigmas[0] / self.sigmas[1])

    def to_dict(self) -> dict:
        return {"sigmas": self.sigmas.tolist(), "correlations": self.correlations.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        return cls(np.asarray(data["sigmas"], dtype=np.float64), np.asarray(data["correlations"], dtype=np.float64))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "NoiseModel":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def two_qubit_model(sigma1: float, sigma2: float, c: float) -> NoiseModel:
    """Convenience constructor for the common two-qubit case."""
    return NoiseModel(np.array([sigma1, sigma2]), np.array([[1.0, c], [c, 1.0]]))


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One frozen draw of per-qubit offsets, tagged with its RNG coordinates."""

    offsets: np.ndarray
    seed_path: tuple[int, int]  # (seed, realization index)

    def __post_init__(self) -> None:
        off = np.asarray(self.offsets, dtype=np.float64).copy()
        off.flags.writeable = False
        object.__setattr__(self, "offsets", off)


def _blocks_per_realization(n_qubits: int) -> int:
    return (n_qubits + _WORDS_PER_BLOCK - 1) // _WORDS_PER_BLOCK


def standard_normal_block(seed: int, start: int, stop: int, n_vars: int) -> np.ndarray:
    """Standard normals for realizations [start, stop), shape (stop-start, n_vars)."""
    if stop < start or start < 0:
        raise ValueError(f"bad realization range [{start}, {stop})")
    if stop == start:
        return np.empty((0, n_vars), dtype=np.float64)
    bpr = _blocks_per_realization(n_vars)
    bg = np.random.Philox(key=seed)
    bg.advance(start * bpr)
    u = np.random.Generator(bg).random((stop - start, bpr * _WORDS_PER_BLOCK))
    return ndtri(np.maximum(u[:, :n_vars], _U_FLOOR))


def sample_offsets(model: NoiseModel, seed: int, start: int, stop: int) -> np.ndarray:
    """Offset draws for realizations [start, stop), shape (stop-start, n_qubits).

    The factor is applied column by column with a fixed association order
    rather than via matmul: BLAS picks kernels by matrix shape, which can
    flip the last ulp of identical rows between differently sized windows,
    and that would break bit-identical chunked sampling.
    """
    xi = standard_normal_block(seed, start, stop, model.n_qubits)
    out = np.zeros((xi.shape[0], model.n_qubits))
    for k in range(model.n_qubits):
        out += xi[:, k, None] * model._factor[:, k]
    return out


def sample(model: NoiseModel, seed: int, count: int, start_index: int = 0) -> list[NoiseRealization]:
    """Materialized realizations with their (seed, index) provenance."""
    offs = sample_offsets(model, seed, start_index, start_index + count)
    return [NoiseRealization(offs[k], (seed, start_index + k)) for k in range(count)]


def variance_of_sum(model: NoiseModel, signs: np.ndarray | list[float]) -> float:
    """Var(sum_i signs_i * db_i) = signs^T Sigma signs."""
    v = np.asarray(signs, dtype=np.float64)
    if v.shape != (model.n_qubits,):
        raise ValueError(f"expected {model.n_qubits} signs, got shape {v.shape}")
    return float(v @ model.covariance @ v)
