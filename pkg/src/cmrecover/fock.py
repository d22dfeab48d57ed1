"""Truncated Fock-space states, density matrices and field-atom joint states.

Every value type here is immutable: the wrapped numpy arrays are flagged
read-only on construction, so instances can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ToleranceConfig:
    normalization: float = 1e-12
    hermitian: float = 1e-12
    trace: float = 1e-10
    psd: float = -1e-10
    leak: float = 1e-12
    zero_probability: float = 1e-14


TOL = ToleranceConfig()


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure field state sum_n c_n |n>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-d sequence")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def is_normalized(self, tol: float = TOL.normalization) -> bool:
        return abs(np.vdot(self.amplitudes, self.amplitudes).real - 1.0) < tol


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Field density matrix rho_{n,m} = <n|rho|m> on a truncated Fock space."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {data.shape}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def __getitem__(self, idx):
        return self.data[idx]

    def check(self, tol: ToleranceConfig = TOL, psd: bool = True) -> None:
        """Raise ValueError unless Hermitian, unit trace and (optionally) PSD."""
        herm_err = np.max(np.abs(self.data - self.data.conj().T))
        if herm_err > tol.hermitian:
            raise ValueError(f"not Hermitian (max deviation {herm_err:.3e})")
        if abs(np.trace(self.data) - 1.0) > tol.trace:
            raise ValueError(f"trace {np.trace(self.data)} differs from 1")
        if psd:
            lowest = np.linalg.eigvalsh(self.data)[0]
            if lowest < tol.psd:
                raise ValueError(f"not positive semidefinite (eigenvalue {lowest:.3e})")

    def is_valid(self, tol: ToleranceConfig = TOL) -> bool:
        try:
            self.check(tol)
        except ValueError:
            return False
        return True


@dataclass(frozen=True)
class AtomState:
    """Two-level atom cos(theta)|e> + sin(theta) e^{i phi}|g>.

    The excited amplitude is kept real and nonnegative, so the global phase
    is already fixed. ``phi`` is wrapped into [0, 2pi).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi / 2 + 1e-15:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))

    @property
    def alpha(self) -> complex:
        return complex(np.cos(self.theta))

    @property
    def beta(self) -> complex:
        return complex(np.sin(self.theta) * np.exp(1j * self.phi))

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes in the atomic basis ordering (e, g)."""
        return np.array([self.alpha, self.beta])

    def orthogonal(self) -> "AtomState":
        """The state orthogonal to this one, up to a global phase."""
        return AtomState(np.pi / 2 - self.theta, self.phi + np.pi)


EXCITED = AtomState(0.0, 0.0)
GROUND = AtomState(np.pi / 2, 0.0)


@dataclass(frozen=True, eq=False)
class JointState:
    """Field-atom density matrix as a (D, 2, D, 2) tensor.

    Index order is ``[n, a, m, b]`` for <n, a| rho_FA |m, b>, with atomic
    index 0 = e and 1 = g. ``blocks[(a, b)]`` gives the D x D field block.
    """

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        if t.ndim != 4 or t.shape[1] != 2 or t.shape[3] != 2 or t.shape[0] != t.shape[2]:
            raise ValueError(f"joint tensor must have shape (D, 2, D, 2), got {t.shape}")
        object.__setattr__(self, "tensor", _frozen(t))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "JointState":
        matrix = np.asarray(matrix)
        dim = matrix.shape[0] // 2
        return cls(matrix.reshape(dim, 2, dim, 2))

    @property
    def field_dim(self) -> int:
        return self.tensor.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Flattened 2D x 2D matrix, row index 2n + a."""
        d = self.field_dim
        return self.tensor.reshape(2 * d, 2 * d)

    def block(self, a: int, b: int) -> np.ndarray:
        return self.tensor[:, a, :, b]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def check(self, tol: ToleranceConfig = TOL) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol.hermitian:
            raise ValueError("joint state is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol.trace:
            raise ValueError("joint state trace differs from 1")


def pure_to_density(psi: StateVector) -> DensityMatrix:
    c = psi.amplitudes
    return DensityMatrix(np.outer(c, c.conj()))


def tensor_with_atom(rho: DensityMatrix, atom: AtomState) -> JointState:
    v = atom.vector
    return JointState(np.einsum("nm,a,b->namb", rho.data, v, v.conj()))


def partial_trace_atom(joint: JointState) -> DensityMatrix:
    return DensityMatrix(np.einsum("nama->nm", joint.tensor))


def embed(rho: DensityMatrix, new_dim: int) -> DensityMatrix:
    """Zero-pad rho into a larger Fock space."""
    if new_dim < rho.dim:
        raise ValueError(f"cannot embed dim {rho.dim} into smaller dim {new_dim}")
    out = np.zeros((new_dim, new_dim), dtype=complex)
    out[: rho.dim, : rho.dim] = rho.data
    return DensityMatrix(out)


def truncate(rho: DensityMatrix, tol: float = TOL.leak, min_dim: int = 1) -> DensityMatrix:
    """Drop top Fock levels whose population is below ``tol``.

    Only levels whose population is negligible are removed; the dimension
    never goes below ``min_dim``.
    """
    dim = rho.dim
    pops = np.diag(rho.data).real
    while dim > min_dim and abs(pops[dim - 1]) < tol:
        dim -= 1
    if dim == rho.dim:
        return rho
    return DensityMatrix(rho.data[:dim, :dim])


def pad_pair(a: DensityMatrix, b: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Return the two matrices zero-padded to a common dimension."""
    dim = max(a.dim, b.dim)
    return embed(a, dim).data, embed(b, dim).data
