"""Resonant Jaynes-Cummings evolution and atomic post-selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fock import (
    TOL,
    AtomState,
    DensityMatrix,
    JointState,
    embed,
    tensor_with_atom,
)


@dataclass(frozen=True)
class JcTime:
    """Interaction strength as the dimensionless product lambda * tau."""

    lambda_tau: float

    def __post_init__(self):
        if not self.lambda_tau >= 0:
            raise ValueError(f"lambda_tau must be >= 0, got {self.lambda_tau}")
        object.__setattr__(self, "lambda_tau", float(self.lambda_tau))

    def c(self, n) -> np.ndarray:
        """cos(lambda tau sqrt(n+1)); n = -1 gives 1."""
        return np.cos(self.lambda_tau * np.sqrt(np.asarray(n, dtype=float) + 1))

    def s(self, n) -> np.ndarray:
        return np.sin(self.lambda_tau * np.sqrt(np.asarray(n, dtype=float) + 1))


def _as_time(t) -> JcTime:
    return t if isinstance(t, JcTime) else JcTime(float(t))


@dataclass(frozen=True)
class CmParams:
    """Control knobs of one conditional measurement."""

    atom_i: AtomState
    atom_f: AtomState
    t: JcTime

    @classmethod
    def from_vector(cls, x) -> "CmParams":
        """Build from (theta_i, phi_i, theta_f, phi_f, lambda_tau)."""
        ti, pi, tf, pf, lt = (float(v) for v in x)
        return cls(AtomState(ti, pi), AtomState(tf, pf), JcTime(lt))

    def as_vector(self) -> tuple[float, float, float, float, float]:
        return (
            self.atom_i.theta,
            self.atom_i.phi,
            self.atom_f.theta,
            self.atom_f.phi,
            self.t.lambda_tau,
        )

    def to_dict(self) -> dict:
        return {
            "theta_i": self.atom_i.theta,
            "phi_i": self.atom_i.phi,
            "theta_f": self.atom_f.theta,
            "phi_f": self.atom_f.phi,
            "lambda_tau": self.t.lambda_tau,
        }


IDENTITY_CM = CmParams(AtomState(0.0, 0.0), AtomState(0.0, 0.0), JcTime(0.0))


@dataclass(frozen=True)
class CmOutcome:
    """Post-selected field and the probability of the selected atomic outcome.

    ``field`` is None when the outcome is impossible (probability below the
    zero-probability threshold).
    """

    field: Optional[DensityMatrix]
    probability: float

    @property
    def succeeded(self) -> bool:
        return self.field is not None


def jc_tensor(dim: int, t: JcTime | float) -> np.ndarray:
    """Evolution operator as a (D, 2, D, 2) tensor U[n, a, m, b] = <n,a|U|m,b>.

    Atomic index 0 = e, 1 = g. The state |D-1, e> would couple to |D, g>,
    which lies outside the truncation; it is left invariant so U stays
    unitary. Callers keep that level empty (see ``jc_evolve``).
    """
    t = _as_time(t)
    u = np.zeros((dim, 2, dim, 2), dtype=complex)
    n = np.arange(dim)
    cn, sn = t.c(n), t.s(n)
    cm1, sm1 = t.c(n - 1), t.s(n - 1)
    # |n,e> -> C_n |n,e> - i S_n |n+1,g>
    u[n[:-1], 0, n[:-1], 0] = cn[:-1]
    u[n[1:], 1, n[:-1], 0] = -1j * sn[:-1]
    u[dim - 1, 0, dim - 1, 0] = 1.0
    # |n,g> -> C_{n-1} |n,g> - i S_{n-1} |n-1,e>
    u[n, 1, n, 1] = cm1
    u[n[:-1], 0, n[1:], 1] = -1j * sm1[1:]
    return u


def jc_unitary(dim: int, t: JcTime | float) -> np.ndarray:
    """Explicit 2D x 2D evolution matrix, row/column index 2n + a."""
    return jc_tensor(dim, t).reshape(2 * dim, 2 * dim)


def jc_evolve(joint: JointState, t: JcTime | float) -> JointState:
    dim = joint.field_dim
    top = np.trace(joint.tensor[dim - 1, :, dim - 1, :]).real
    if dim > 1 and abs(top) > TOL.leak:
        raise ValueError(
            f"top Fock level population {top:.3e} would leak past the truncation; embed first"
        )
    u = jc_unitary(dim, t)
    return JointState.from_matrix(u @ joint.matrix @ u.conj().T)


def conditional_measure(joint: JointState, final_atom: AtomState) -> CmOutcome:
    """Project the atom onto ``final_atom`` and return the normalized field."""
    f = final_atom.vector
    unnorm = np.einsum("a,namb,b->nm", f.conj(), joint.tensor, f)
    prob = float(np.trace(unnorm).real)
    if prob < TOL.zero_probability:
        return CmOutcome(None, max(prob, 0.0))
    return CmOutcome(DensityMatrix(unnorm / prob), prob)


def kraus_operator(dim: int, params: CmParams) -> np.ndarray:
    """Field operator <phi_f| U |phi_i>; the CM maps rho to K rho K^+ / P."""
    u = jc_tensor(dim, params.t)
    return np.einsum("a,namb,b->nm", params.atom_f.vector.conj(), u, params.atom_i.vector)


def apply_cm(rho: DensityMatrix, params: CmParams) -> CmOutcome:
    """Embed by one level, interact with the prepared atom and post-select."""
    grown = embed(rho, rho.dim + 1)
    joint = jc_evolve(tensor_with_atom(grown, params.atom_i), params.t)
    return conditional_measure(joint, params.atom_f)
