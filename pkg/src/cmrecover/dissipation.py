"""Zero-temperature amplitude damping of the cavity field.

``dissipate`` is the closed-form Kraus-sum solution of the damping master
equation; ``dissipate_ode_oracle`` integrates the master equation directly
and is only meant for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .fock import DensityMatrix


@dataclass(frozen=True)
class DampingSpec:
    """Damping strength as the dimensionless product gamma * t."""

    gamma_t: float

    def __post_init__(self):
        if not self.gamma_t >= 0:
            raise ValueError(f"gamma_t must be >= 0, got {self.gamma_t}")


def _as_spec(spec) -> DampingSpec:
    return spec if isinstance(spec, DampingSpec) else DampingSpec(float(spec))


def log_binomial(n: int, k: int) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def damping_weights(dim: int, gamma_t: float) -> np.ndarray:
    """w[n, k] = sqrt(C(n+k, n) eta^n (1-eta)^k), eta = exp(-2 gamma_t).

    Computed in log space; entries with n + k >= dim are never needed and
    are left at zero.
    """
    w = np.zeros((dim, dim))
    log_eta = -2.0 * gamma_t
    log_loss = np.log(-np.expm1(-2.0 * gamma_t)) if gamma_t > 0 else -np.inf
    for n in range(dim):
        for k in range(dim - n):
            if k == 0:
                w[n, k] = np.exp(0.5 * n * log_eta)
            elif np.isfinite(log_loss):
                w[n, k] = np.exp(0.5 * (log_binomial(n + k, n) + n * log_eta + k * log_loss))
    return w


def dissipate(rho: DensityMatrix, spec: DampingSpec | float) -> DensityMatrix:
    """Field state after damping for gamma * t = ``spec.gamma_t``.

    rho_{n,m}(t) = sum_k rho_{n+k,m+k}(0) w[n,k] w[m,k]. The sum is exact at
    the stored dimension because the input has no support above it.
    """
    spec = _as_spec(spec)
    dim = rho.dim
    w = damping_weights(dim, spec.gamma_t)
    src = rho.data
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        size = dim - k
        out[:size, :size] += src[k:, k:] * np.outer(w[:size, k], w[:size, k])
    return DensityMatrix(out)


def damping_rhs(rho: np.ndarray, gamma: float = 1.0) -> np.ndarray:
    """gamma (2 a rho a^+ - a^+ a rho - rho a^+ a) on a truncated space."""
    dim = rho.shape[-1]
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    ad = a.T
    num = ad @ a
    return gamma * (2 * a @ rho @ ad - num @ rho - rho @ num)


def integrate_damping(rhos: np.ndarray, gamma_t: float, steps: int) -> np.ndarray:
    """RK4 integration of a stack (..., D, D) of density matrices, gamma = 1."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = gamma_t / steps
    r = np.array(rhos, dtype=complex)
    for _ in range(steps):
        k1 = damping_rhs(r)
        k2 = damping_rhs(r + 0.5 * dt * k1)
        k3 = damping_rhs(r + 0.5 * dt * k2)
        k4 = damping_rhs(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return r


def dissipate_ode_oracle(rho: DensityMatrix, spec: DampingSpec | float, steps: int = 10_000) -> DensityMatrix:
    """Master-equation integration of ``rho``; slow, used for validation only."""
    spec = _as_spec(spec)
    return DensityMatrix(integrate_damping(rho.data, spec.gamma_t, steps))
