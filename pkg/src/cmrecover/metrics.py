"""Distances, cost function, overlaps and Husimi Q-function evaluation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import lgamma
from pathlib import Path

import numpy as np

from .fock import DensityMatrix, pad_pair


@dataclass(frozen=True)
class CostConfig:
    r: float = 2.0

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError(f"cost exponent r must be >= 0, got {self.r}")


def distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Frobenius norm of a - b; the smaller matrix is zero-padded."""
    x, y = pad_pair(a, b)
    return float(np.sqrt(np.sum(np.abs(x - y) ** 2)))


def cost(d: float, p: float, cfg: CostConfig) -> float:
    """G = d / p**r, or +inf when p <= 0."""
    if p <= 0:
        return float("inf")
    if cfg.r == 0:
        return float(d)
    return float(d / p**cfg.r)


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Re Tr(a b); the overlap probability when either argument is pure."""
    x, y = pad_pair(a, b)
    return float(np.einsum("nm,mn->", x, y).real)


def coherent_amplitudes(alpha, dim: int) -> np.ndarray:
    """<n|alpha> for n < dim; ``alpha`` may be an array (extra leading axes)."""
    alpha = np.asarray(alpha, dtype=complex)
    n = np.arange(dim)
    log_norm = np.array([-0.5 * lgamma(k + 1) for k in n])
    powers = alpha[..., None] ** n
    return np.exp(-0.5 * np.abs(alpha[..., None]) ** 2 + log_norm) * powers


def q_values(rho: DensityMatrix | np.ndarray, alphas) -> np.ndarray:
    """<alpha|rho|alpha> for every alpha; real part only.

    Accepts any square matrix, so Hermitian error matrices work too (their
    Q-values can be negative).
    """
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    v = coherent_amplitudes(alphas, data.shape[0])
    return np.einsum("...n,nm,...m->...", v.conj(), data, v).real


def q_function(rho: DensityMatrix, alpha: complex) -> float:
    return float(q_values(rho, alpha))


@dataclass(frozen=True)
class QGrid:
    re: np.ndarray
    im: np.ndarray
    q: np.ndarray
    step: float

    def rows(self):
        """Row-major (re, im, q) triples, imaginary axis outermost."""
        for i in range(self.q.shape[0]):
            for j in range(self.q.shape[1]):
                yield self.re[j], self.im[i], self.q[i, j]

    def integral(self) -> float:
        """(1/pi) * sum Q dA; equals Tr(rho) for a wide enough grid."""
        return float(self.q.sum() * self.step**2 / np.pi)

    def argmax(self) -> complex:
        i, j = np.unravel_index(np.argmax(self.q), self.q.shape)
        return complex(self.re[j], self.im[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "q"])
        for x, y, q in self.rows():
            writer.writerow([_fmt(x), _fmt(y), _fmt(q)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _fmt(value: float) -> str:
    value = float(value)
    if value == 0:
        value = 0.0  # drop negative zero
    return f"{value:.9g}"


def grid_axis(extent: float, step: float) -> np.ndarray:
    count = int(np.floor(2 * extent / step + 1e-9)) + 1
    return -extent + step * np.arange(count)


def q_grid(rho: DensityMatrix | np.ndarray, extent: float = 3.0, step: float = 0.05) -> QGrid:
    """Q-function sampled on a square grid over [-extent, extent]^2.

    Pass a difference matrix (rho - rho0) to get an error grid directly.
    """
    if not extent > 0 or not step > 0:
        raise ValueError("extent and step must be positive")
    axis = grid_axis(extent, step)
    alphas = axis[None, :] + 1j * axis[:, None]
    return QGrid(axis, axis, q_values(rho, alphas), step)
