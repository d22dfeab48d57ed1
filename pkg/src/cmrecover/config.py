"""Run configuration: YAML files and the two built-in scenarios."""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .fock import DensityMatrix, StateVector, pure_to_density
from .metrics import CostConfig
from .recovery import OptimizerConfig

NORMALIZATION_TOL = 1e-9
TABLE1_GAMMAS = (0.3, 0.4, 0.5, 1.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class QGridConfig:
    extent: float = 3.0
    step: float = 0.05


@dataclass(frozen=True)
class RunConfig:
    initial_state: tuple[tuple[int, complex], ...]
    gamma_t: float = 0.3
    r: float = 2.0
    k_max: int = 4
    gamma_ts: tuple[float, ...] = TABLE1_GAMMAS
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    qgrid: QGridConfig = field(default_factory=QGridConfig)
    output_dir: Path = Path("out")
    dim: Optional[int] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.initial_state:
            raise ConfigError("initial_state is empty")
        indices = [i for i, _ in self.initial_state]
        if len(set(indices)) != len(indices):
            raise ConfigError("initial_state indices must be unique")
        if min(indices) < 0:
            raise ConfigError("initial_state indices must be >= 0")
        if self.dim is not None and max(indices) >= self.dim:
            raise ConfigError(f"index {max(indices)} outside declared dim {self.dim}")
        norm = sum(abs(c) ** 2 for _, c in self.initial_state)
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ConfigError(f"initial_state is not normalized (sum |c|^2 = {norm!r})")
        if not self.gamma_t >= 0 or any(not g >= 0 for g in self.gamma_ts):
            raise ConfigError("gamma_t values must be >= 0")
        if not self.r >= 0:
            raise ConfigError("r must be >= 0")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if not self.qgrid.extent > 0 or not self.qgrid.step > 0:
            raise ConfigError("qgrid extent and step must be positive")

    @property
    def state(self) -> StateVector:
        size = self.dim or (max(i for i, _ in self.initial_state) + 1)
        amps = np.zeros(size, dtype=complex)
        for i, c in self.initial_state:
            amps[i] = c
        # exact renormalization; the tolerance check already passed
        return StateVector(amps / np.linalg.norm(amps))

    @property
    def target(self) -> DensityMatrix:
        return pure_to_density(self.state)

    @property
    def optimizer_config(self) -> OptimizerConfig:
        return replace(self.optimizer, cost_cfg=CostConfig(self.r))


_POLAR = re.compile(r"^\s*([^∠@]+?)\s*[∠@]\s*(.+?)\s*$")
_PAIR = re.compile(r"^\s*\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)\s*$")
_SAFE_EXPR = re.compile(r"^[0-9eE.+\-*/() pisqrt]*$")


def _real(text) -> float:
    """Number or a small arithmetic expression in pi and sqrt."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    if not _SAFE_EXPR.fullmatch(text):
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        return float(eval(text, {"__builtins__": {}}, {"pi": math.pi, "sqrt": math.sqrt}))
    except Exception as exc:  # noqa: BLE001 - any failure is a config error
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_amplitude(value: Any) -> complex:
    """Accept a plain number, ``(re, im)`` or ``mag∠phase`` (``@`` also works).

    Components may use ``pi`` and ``sqrt``, e.g. ``sqrt(0.99)∠pi/3``.
    """
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_real(value[0]), _real(value[1]))
    text = str(value)
    m = _PAIR.match(text)
    if m:
        return complex(_real(m.group(1)), _real(m.group(2)))
    m = _POLAR.match(text)
    if m:
        return cmath.rect(_real(m.group(1)), _real(m.group(2)))
    return complex(_real(text))


def _optimizer_from(raw: dict) -> OptimizerConfig:
    known = {"lambda_tau_max", "coarse_grid", "restarts", "max_iters", "ftol", "rng_seed"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown optimizer keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "coarse_grid" in kwargs:
        kwargs["coarse_grid"] = tuple(kwargs["coarse_grid"])
    try:
        return OptimizerConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    known = {"initial_state", "gamma_t", "r", "k_max", "gamma_ts", "optimizer", "qgrid", "output_dir", "dim"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "initial_state" not in raw:
        raise ConfigError("initial_state is required")
    state = []
    entries = raw["initial_state"]
    if isinstance(entries, dict):
        entries = list(entries.items())
    for entry in entries:
        try:
            idx, amp = entry
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"initial_state entries are (index, amplitude) pairs, got {entry!r}") from exc
        state.append((int(idx), parse_amplitude(amp)))
    qgrid = raw.get("qgrid") or {}
    try:
        return RunConfig(
            initial_state=tuple(state),
            gamma_t=_real(raw.get("gamma_t", 0.3)),
            r=_real(raw.get("r", 2.0)),
            k_max=int(raw.get("k_max", 4)),
            gamma_ts=tuple(_real(g) for g in raw.get("gamma_ts", TABLE1_GAMMAS)),
            optimizer=_optimizer_from(raw.get("optimizer") or {}),
            qgrid=QGridConfig(_real(qgrid.get("extent", 3.0)), _real(qgrid.get("step", 0.05))),
            output_dir=Path(raw.get("output_dir", "out")),
            dim=None if raw.get("dim") is None else int(raw["dim"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return config_from_dict(raw)


def example_config(number: int) -> RunConfig:
    """The equal-amplitude (1) and strongly unequal (2) qubit scenarios."""
    if number == 1:
        state = ((0, complex(1 / math.sqrt(2))), (1, cmath.rect(1 / math.sqrt(2), math.pi / 3)))
    elif number == 2:
        state = ((0, complex(0.1)), (1, cmath.rect(math.sqrt(1 - 1e-2), math.pi / 3)))
    else:
        raise ConfigError(f"unknown example {number}")
    return RunConfig(initial_state=state, gamma_t=0.3)
