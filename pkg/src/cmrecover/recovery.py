"""Optimized conditional-measurement sequences.

Each measurement has five real knobs (theta_i, phi_i, theta_f, phi_f,
lambda_tau). They are chosen by minimizing G = d / P**r: a dense coarse grid
(vectorized over all atom pairs for each lambda_tau value) seeds bounded
Nelder-Mead refinements, and the best candidate overall wins.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .dissipation import dissipate
from .fock import AtomState, DensityMatrix, embed, truncate
from .jc import CmParams, IDENTITY_CM, JcTime, apply_cm, jc_tensor
from .metrics import CostConfig, cost, distance, fidelity

log = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-6
POLISH_COUNT = 3
POLISH_SCALES = (1e-2, 1e-4, 1e-6)

# Parameters of the single CM reported for the equal-amplitude example,
# tried as an extra candidate whenever the field is a qubit.
EXAMPLE1_PARAMS = CmParams.from_vector(
    (3 * np.pi / 8, 5 * np.pi / 4, 3 * np.pi / 8, np.pi / 4, 37.95)
)


@dataclass(frozen=True)
class OptimizerConfig:
    cost_cfg: CostConfig = field(default_factory=CostConfig)
    lambda_tau_max: float = 40.0
    coarse_grid: tuple[int, int, int, int, int] = (8, 8, 8, 8, 64)
    restarts: int = 16
    max_iters: int = 4000
    ftol: float = 1e-10
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.coarse_grid) != 5 or min(self.coarse_grid) < 1:
            raise ValueError("coarse_grid needs five counts >= 1")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be >= 1")
        if not self.lambda_tau_max > 0:
            raise ValueError("lambda_tau_max must be positive")
        object.__setattr__(self, "coarse_grid", tuple(int(c) for c in self.coarse_grid))

    def to_dict(self) -> dict:
        return {
            "r": self.cost_cfg.r,
            "lambda_tau_max": self.lambda_tau_max,
            "coarse_grid": list(self.coarse_grid),
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "ftol": self.ftol,
            "rng_seed": self.rng_seed,
        }


class OptimizationError(RuntimeError):
    """No candidate reached the probability floor."""

    def __init__(self, message: str, best_rejected: Optional["Candidate"] = None):
        super().__init__(message)
        self.best_rejected = best_rejected
        self.partial_report: Optional[RecoveryReport] = None


@dataclass(frozen=True)
class Candidate:
    params: CmParams
    cost: float
    distance: float
    probability: float


class _Objective:
    """Cost of a parameter vector for a fixed current field and target."""

    def __init__(self, rho: DensityMatrix, target: DensityMatrix, cfg: OptimizerConfig):
        self.dim = rho.dim + 1
        self.rho = embed(rho, self.dim).data
        self.target = embed(target, max(self.dim, target.dim)).data[: self.dim, : self.dim]
        self.cfg = cfg
        self.r = cfg.cost_cfg.r

    def evaluate(self, x) -> tuple[float, float, float]:
        """(G, d, P) for x = (theta_i, phi_i, theta_f, phi_f, lambda_tau)."""
        ti, pi, tf, pf, lt = x
        vi = np.array([np.cos(ti), np.sin(ti) * np.exp(1j * pi)])
        vf = np.array([np.cos(tf), np.sin(tf) * np.exp(1j * pf)])
        u = jc_tensor(self.dim, abs(lt))
        k = np.einsum("a,namb,b->nm", vf.conj(), u, vi)
        m = k @ self.rho @ k.conj().T
        p = float(np.trace(m).real)
        if p < PROBABILITY_FLOOR:
            return float("inf"), float("nan"), p
        d = float(np.linalg.norm(m / p - self.target))
        return cost(d, p, self.cfg.cost_cfg), d, p

    def __call__(self, x) -> float:
        return self.evaluate(x)[0]

    def log_cost(self, x) -> float:
        """log G. Same simplex moves as G, but the tolerance becomes relative
        and refinement keeps converging onto exact zeros of the distance."""
        return float(np.log(max(self.evaluate(x)[0], 1e-300)))

    def grid(self) -> list[tuple[float, tuple]]:
        """Evaluate the coarse grid.

        Returns the best (G, x) of every lambda_tau slice, best first, so
        that refinement starts are spread over distinct interaction times.
        """
        nti, npi, ntf, npf, nlt = self.cfg.coarse_grid
        thetas_i = np.linspace(0, np.pi / 2, nti)
        phis_i = 2 * np.pi * np.arange(npi) / npi
        thetas_f = np.linspace(0, np.pi / 2, ntf)
        phis_f = 2 * np.pi * np.arange(npf) / npf
        lts = np.linspace(0, self.cfg.lambda_tau_max, nlt)

        ti, pi = (a.ravel() for a in np.meshgrid(thetas_i, phis_i, indexing="ij"))
        tf, pf = (a.ravel() for a in np.meshgrid(thetas_f, phis_f, indexing="ij"))
        vi = np.stack([np.cos(ti), np.sin(ti) * np.exp(1j * pi)], axis=1)
        vf = np.stack([np.cos(tf), np.sin(tf) * np.exp(1j * pf)], axis=1)

        costs = np.empty((nlt, vi.shape[0], vf.shape[0]))
        for idx, lt in enumerate(lts):
            u = jc_tensor(self.dim, lt)
            # k[i, f] = <phi_f| U |phi_i>, shape (Ni, Nf, D, D)
            k = np.einsum("fa,namb,ib->ifnm", vf.conj(), u, vi, optimize=True)
            m = k @ self.rho @ np.swapaxes(k.conj(), -1, -2)
            p = np.einsum("ifnn->if", m).real
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.sqrt(np.sum(np.abs(m / p[..., None, None] - self.target) ** 2, axis=(-1, -2)))
                g = d / p**self.r if self.r else d
            g[p < PROBABILITY_FLOOR] = np.inf
            costs[idx] = g

        # best grid point per lambda_tau slice, slices ranked by their best cost
        out = []
        for il in range(nlt):
            flat = int(np.argmin(costs[il]))
            ii, jf = np.unravel_index(flat, costs[il].shape)
            out.append((float(costs[il, ii, jf]), (ti[ii], pi[ii], tf[jf], pf[jf], lts[il])))
        out.sort(key=lambda item: (item[0], item[1][4]))
        return out


def _canonical_atom(theta: float, phi: float) -> AtomState:
    """Same physical state with a real, nonnegative excited amplitude."""
    alpha = np.cos(theta)
    beta = np.sin(theta) * np.exp(1j * phi)
    if alpha < 0:
        alpha, beta = -alpha, -beta
    theta_c = float(np.arctan2(abs(beta), alpha))
    phi_c = float(np.angle(beta)) if abs(beta) > 0 else 0.0
    return AtomState(min(theta_c, np.pi / 2), phi_c)


def _canonical(x, lambda_tau_max: float) -> CmParams:
    ti, pi, tf, pf, lt = (float(v) for v in x)
    lt = min(max(lt, 0.0), lambda_tau_max)
    return CmParams(_canonical_atom(ti, pi), _canonical_atom(tf, pf), JcTime(lt))


def _distinct_starts(ranked, count: int) -> list[tuple]:
    return [x for g, x in ranked[:count] if np.isfinite(g)]


def optimize_cm(rho_current: DensityMatrix, target: DensityMatrix, cfg: OptimizerConfig) -> CmParams:
    """Parameters of the next conditional measurement; minimizes d / P**r."""
    return search_cm(rho_current, target, cfg)[0].params


def search_cm(
    rho_current: DensityMatrix,
    target: DensityMatrix,
    cfg: OptimizerConfig,
    extra_seeds: Sequence[CmParams] = (),
) -> tuple[Candidate, Candidate]:
    """Run the search; return (best overall, best coarse-grid) candidates."""
    obj = _Objective(rho_current, target, cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    ranked = obj.grid()
    grid_best = _candidate(obj, ranked[0][1], cfg)

    seeds = [IDENTITY_CM, *extra_seeds]
    if rho_current.dim == 2:
        seeds.append(EXAMPLE1_PARAMS)
    starts = _distinct_starts(ranked, cfg.restarts)
    starts += [s.as_vector() for s in seeds]
    lo = np.array([0.0, 0.0, 0.0, 0.0, 0.0])
    hi = np.array([np.pi / 2, 2 * np.pi, np.pi / 2, 2 * np.pi, cfg.lambda_tau_max])
    starts += [tuple(rng.uniform(lo, hi)) for _ in range(max(1, cfg.restarts // 4))]

    # atom angles run free during refinement and are folded back afterwards
    bounds = [(None, None)] * 4 + [(0, cfg.lambda_tau_max)]
    candidates = [grid_best] + [_candidate(obj, s.as_vector(), cfg) for s in seeds]
    refined = [_nelder_mead(obj, x0, bounds, cfg) for x0 in starts]
    candidates += refined
    # The cost is cone-shaped around exact recoveries and badly scaled in
    # lambda_tau; fresh, shrinking simplices keep the best ones converging.
    for cand in sorted(refined, key=lambda c: c.cost)[:POLISH_COUNT]:
        for scale in POLISH_SCALES:
            cand = _nelder_mead(obj, cand.params.as_vector(), bounds, cfg, scale)
        candidates.append(cand)

    feasible = [c for c in candidates if c.probability >= PROBABILITY_FLOOR and np.isfinite(c.cost)]
    if not feasible:
        rejected = max(candidates, key=lambda c: c.probability)
        raise OptimizationError("no candidate reached the probability floor", rejected)
    return select_best(feasible, cfg.ftol), grid_best


def select_best(candidates: Sequence[Candidate], tie_tol: float) -> Candidate:
    """Lowest cost; costs within ``tie_tol`` of it count as equal.

    Ties go to the higher success probability, then to the lexicographically
    smallest parameter vector (lambda_tau last).
    """
    g_min = min(c.cost for c in candidates)
    tied = [c for c in candidates if c.cost <= g_min + tie_tol]
    return min(tied, key=lambda c: (-round(c.probability, 12), c.params.as_vector()))


def _nelder_mead(obj: _Objective, x0, bounds, cfg: OptimizerConfig, scale: float = 1.0) -> Candidate:
    # an all-infeasible simplex compares inf - inf inside scipy
    with np.errstate(invalid="ignore"):
        res = _minimize(obj, x0, bounds, cfg, scale)
    return _candidate(obj, res.x, cfg)


def _minimize(obj: _Objective, x0, bounds, cfg: OptimizerConfig, scale: float):
    return minimize(
        obj.log_cost,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "maxiter": cfg.max_iters,
            "maxfev": 2 * cfg.max_iters,
            "xatol": 1e-12,
            "fatol": cfg.ftol,
            "initial_simplex": _initial_simplex(x0, cfg.lambda_tau_max, scale),
        },
    )


def _initial_simplex(x0, lambda_tau_max: float, scale: float = 1.0) -> np.ndarray:
    steps = scale * np.array([0.15, 0.4, 0.15, 0.4, min(0.5, lambda_tau_max / 20)])
    x0 = np.asarray(x0, dtype=float)
    simplex = np.tile(x0, (6, 1))
    for i in range(5):
        simplex[i + 1, i] += steps[i]
    # keep the lambda_tau vertex inside its bounds
    if simplex[5, 4] > lambda_tau_max:
        simplex[5, 4] = x0[4] - steps[4]
    return simplex


def _candidate(obj: _Objective, x, cfg: OptimizerConfig) -> Candidate:
    params = _canonical(x, cfg.lambda_tau_max)
    g, d, p = obj.evaluate(params.as_vector())
    return Candidate(params, g, d, p)


@dataclass(frozen=True)
class StepRecord:
    params: CmParams
    step_probability: float
    distance_after: float
    p_seq: float

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "step_probability": self.step_probability,
            "distance_after": self.distance_after,
            "p_seq": self.p_seq,
        }


@dataclass(frozen=True)
class RecoveryReport:
    gamma_t: float
    target: DensityMatrix
    damped: DensityMatrix
    final: DensityMatrix
    initial_distance: float
    steps: tuple[StepRecord, ...]
    rejected: Optional[StepRecord] = None
    config: Optional[OptimizerConfig] = None

    @property
    def p_seq(self) -> float:
        return float(np.prod([s.step_probability for s in self.steps])) if self.steps else 1.0

    @property
    def distances(self) -> list[float]:
        """d_K for K = 0 .. number of applied steps."""
        return [self.initial_distance] + [s.distance_after for s in self.steps]

    @property
    def final_distance(self) -> float:
        return self.distances[-1]

    @property
    def reduction_factor(self) -> float:
        if self.final_distance == 0:
            return 1.0 if self.initial_distance == 0 else float("inf")
        return self.initial_distance / self.final_distance

    @property
    def fidelity_final(self) -> float:
        return fidelity(self.target, self.final)

    def to_dict(self) -> dict:
        return {
            "gamma_t": self.gamma_t,
            "initial_distance": self.initial_distance,
            "steps": [s.to_dict() for s in self.steps],
            "rejected_trial": None if self.rejected is None else self.rejected.to_dict(),
            "p_seq": self.p_seq,
            "final_distance": self.final_distance,
            "reduction_factor": self.reduction_factor,
            "fidelity_final": self.fidelity_final,
            "final_field": matrix_to_json(self.final.data),
            "optimizer": None if self.config is None else self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def trace_csv(self) -> str:
        lines = ["k,d_k,p_seq_k"]
        p = 1.0
        lines.append(f"0,{self.initial_distance:.9g},{p:.9g}")
        for k, s in enumerate(self.steps, start=1):
            lines.append(f"{k},{s.distance_after:.9g},{s.p_seq:.9g}")
        return "\n".join(lines) + "\n"


def matrix_to_json(m: np.ndarray) -> list:
    """Nested [re, im] pairs, row-major."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


def run_sequence(
    rho0_target: DensityMatrix,
    gamma_t: float,
    k_max: int,
    cfg: OptimizerConfig,
    on_step=None,
) -> RecoveryReport:
    """Damp the target, then apply up to ``k_max`` optimized measurements.

    Stops as soon as the best measurement no longer lowers the distance to
    the target by more than ``cfg.ftol``; that trial is recorded as
    ``rejected`` and does not enter the sequence probability.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    damped = dissipate(rho0_target, gamma_t)
    current = damped
    d_prev = distance(current, rho0_target)
    d_initial = d_prev
    steps: list[StepRecord] = []
    rejected = None
    p_seq = 1.0

    def report() -> RecoveryReport:
        return RecoveryReport(
            gamma_t=float(gamma_t),
            target=rho0_target,
            damped=damped,
            final=current,
            initial_distance=d_initial,
            steps=tuple(steps),
            rejected=rejected,
            config=cfg,
        )

    while len(steps) < k_max and d_prev > cfg.ftol:
        try:
            params = optimize_cm(current, rho0_target, cfg)
        except OptimizationError as exc:
            exc.partial_report = report()
            raise
        outcome = apply_cm(current, params)
        if not outcome.succeeded:
            exc = OptimizationError("optimized measurement has zero probability")
            exc.partial_report = report()
            raise exc
        nxt = truncate(outcome.field, min_dim=rho0_target.dim)
        d = distance(nxt, rho0_target)
        record = StepRecord(params, outcome.probability, d, p_seq * outcome.probability)
        if not d < d_prev - cfg.ftol:
            rejected = record
            log.info("step %d does not improve distance (%.6g >= %.6g); stopping", len(steps) + 1, d, d_prev)
            break
        p_seq = record.p_seq
        steps.append(record)
        if on_step is not None:
            on_step(record)
        log.info("step %d: d=%.6g P=%.4f P_seq=%.4f", len(steps), d, outcome.probability, p_seq)
        current, d_prev = nxt, d
    return report()


@dataclass(frozen=True)
class TableRow:
    gamma_t: float
    p_seq: float
    filtering_probability: float
    recovered_fidelity: float


def filtering_probability(rho0: DensityMatrix, gamma_t: float) -> float:
    return fidelity(rho0, dissipate(rho0, gamma_t))


def table_compare(
    rho0_target: DensityMatrix,
    gamma_ts: Sequence[float],
    k: int,
    cfg: OptimizerConfig,
) -> list[TableRow]:
    """Sequence probability vs filtering probability for each damping value."""
    rows = []
    for g in gamma_ts:
        report = run_sequence(rho0_target, g, k, cfg)
        rows.append(TableRow(float(g), report.p_seq, filtering_probability(rho0_target, g), report.fidelity_final))
    return rows
