"""Simulated annealing and simulated quantum annealing over k-SAT energy.

The energy of an assignment is its number of unsatisfied clauses; single
flips are accepted with the Metropolis probability min(exp(-beta dE), 1).
SA ramps beta linearly over the sweep budget. SQA Trotterizes a transverse
field into a chain of replica slices (open imaginary-time boundaries),
joins adjacent aligned slices with probability 1 - tanh(Gamma dtau), and
flips whole clusters on the mean classical delta while Gamma falls linearly
at constant temperature. One MCS is one attempted update per variable site.

A non-positive Gamma is treated as infinite inter-slice coupling: the
replicas lock into a single cluster and the dynamics become plain SA at
fixed beta, bit-for-bit under a shared seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionError, ScheduleError
from .instance import Assignment, KSatInstance

__all__ = [
    "SOLVER_SA",
    "SOLVER_SQA",
    "SOLVER_WS",
    "SaSchedule",
    "SqaSchedule",
    "SqaState",
    "SolverRunResult",
    "ContinuousTimeWarning",
    "metropolis_accept_probability",
    "trotter_coupling",
    "run_sa",
    "run_sqa",
    "boltzmann_state_counts",
    "equilibrium_magnetization",
]

SOLVER_SA = "SA"
SOLVER_SQA = "SQA"
SOLVER_WS = "WS"

Observer = Callable[[int, float, int], None]


class ContinuousTimeWarning(UserWarning):
    """beta * Gamma_0 / slices is large; the Trotter grid is too coarse."""


def metropolis_accept_probability(delta_e: float, beta: float) -> float:
    """min(exp(-beta * delta_e), 1); always 1 for non-positive deltas."""
    if beta < 0:
        raise ScheduleError(f"negative inverse temperature {beta}")
    if delta_e <= 0:
        return 1.0
    return min(1.0, math.exp(-beta * delta_e))


def trotter_coupling(gamma: float, beta: float, slices: int) -> float:
    """Inter-slice ferromagnetic coupling -(1/2beta) ln tanh(Gamma beta/slices).

    Non-positive Gamma returns +inf: the replicas are locked (classical
    limit). Positive and finite otherwise.
    """
    if beta <= 0:
        raise ScheduleError(f"inverse temperature must be positive, got {beta}")
    if slices < 1:
        raise ScheduleError(f"slice count must be positive, got {slices}")
    if gamma <= 0:
        return math.inf
    return -0.5 / beta * math.log(math.tanh(gamma * beta / slices))


@dataclass(frozen=True)
class SaSchedule:
    """Linear inverse-temperature ramp beta_0 -> beta_1 over mcs sweeps."""

    beta_0: float
    beta_1: float
    mcs: int

    def __post_init__(self):
        if self.beta_0 < 0 or self.beta_1 < 0:
            raise ScheduleError("inverse temperatures must be non-negative")
        if self.beta_1 < self.beta_0:
            raise ScheduleError(
                f"decreasing schedule beta_0={self.beta_0} > beta_1={self.beta_1}"
            )
        if self.mcs < 1:
            raise ScheduleError(f"sweep budget must be at least 1, got {self.mcs}")

    def beta_at(self, sweep: int) -> float:
        if self.mcs == 1:
            return self.beta_0
        return self.beta_0 + (self.beta_1 - self.beta_0) * sweep / (self.mcs - 1)

    def betas(self) -> np.ndarray:
        if self.mcs == 1:
            return np.array([self.beta_0])
        return np.linspace(self.beta_0, self.beta_1, self.mcs)

    def to_json(self) -> dict:
        return {
            "solver": "sa",
            "beta_0": self.beta_0,
            "beta_1": self.beta_1,
            "mcs": self.mcs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SaSchedule":
        return cls(beta_0=obj["beta_0"], beta_1=obj["beta_1"], mcs=obj["mcs"])


@dataclass(frozen=True)
class SqaSchedule:
    """Linear transverse-field ramp Gamma_0 -> Gamma_1 at constant beta.

    ``slices`` is the imaginary-time replica count M (dtau = beta/M). The
    optional ``spatial_sweep`` adds a per-slice single-flip Metropolis sweep
    after each cluster pass (off by default; cluster moves alone are the
    reference dynamics).
    """

    gamma_0: float
    gamma_1: float
    beta: float
    slices: int
    mcs: int
    spatial_sweep: bool = False

    def __post_init__(self):
        if self.gamma_1 < 0:
            raise ScheduleError(f"negative final field gamma_1={self.gamma_1}")
        if self.gamma_0 < self.gamma_1:
            raise ScheduleError(
                f"increasing field schedule gamma_0={self.gamma_0} < gamma_1={self.gamma_1}"
            )
        if self.beta <= 0:
            raise ScheduleError(f"inverse temperature must be positive, got {self.beta}")
        if self.slices < 2:
            raise ScheduleError(f"need at least 2 slices, got {self.slices}")
        if self.mcs < 1:
            raise ScheduleError(f"sweep budget must be at least 1, got {self.mcs}")
        if self.beta * self.gamma_0 / self.slices > 0.5:
            warnings.warn(
                f"beta*gamma_0/slices = {self.beta * self.gamma_0 / self.slices:.3f} "
                "> 0.5; increase slices for a usable continuous-time limit",
                ContinuousTimeWarning,
                stacklevel=2,
            )

    @property
    def dtau(self) -> float:
        return self.beta / self.slices

    def gamma_at(self, sweep: int) -> float:
        if self.mcs == 1:
            return self.gamma_0
        return self.gamma_0 + (self.gamma_1 - self.gamma_0) * sweep / (self.mcs - 1)

    def gammas(self) -> np.ndarray:
        if self.mcs == 1:
            return np.array([self.gamma_0])
        return np.linspace(self.gamma_0, self.gamma_1, self.mcs)

    def to_json(self) -> dict:
        return {
            "solver": "sqa",
            "gamma_0": self.gamma_0,
            "gamma_1": self.gamma_1,
            "beta": self.beta,
            "slices": self.slices,
            "mcs": self.mcs,
            "spatial_sweep": self.spatial_sweep,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SqaSchedule":
        return cls(
            gamma_0=obj["gamma_0"],
            gamma_1=obj["gamma_1"],
            beta=obj["beta"],
            slices=obj["slices"],
            mcs=obj["mcs"],
            spatial_sweep=obj.get("spatial_sweep", False),
        )


@dataclass(frozen=True)
class SqaState:
    """Final replica state: bit matrix (slices x n) plus cached energies."""

    replicas: np.ndarray
    energies: np.ndarray

    @property
    def slices(self) -> int:
        return self.replicas.shape[0]

    def slice_assignment(self, p: int) -> Assignment:
        return Assignment.from_bits(self.replicas[p])


@dataclass(frozen=True)
class SolverRunResult:
    """Outcome of a single solver run.

    ``mcs_used`` counts full sweeps for SA/SQA and single-variable flips
    for WalkSAT (its natural unit; see the bench notes).
    """

    final_assignment: Assignment
    final_energy: int
    satisfied: bool
    mcs_used: int
    seed: int
    solver_id: str

    def __post_init__(self):
        if self.satisfied != (self.final_energy == 0):
            raise ValueError("satisfied flag must mirror final_energy == 0")

    def to_record(self, instance_id: str, run: int, schedule_json: dict) -> dict:
        return {
            "instance": instance_id,
            "solver": self.solver_id,
            "run": run,
            "seed": self.seed,
            "n": self.final_assignment.n,
            "assignment": self.final_assignment.to_hex(),
            "energy": self.final_energy,
            "satisfied": self.satisfied,
            "mcs": self.mcs_used,
            "schedule": schedule_json,
        }


def _notify(observer: Observer | None, controls: np.ndarray, trace: np.ndarray) -> None:
    if observer is None:
        return
    for t in range(trace.size):
        observer(t, float(controls[t]), int(trace[t]))


def run_sa(
    instance: KSatInstance,
    schedule: SaSchedule,
    seed: int,
    observer: Observer | None = None,
) -> SolverRunResult:
    """One SA run from a uniform random start; n flip proposals per sweep,
    sites visited in a fresh random permutation each sweep. Deterministic
    in ``seed``.
    """
    comp = instance.compiled()
    rng = np.random.default_rng(seed)
    betas = schedule.betas()
    bits, elast, trace = _kernels.sa_run(
        comp.n, comp.lit_var, comp.lit_neg, comp.cl_indptr,
        comp.occ_indptr, comp.occ_clause, comp.occ_neg, betas, rng,
    )
    _notify(observer, betas, trace)
    energy = int(elast)
    return SolverRunResult(
        final_assignment=Assignment.from_bits(bits),
        final_energy=energy,
        satisfied=energy == 0,
        mcs_used=schedule.mcs,
        seed=seed,
        solver_id=SOLVER_SA,
    )


def run_sqa(
    instance: KSatInstance,
    schedule: SqaSchedule,
    seed: int,
    observer: Observer | None = None,
    return_state: bool = False,
) -> SolverRunResult | tuple[SolverRunResult, SqaState]:
    """One SQA run; the result is the minimum-energy slice at the end
    (ties to the lowest slice index). Deterministic in ``seed``.

    Replicas start independently uniform at random, except when the
    schedule already begins at Gamma <= 0: the infinite-coupling sentinel
    then starts them locked on one shared random assignment, making the
    whole run equivalent to fixed-temperature SA under the same seed.
    """
    comp = instance.compiled()
    rng = np.random.default_rng(seed)
    gammas = schedule.gammas()
    dtau = schedule.dtau
    p_joins = 1.0 - np.tanh(np.maximum(gammas, 0.0) * dtau)
    if schedule.spatial_sweep:
        j_perps = np.array(
            [trotter_coupling(g, schedule.beta, schedule.slices) if g > 0 else math.inf
             for g in gammas]
        )
    else:
        j_perps = np.zeros_like(gammas)
    spins, energies, trace = _kernels.sqa_run(
        comp.n, comp.lit_var, comp.lit_neg, comp.cl_indptr,
        comp.occ_indptr, comp.occ_clause, comp.occ_neg,
        gammas, p_joins, j_perps, float(schedule.beta), schedule.slices,
        schedule.spatial_sweep, rng,
    )
    _notify(observer, gammas, trace)
    best_p = int(np.argmin(energies))
    energy = int(energies[best_p])
    result = SolverRunResult(
        final_assignment=Assignment.from_bits(spins[:, best_p]),
        final_energy=energy,
        satisfied=energy == 0,
        mcs_used=schedule.mcs,
        seed=seed,
        solver_id=SOLVER_SQA,
    )
    if return_state:
        return result, SqaState(replicas=spins.T.copy(), energies=energies.copy())
    return result


def boltzmann_state_counts(
    instance: KSatInstance, beta: float, sweeps: int, seed: int
) -> np.ndarray:
    """Visit counts of all 2^n states for a fixed-temperature SA chain,
    sampled once per sweep. Validation utility for small n (<= 16).
    """
    if instance.n > 16:
        raise DimensionError(f"state histogram needs n <= 16, got {instance.n}")
    if beta < 0:
        raise ScheduleError(f"negative inverse temperature {beta}")
    comp = instance.compiled()
    rng = np.random.default_rng(seed)
    return _kernels.sa_state_histogram(
        comp.n, comp.lit_var, comp.lit_neg, comp.cl_indptr,
        comp.occ_indptr, comp.occ_clause, comp.occ_neg,
        float(beta), int(sweeps), rng,
    )


def equilibrium_magnetization(
    instance: KSatInstance,
    gamma: float,
    beta: float,
    slices: int,
    sweeps: int,
    warmup: int,
    seed: int,
    boundary: str = "periodic",
) -> float:
    """Mean +/-1 magnetization of the replica field at fixed Gamma and beta.

    ``boundary`` selects the imaginary-time topology: "periodic" closes the
    replica ring (the quantum thermal trace), "open" matches the annealing
    chain. Validation utility for comparing against exact statistics.
    """
    if boundary not in ("periodic", "open"):
        raise ScheduleError(f"unknown boundary {boundary!r}")
    if gamma < 0:
        raise ScheduleError(f"negative transverse field {gamma}")
    if beta <= 0:
        raise ScheduleError(f"inverse temperature must be positive, got {beta}")
    if slices < 2:
        raise ScheduleError(f"need at least 2 slices, got {slices}")
    if not 0 <= warmup < sweeps:
        raise ScheduleError(f"warmup {warmup} must lie inside the sweep budget {sweeps}")
    comp = instance.compiled()
    rng = np.random.default_rng(seed)
    return float(
        _kernels.sqa_sample_sz(
            comp.n, comp.lit_var, comp.lit_neg, comp.cl_indptr,
            comp.occ_indptr, comp.occ_clause, comp.occ_neg,
            float(gamma), float(beta), int(slices), int(sweeps), int(warmup),
            boundary == "periodic", rng,
        )
    )
