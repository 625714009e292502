"""WalkSAT (SKC variant) and an adapter for an external walksat binary.

Per step: pick a uniformly random unsatisfied clause; if any of its
variables can be flipped without breaking a currently satisfied clause
(break count 0), flip one of those, otherwise flip a random clause variable
with probability ``noise`` and the minimum-break variable with probability
1 - noise. Ties resolve to the first candidate in a seeded shuffle of the
clause, i.e. uniformly.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .anneal import SOLVER_WS, SolverRunResult
from .errors import (
    ExternalOutputError,
    ExternalProcessError,
    ExternalValidationError,
    ScheduleError,
)
from .instance import Assignment, KSatInstance, write_dimacs

__all__ = [
    "WalksatConfig",
    "WalksatTrace",
    "run_walksat",
    "default_max_flips",
    "external_walksat_adapter",
]


def default_max_flips(instance: KSatInstance) -> int:
    """Flip cap used when a config leaves max_flips unset: 100 * n * alpha
    (i.e. 100 sweeps' worth of flips per clause-to-variable ratio). This cap
    is a package choice, recorded in benchmark metadata rather than inherent
    to the heuristic.
    """
    return max(1, round(100 * instance.n * instance.alpha))


@dataclass(frozen=True)
class WalksatConfig:
    """SKC parameters. ``max_flips`` of None defers to default_max_flips."""

    noise: float = 0.5
    max_flips: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ScheduleError(f"noise must lie in [0, 1], got {self.noise}")
        if self.max_flips is not None and self.max_flips < 1:
            raise ScheduleError(f"max_flips must be at least 1, got {self.max_flips}")

    def resolved(self, instance: KSatInstance) -> "WalksatConfig":
        if self.max_flips is not None:
            return self
        return WalksatConfig(self.noise, default_max_flips(instance), self.seed)

    def to_json(self) -> dict:
        return {"solver": "ws", "noise": self.noise, "max_flips": self.max_flips}

    @classmethod
    def from_json(cls, obj: dict) -> "WalksatConfig":
        return cls(
            noise=obj.get("noise", 0.5),
            max_flips=obj.get("max_flips"),
            seed=obj.get("seed"),
        )


@dataclass(frozen=True)
class WalksatTrace:
    """Per-flip instrumentation: chosen break count, the clause minimum,
    and whether a zero-break variable was available."""

    chosen_break: np.ndarray
    min_break: np.ndarray
    had_zero_break: np.ndarray


def run_walksat(
    instance: KSatInstance,
    config: WalksatConfig,
    seed: int | None = None,
    initial: Assignment | None = None,
    trace: bool = False,
) -> SolverRunResult | tuple[SolverRunResult, WalksatTrace]:
    """One WalkSAT run; ``mcs_used`` counts single-variable flips.

    Starts uniformly at random unless ``initial`` injects a state (a
    satisfying start returns immediately with zero flips). Deterministic in
    the seed (argument wins over config.seed).
    """
    runseed = seed if seed is not None else config.seed
    if runseed is None:
        raise ScheduleError("walksat needs a seed (argument or config)")
    config = config.resolved(instance)
    comp = instance.compiled()
    rng = np.random.default_rng(runseed)
    if initial is None:
        bits = rng.integers(0, 2, size=instance.n).astype(np.uint8)
    else:
        if initial.n != instance.n:
            raise ScheduleError(
                f"initial assignment has {initial.n} variables, instance {instance.n}"
            )
        bits = initial.bits()
    cap = config.max_flips
    t_break = np.empty(cap if trace else 1, np.int64)
    t_min = np.empty(cap if trace else 1, np.int64)
    t_zero = np.empty(cap if trace else 1, np.uint8)
    flips, unsat = _kernels.walksat_run(
        comp.n, comp.lit_var, comp.lit_neg, comp.cl_indptr,
        comp.occ_indptr, comp.occ_clause, comp.occ_neg,
        float(config.noise), int(cap), bits, rng,
        trace, t_break, t_min, t_zero,
    )
    energy = int(unsat)
    result = SolverRunResult(
        final_assignment=Assignment.from_bits(bits),
        final_energy=energy,
        satisfied=energy == 0,
        mcs_used=int(flips),
        seed=runseed,
        solver_id=SOLVER_WS,
    )
    if trace:
        return result, WalksatTrace(
            chosen_break=t_break[:flips].copy(),
            min_break=t_min[:flips].copy(),
            had_zero_break=t_zero[:flips].copy(),
        )
    return result


def _parse_walksat_output(text: str, n: int) -> Assignment:
    signed: list[int] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("v "):
            stripped = stripped[2:]
        tokens = stripped.split()
        if not tokens:
            continue
        try:
            values = [int(tok) for tok in tokens]
        except ValueError:
            continue
        signed.extend(values)
    signed = [v for v in signed if v != 0]
    seen: dict[int, bool] = {}
    for v in signed:
        var = abs(v)
        if not 1 <= var <= n:
            raise ExternalOutputError(f"literal {v} outside declared range 1..{n}")
        if var in seen and seen[var] != (v > 0):
            raise ExternalOutputError(f"contradictory polarity for variable {var}")
        seen[var] = v > 0
    if len(seen) != n:
        raise ExternalOutputError(
            f"output assigns {len(seen)} of {n} variables"
        )
    bits = np.array([1 if seen[i + 1] else 0 for i in range(n)], dtype=np.uint8)
    return Assignment.from_bits(bits)


def external_walksat_adapter(
    instance: KSatInstance,
    binary_path: str | Path,
    seed: int,
    extra_args: tuple[str, ...] = (),
    timeout: float | None = None,
) -> SolverRunResult:
    """Run an external walksat binary on the instance and validate its answer.

    Writes DIMACS to a scratch directory and invokes the binary with
    ``-printonlysol=TRUE -out <file> -seed <seed>``. Seeds must be positive
    and should differ per run. Raises ExternalProcessError when the process
    cannot run, ExternalOutputError when its output cannot be parsed as a
    complete assignment, and ExternalValidationError when the parsed
    assignment fails the instance.
    """
    if seed < 1:
        raise ScheduleError(f"external walksat needs a positive seed, got {seed}")
    with tempfile.TemporaryDirectory(prefix="satfilter-ws-") as scratch:
        cnf_path = Path(scratch) / "instance.cnf"
        out_path = Path(scratch) / "solution.out"
        write_dimacs(instance, cnf_path)
        cmd = [
            str(binary_path),
            "-printonlysol=TRUE",
            "-out",
            str(out_path),
            "-seed",
            str(seed),
            *extra_args,
            str(cnf_path),
        ]
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=timeout
            )
        except OSError as exc:
            raise ExternalProcessError(f"failed to launch {binary_path}: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise ExternalProcessError(f"{binary_path} timed out") from exc
        if not out_path.exists():
            if proc.returncode != 0:
                raise ExternalProcessError(
                    f"{binary_path} exited with {proc.returncode} and wrote no output"
                )
            raise ExternalOutputError(f"{binary_path} produced no output file")
        assignment = _parse_walksat_output(out_path.read_text(encoding="utf-8"), instance.n)
    energy = instance.energy(assignment)
    if energy != 0:
        raise ExternalValidationError(
            f"external solver returned a non-satisfying assignment (energy {energy})"
        )
    return SolverRunResult(
        final_assignment=assignment,
        final_energy=0,
        satisfied=True,
        mcs_used=0,
        seed=seed,
        solver_id=SOLVER_WS,
    )
