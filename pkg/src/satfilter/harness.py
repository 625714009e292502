"""Experiment orchestration: instance batches, schedule tuning, censuses.

The protocols here mirror how the solver comparison is actually run: draw a
batch of random instances, pick a sweep budget by doubling until more sweeps
stop paying off, tune each annealer's schedule on a grid with pilot runs,
then run the full census with per-run derived seeds. Everything is a pure
function of the experiment spec and its master seed, so outputs (census
files included) are byte-for-byte reproducible and safely resumable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .anneal import SOLVER_SA, SOLVER_SQA, SOLVER_WS, SaSchedule, SqaSchedule
from .diversity import (
    CensusRecord,
    SolutionCensus,
    distinct_solutions_curve,
    read_census,
    record_line,
    write_census,
    write_curves_csv,
)
from .errors import DomainError, ScheduleError
from .instance import (
    KSatInstance,
    clauses_for_target_efficiency,
    generate_instance,
    write_dimacs,
    write_sidecar,
)
from .seeds import derive_seed
from .solvers import Schedule, run_solver, schedule_from_json, schedule_to_json
from .walksat import WalksatConfig

WORKERS_ENV = "SATFILTER_WORKERS"

DEFAULT_SA_GRID: tuple[tuple[float, float], ...] = tuple(
    (b0, b1) for b0 in (0.05, 0.3, 1.0) for b1 in (1.0, 3.0, 10.0)
)
# (gamma_0, gamma_1, beta, slices); points violating the continuous-time
# guard beta*gamma_0/slices <= 0.5 are reported as rejected, not evaluated.
DEFAULT_SQA_GRID: tuple[tuple[float, float, float, int], ...] = tuple(
    (g0, 0.0, b, m)
    for g0 in (1.0, 2.0, 4.0)
    for b in (0.5, 1.0, 2.0, 4.0)
    for m in (32, 64, 128)
)

OBJECTIVES = ("max_distinct_solutions", "min_effort_99")


# --------------------------------------------------------------- spec types

@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment.

    Exactly one of m / alpha / target_efficiency fixes the clause count, and
    exactly one of n / n_grid fixes the sizes. A fixed ``mcs`` skips budget
    doubling (that is also the hook for deliberately reusing a budget chosen
    elsewhere). ``pilot_instances`` of None tunes on the whole batch.
    """

    k: int
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    m: int | None = None
    alpha: float | None = None
    target_efficiency: float | None = None
    instance_count: int = 20
    runs_per_instance: int = 2000
    master_seed: int = 0
    solvers: tuple[str, ...] = (SOLVER_SA, SOLVER_SQA, SOLVER_WS)
    mcs: int | None = None
    mcs_start: int = 32
    mcs_max: int = 4096
    mcs_threshold: float = 0.02
    sa_grid: tuple[tuple[float, float], ...] = DEFAULT_SA_GRID
    sqa_grid: tuple[tuple[float, float, float, int], ...] = DEFAULT_SQA_GRID
    ws_noise: float = 0.5
    pilot_instances: int | None = None
    pilot_runs: int = 30
    scaling_runs: int = 60
    workers: int = 1

    def __post_init__(self):
        for name in ("n_grid", "solvers"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "sa_grid", tuple(tuple(p) for p in self.sa_grid))
        object.__setattr__(
            self, "sqa_grid", tuple(tuple(p) for p in self.sqa_grid)
        )
        if self.k < 1:
            raise DomainError(f"k must be at least 1, got {self.k}")
        if (self.n is None) == (self.n_grid is None):
            raise DomainError("exactly one of n / n_grid must be given")
        sizes = (self.n,) if self.n is not None else self.n_grid
        if not sizes:
            raise DomainError("empty n_grid")
        for n in sizes:
            if n < self.k:
                raise DomainError(f"n={n} smaller than clause width k={self.k}")
        given = [
            name
            for name in ("m", "alpha", "target_efficiency")
            if getattr(self, name) is not None
        ]
        if len(given) != 1:
            raise DomainError(
                f"exactly one of m / alpha / target_efficiency must be given, got {given}"
            )
        if self.m is not None and self.m < 1:
            raise DomainError("m must be at least 1")
        if self.alpha is not None and self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.target_efficiency is not None and self.target_efficiency <= 0:
            raise DomainError("target_efficiency must be positive")
        if self.instance_count < 1:
            raise DomainError("instance_count must be at least 1")
        if self.runs_per_instance < 0:
            raise DomainError("runs_per_instance must be non-negative")
        if not self.solvers:
            raise DomainError("no solvers selected")
        for solver in self.solvers:
            if solver not in (SOLVER_SA, SOLVER_SQA, SOLVER_WS):
                raise DomainError(f"unknown solver {solver!r}")
        if self.mcs is not None and self.mcs < 1:
            raise DomainError("mcs must be at least 1")
        if self.mcs_start < 1 or self.mcs_max < self.mcs_start:
            raise DomainError("need 1 <= mcs_start <= mcs_max")
        if self.mcs_threshold <= 0:
            raise DomainError("mcs_threshold must be positive")
        if not self.sa_grid or not self.sqa_grid:
            raise DomainError("schedule grids must be non-empty")
        if not 0.0 <= self.ws_noise <= 1.0:
            raise DomainError("ws_noise must lie in [0, 1]")
        if self.pilot_instances is not None and self.pilot_instances < 1:
            raise DomainError("pilot_instances must be at least 1")
        if self.pilot_runs < 1:
            raise DomainError("pilot_runs must be at least 1")
        if self.scaling_runs < 1:
            raise DomainError("scaling_runs must be at least 1")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    def m_for(self, n: int) -> int:
        if self.m is not None:
            return self.m
        if self.alpha is not None:
            m = round(self.alpha * n)
            if m < 1:
                raise DomainError(f"alpha={self.alpha} gives no clauses at n={n}")
            return m
        return clauses_for_target_efficiency(n, self.k, self.target_efficiency)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "n_grid": list(self.n_grid) if self.n_grid is not None else None,
            "m": self.m,
            "alpha": self.alpha,
            "target_efficiency": self.target_efficiency,
            "instance_count": self.instance_count,
            "runs_per_instance": self.runs_per_instance,
            "master_seed": self.master_seed,
            "solvers": list(self.solvers),
            "mcs": self.mcs,
            "mcs_start": self.mcs_start,
            "mcs_max": self.mcs_max,
            "mcs_threshold": self.mcs_threshold,
            "sa_grid": [list(p) for p in self.sa_grid],
            "sqa_grid": [list(p) for p in self.sqa_grid],
            "ws_noise": self.ws_noise,
            "pilot_instances": self.pilot_instances,
            "pilot_runs": self.pilot_runs,
            "scaling_runs": self.scaling_runs,
            "workers": self.workers,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise DomainError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**{k: obj[k] for k in obj})

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentSpec":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                return cls.from_json(tomllib.load(fh))
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class GridPointReport:
    """One evaluated (or guard-rejected) schedule grid point."""

    solver: str
    schedule: dict
    mean_distinct: float
    success_probability: float
    effort_99: float
    rejected: bool = False


@dataclass(frozen=True)
class EffortRecord:
    """Scaling-study row: effort to reach one solution with 99% probability."""

    n: int
    solver: str
    mcs_per_run: int
    runs: int
    successes: int
    success_probability: float
    stderr: float
    effort_99: float


# ------------------------------------------------------------ effort model

def runs_needed_99(p: float) -> float:
    """Independent repetitions needed for >= 99% cumulative success.

    Returns math.inf for p = 0 (the never-succeeds sentinel).
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"success probability {p} outside [0, 1]")
    if p == 0.0:
        return math.inf
    if p == 1.0:
        return 1
    return max(1, math.ceil(math.log(0.01) / math.log(1.0 - p)))


def effort_99(mcs_per_run: int, p: float) -> float:
    return mcs_per_run * runs_needed_99(p)


def _binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1.0 - p) / trials) if trials > 0 else 0.0


# -------------------------------------------------------- instance batches

def generate_batch(
    spec: ExperimentSpec, n: int, purpose: str = "census"
) -> list[tuple[str, KSatInstance]]:
    """The spec's instance batch for one size; ids sort in index order."""
    width = max(3, len(str(spec.instance_count - 1)))
    batch = []
    for idx in range(spec.instance_count):
        seed = derive_seed(spec.master_seed, "instance", purpose, n, idx)
        inst = generate_instance(n, spec.k, spec.m_for(n), seed)
        batch.append((f"n{n}-i{idx:0{width}d}", inst))
    return batch


# ------------------------------------------------------------- schedule fit

def _sa_candidates(spec: ExperimentSpec, mcs: int) -> list[SaSchedule | None]:
    out = []
    for beta_0, beta_1 in spec.sa_grid:
        try:
            out.append(SaSchedule(beta_0=beta_0, beta_1=beta_1, mcs=mcs))
        except ScheduleError:
            out.append(None)
    return out


def _sqa_candidates(spec: ExperimentSpec, mcs: int) -> list[SqaSchedule | None]:
    out = []
    for gamma_0, gamma_1, beta, slices in spec.sqa_grid:
        if beta * gamma_0 / slices > 0.5:
            out.append(None)
            continue
        try:
            out.append(
                SqaSchedule(
                    gamma_0=gamma_0, gamma_1=gamma_1, beta=beta,
                    slices=slices, mcs=mcs,
                )
            )
        except ScheduleError:
            out.append(None)
    return out


def _rejected_point(solver: str, point: tuple) -> GridPointReport:
    if solver == SOLVER_SA:
        raw = {"solver": "sa", "beta_0": point[0], "beta_1": point[1]}
    else:
        raw = {
            "solver": "sqa", "gamma_0": point[0], "gamma_1": point[1],
            "beta": point[2], "slices": point[3],
        }
    return GridPointReport(
        solver=solver, schedule=raw, mean_distinct=math.nan,
        success_probability=math.nan, effort_99=math.inf, rejected=True,
    )


def ws_schedule(spec: ExperimentSpec, n: int, mcs: int) -> WalksatConfig:
    # One sweep equals n proposals, so the flip cap matching an annealer
    # budget of `mcs` sweeps is mcs * n.
    return WalksatConfig(noise=spec.ws_noise, max_flips=max(1, mcs * n))


def _pilot_blocks(
    spec: ExperimentSpec,
    solver: str,
    schedule: Schedule,
    instances: Sequence[tuple[str, KSatInstance]],
    point_idx: int,
    mcs: int,
) -> list[dict]:
    blocks = []
    for inst_idx, (iid, inst) in enumerate(instances):
        seeds = [
            derive_seed(
                spec.master_seed, "pilot", solver, mcs, point_idx, inst_idx, run
            )
            for run in range(spec.pilot_runs)
        ]
        blocks.append(
            {"id": iid, "instance": inst, "solver": solver,
             "schedule": schedule, "seeds": seeds, "first_run": 0}
        )
    return blocks


def _pilot_instances(
    spec: ExperimentSpec, instances: Sequence[tuple[str, KSatInstance]]
) -> Sequence[tuple[str, KSatInstance]]:
    if spec.pilot_instances is None:
        return instances
    return instances[: spec.pilot_instances]


_schedule_cache: dict = {}


def optimize_schedule(
    spec: ExperimentSpec,
    solver: str,
    objective: str,
    mcs: int,
    instances: Sequence[tuple[str, KSatInstance]] | None = None,
    workers: int | None = None,
) -> tuple[Schedule, list[GridPointReport]]:
    """Grid-search an annealer's schedule with pilot runs on the batch.

    Every grid point is evaluated with ``spec.pilot_runs`` runs per pilot
    instance and reported, so the choice is auditable; ties go to the first
    point in grid order. WalkSAT has nothing to tune and is returned as-is.
    """
    if objective not in OBJECTIVES:
        raise DomainError(f"unknown objective {objective!r}")
    if instances is None:
        if spec.n is None:
            raise DomainError("schedule tuning needs an instance batch or spec.n")
        instances = generate_batch(spec, spec.n)
    pilots = _pilot_instances(spec, instances)
    n = pilots[0][1].n
    if solver == SOLVER_WS:
        sched = ws_schedule(spec, n, mcs)
        return sched, [
            GridPointReport(
                solver=solver, schedule=schedule_to_json(sched),
                mean_distinct=math.nan, success_probability=math.nan,
                effort_99=math.inf,
            )
        ]
    if solver == SOLVER_SA:
        candidates = _sa_candidates(spec, mcs)
        points = spec.sa_grid
    elif solver == SOLVER_SQA:
        candidates = _sqa_candidates(spec, mcs)
        points = spec.sqa_grid
    else:
        raise DomainError(f"unknown solver {solver!r}")
    cache_key = (
        json.dumps(spec.to_json(), sort_keys=True),
        solver, objective, mcs, tuple(iid for iid, _ in pilots),
    )
    if cache_key in _schedule_cache:
        return _schedule_cache[cache_key]

    reports: list[GridPointReport] = []
    best: Schedule | None = None
    best_score: float | None = None
    for point_idx, (point, schedule) in enumerate(zip(points, candidates)):
        if schedule is None:
            reports.append(_rejected_point(solver, point))
            continue
        blocks = _pilot_blocks(spec, solver, schedule, pilots, point_idx, mcs)
        per_instance_distinct = []
        successes = 0
        total = 0
        for block, records in zip(blocks, _execute_blocks(blocks, workers or 1)):
            found = {rec.assignment for rec in records if rec.satisfied}
            per_instance_distinct.append(len(found))
            successes += sum(rec.satisfied for rec in records)
            total += len(records)
        mean_distinct = float(sum(per_instance_distinct)) / len(per_instance_distinct)
        p = successes / total if total else 0.0
        report = GridPointReport(
            solver=solver, schedule=schedule_to_json(schedule),
            mean_distinct=mean_distinct, success_probability=p,
            effort_99=effort_99(mcs, p),
        )
        reports.append(report)
        if objective == "max_distinct_solutions":
            score = mean_distinct
            better = best_score is None or score > best_score
        else:
            score = report.effort_99
            better = best_score is None or score < best_score
        if better:
            best, best_score = schedule, score
    if best is None:
        raise ScheduleError(f"every {solver} grid point was rejected")
    _schedule_cache[cache_key] = (best, reports)
    return best, reports


def select_mcs(
    spec: ExperimentSpec,
    instances: Sequence[tuple[str, KSatInstance]] | None = None,
    workers: int | None = None,
) -> tuple[int, list[dict]]:
    """Double the sweep budget until tuned annealers stop finding more.

    At each budget the SA/SQA schedules are re-tuned (objective: distinct
    solutions) and the best mean distinct count compared with the previous
    budget; once every annealer improves by less than ``mcs_threshold`` the
    previous budget is kept. Returns (budget, per-round report rows).
    """
    if instances is None:
        if spec.n is None:
            raise DomainError("budget selection needs an instance batch or spec.n")
        instances = generate_batch(spec, spec.n)
    annealers = [s for s in spec.solvers if s in (SOLVER_SA, SOLVER_SQA)]
    rows: list[dict] = []
    if not annealers:
        return spec.mcs_start, rows
    mcs = spec.mcs_start
    previous: dict[str, float] | None = None
    while True:
        current = {}
        for solver in annealers:
            _, reports = optimize_schedule(
                spec, solver, "max_distinct_solutions", mcs, instances, workers
            )
            current[solver] = max(
                (r.mean_distinct for r in reports if not r.rejected), default=0.0
            )
        for solver in annealers:
            gain = math.nan
            if previous is not None:
                base = previous[solver]
                gain = (current[solver] - base) / base if base > 0 else (
                    1.0 if current[solver] > 0 else 0.0
                )
            rows.append(
                {"mcs": mcs, "solver": solver,
                 "mean_distinct": current[solver], "gain": gain}
            )
        if previous is not None:
            gains = []
            for solver in annealers:
                base = previous[solver]
                if base > 0:
                    gains.append((current[solver] - base) / base)
                else:
                    gains.append(1.0 if current[solver] > 0 else 0.0)
            if all(g < spec.mcs_threshold for g in gains):
                return mcs // 2, rows
        if mcs * 2 > spec.mcs_max:
            return mcs, rows
        previous = current
        mcs *= 2


# ------------------------------------------------------------- census runs

def _run_block(block: dict) -> list[CensusRecord]:
    """Worker task: all requested runs of one solver on one instance."""
    inst = block["instance"]
    schedule = block["schedule"]
    schedule_json = schedule_to_json(schedule)
    records = []
    for offset, seed in enumerate(block["seeds"]):
        result = run_solver(inst, schedule, seed)
        run = block["first_run"] + offset
        records.append(
            CensusRecord.from_json(result.to_record(block["id"], run, schedule_json))
        )
    return records


def _execute_blocks(blocks: list[dict], workers: int):
    """Yield each block's records, in block order, serial or via a pool."""
    if workers <= 1 or len(blocks) <= 1:
        for block in blocks:
            yield _run_block(block)
        return
    with ProcessPoolExecutor(max_workers=min(workers, len(blocks))) as pool:
        yield from pool.map(_run_block, blocks, chunksize=1)


def resolve_workers(spec: ExperimentSpec, explicit: int | None = None) -> int:
    """Worker count priority: explicit argument, then env override, then spec."""
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{WORKERS_ENV}={env!r} is not an integer") from None
    return max(1, spec.workers)


def run_census(
    spec: ExperimentSpec,
    schedules: Mapping[str, Schedule],
    instances: Sequence[tuple[str, KSatInstance]] | None = None,
    out_dir: str | Path | None = None,
    workers: int | None = None,
    progress=None,
) -> SolutionCensus:
    """Run every (instance, solver, run) cell and collect the records.

    With ``out_dir`` the census goes to census.jsonl with a journal of
    partial results alongside; an interrupted run picks up where it stopped
    and the final file is byte-identical to an uninterrupted one. Completed
    (instance, solver, run) cells are never recomputed.
    """
    if instances is None:
        if spec.n is None:
            raise DomainError("census needs an instance batch or spec.n")
        instances = generate_batch(spec, spec.n)
    workers = resolve_workers(spec, workers)
    by_key: dict[tuple, CensusRecord] = {}
    journal = None
    final_path = partial_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        final_path = out_dir / "census.jsonl"
        partial_path = out_dir / "census.partial.jsonl"
        for path in (final_path, partial_path):
            if path.exists():
                for rec in read_census(path):
                    by_key[(rec.instance, rec.solver, rec.run)] = rec

    blocks = []
    for inst_idx, (iid, inst) in enumerate(instances):
        for solver in spec.solvers:
            if solver not in schedules:
                raise ScheduleError(f"no schedule provided for solver {solver}")
            schedule = schedules[solver]
            pending = [
                (run, derive_seed(spec.master_seed, "run", inst.n, inst_idx, solver, run))
                for run in range(spec.runs_per_instance)
                if (iid, solver, run) not in by_key
            ]
            # contiguous run ranges keep the blocks simple; gaps only appear
            # if a journal was hand-edited, and then we just recompute the tail
            if not pending:
                continue
            first = min(run for run, _ in pending)
            seeds = [
                derive_seed(spec.master_seed, "run", inst.n, inst_idx, solver, run)
                for run in range(first, spec.runs_per_instance)
            ]
            blocks.append(
                {"id": iid, "instance": inst, "solver": solver,
                 "schedule": schedule, "seeds": seeds, "first_run": first}
            )
    try:
        if partial_path is not None and blocks:
            journal = open(partial_path, "a", encoding="utf-8")
        for block, records in zip(blocks, _execute_blocks(blocks, workers)):
            for rec in records:
                by_key[(rec.instance, rec.solver, rec.run)] = rec
            if journal is not None:
                for rec in records:
                    journal.write(record_line(rec))
                    journal.write("\n")
                journal.flush()
            if progress is not None:
                progress(block["id"], block["solver"], len(records))
    finally:
        if journal is not None:
            journal.close()
    records = list(by_key.values())
    if final_path is not None:
        write_census(final_path, records)
        if partial_path.exists():
            partial_path.unlink()
    return SolutionCensus(records, dict(instances))


# --------------------------------------------------------------- reporting

def write_grid_csv(path: str | Path, reports: Sequence[GridPointReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["solver", "schedule", "mean_distinct", "success_probability",
             "effort_99", "rejected"]
        )
        for r in reports:
            writer.writerow(
                [r.solver, json.dumps(r.schedule, sort_keys=True),
                 repr(r.mean_distinct), repr(r.success_probability),
                 repr(r.effort_99), int(r.rejected)]
            )


def write_mcs_csv(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mcs", "solver", "mean_distinct", "gain"])
        for row in rows:
            writer.writerow(
                [row["mcs"], row["solver"], repr(row["mean_distinct"]),
                 repr(row["gain"])]
            )


def write_effort_csv(path: str | Path, records: Sequence[EffortRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "solver", "mcs_per_run", "runs", "successes",
             "success_probability", "stderr", "effort_99"]
        )
        for r in records:
            writer.writerow(
                [r.n, r.solver, r.mcs_per_run, r.runs, r.successes,
                 repr(r.success_probability), repr(r.stderr), repr(r.effort_99)]
            )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, master_seed: int) -> None:
    """Content manifest of a run directory: file -> sha256, no timestamps."""
    files = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            files[str(path.relative_to(out_dir))] = _sha256(path)
    payload = {"master_seed": master_seed, "files": files}
    (out_dir / "manifest.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _write_instances(out_dir: Path, batch: Sequence[tuple[str, KSatInstance]]) -> None:
    inst_dir = out_dir / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    for iid, inst in batch:
        write_dimacs(inst, inst_dir / f"{iid}.cnf")
        write_sidecar(inst, inst_dir / f"{iid}.json")


# ------------------------------------------------------ end-to-end drivers

def run_experiment(
    spec: ExperimentSpec, out_dir: str | Path, workers: int | None = None
) -> SolutionCensus:
    """Full census pipeline: snapshot, batch, budget, tuning, census, curves.

    Restarting with the same spec and directory resumes rather than redoing
    finished work (tuned schedules and census cells are reused).
    """
    if spec.n is None:
        raise DomainError("run_experiment needs a single n; use scaling_study for grids")
    workers = resolve_workers(spec, workers)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "spec.json").write_text(
        json.dumps(spec.to_json(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    batch = generate_batch(spec, spec.n)
    _write_instances(out, batch)

    sched_path = out / "schedules.json"
    if sched_path.exists():
        stored = json.loads(sched_path.read_text(encoding="utf-8"))
        schedules = {
            solver: schedule_from_json(obj)
            for solver, obj in stored["schedules"].items()
        }
    else:
        if spec.mcs is not None:
            mcs = spec.mcs
        else:
            mcs, mcs_rows = select_mcs(spec, batch, workers)
            write_mcs_csv(out / "mcs_report.csv", mcs_rows)
        schedules = {}
        grid_rows: list[GridPointReport] = []
        for solver in spec.solvers:
            schedule, reports = optimize_schedule(
                spec, solver, "max_distinct_solutions", mcs, batch, workers
            )
            schedules[solver] = schedule
            grid_rows.extend(reports)
        write_grid_csv(out / "grid_report.csv", grid_rows)
        sched_path.write_text(
            json.dumps(
                {"mcs": mcs,
                 "schedules": {s: schedule_to_json(sc) for s, sc in schedules.items()}},
                sort_keys=True, indent=2,
            ) + "\n",
            encoding="utf-8",
        )
    census = run_census(spec, schedules, batch, out_dir=out, workers=workers)
    curves = [
        distinct_solutions_curve(census, solver)
        for solver in spec.solvers
        if any(census.runs(iid, solver) for iid in census.instance_ids)
    ]
    if curves:
        write_curves_csv(out / "distinct_curves.csv", curves)
    write_manifest(out, spec.master_seed)
    return census


def scaling_study(
    spec: ExperimentSpec, out_dir: str | Path | None = None, workers: int | None = None
) -> list[EffortRecord]:
    """Effort-to-99% versus problem size for the annealers.

    Per size: re-tune schedules (objective: minimum effort), then measure
    the success probability over scaling_runs x instance_count runs and
    report mcs * runs_needed_99 with a binomial error on p. A size where a
    solver never succeeds yields an infinite-effort record, not an abort.
    WalkSAT is excluded: its flip count is not commensurate with sweeps.
    """
    if spec.n_grid is None:
        raise DomainError("scaling_study needs an n_grid")
    solvers = [s for s in spec.solvers if s in (SOLVER_SA, SOLVER_SQA)]
    if not solvers:
        raise DomainError("scaling_study needs SA and/or SQA in spec.solvers")
    workers = resolve_workers(spec, workers)
    records: list[EffortRecord] = []
    all_grid_rows: list[GridPointReport] = []
    for n in spec.n_grid:
        batch = generate_batch(spec, n, purpose="scaling")
        if spec.mcs is not None:
            mcs = spec.mcs
        else:
            mcs, _ = select_mcs(replace(spec, n=n, n_grid=None), batch, workers)
        for solver in solvers:
            schedule, reports = optimize_schedule(
                replace(spec, n=n, n_grid=None), solver, "min_effort_99",
                mcs, batch, workers,
            )
            all_grid_rows.extend(reports)
            blocks = []
            for inst_idx, (iid, inst) in enumerate(batch):
                seeds = [
                    derive_seed(spec.master_seed, "scaling", n, inst_idx, solver, run)
                    for run in range(spec.scaling_runs)
                ]
                blocks.append(
                    {"id": iid, "instance": inst, "solver": solver,
                     "schedule": schedule, "seeds": seeds, "first_run": 0}
                )
            successes = 0
            total = 0
            for block_records in _execute_blocks(blocks, workers):
                successes += sum(rec.satisfied for rec in block_records)
                total += len(block_records)
            p = successes / total if total else 0.0
            records.append(
                EffortRecord(
                    n=n, solver=solver, mcs_per_run=mcs, runs=total,
                    successes=successes, success_probability=p,
                    stderr=_binomial_stderr(p, total), effort_99=effort_99(mcs, p),
                )
            )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "spec.json").write_text(
            json.dumps(spec.to_json(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        write_effort_csv(out / "effort.csv", records)
        write_grid_csv(out / "grid_report.csv", all_grid_rows)
        write_manifest(out, spec.master_seed)
    return records
