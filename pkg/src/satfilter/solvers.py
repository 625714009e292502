"""Uniform dispatch over the three solvers.

Schedule objects are self-describing (their JSON carries a "solver" tag),
so batch code can load a schedule file and run whichever solver it names
without caring which one that is.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from .anneal import (
    SOLVER_SA,
    SOLVER_SQA,
    SOLVER_WS,
    SaSchedule,
    SolverRunResult,
    SqaSchedule,
    run_sa,
    run_sqa,
)
from .errors import ScheduleError, ScheduleMismatchError
from .instance import KSatInstance
from .walksat import WalksatConfig, run_walksat

Schedule = SaSchedule | SqaSchedule | WalksatConfig

SOLVER_TAGS = {"sa": SOLVER_SA, "sqa": SOLVER_SQA, "ws": SOLVER_WS}


def solver_id_of(schedule: Schedule) -> str:
    if isinstance(schedule, SaSchedule):
        return SOLVER_SA
    if isinstance(schedule, SqaSchedule):
        return SOLVER_SQA
    if isinstance(schedule, WalksatConfig):
        return SOLVER_WS
    raise ScheduleError(f"not a schedule: {schedule!r}")


def schedule_to_json(schedule: Schedule) -> dict:
    solver_id_of(schedule)
    return schedule.to_json()


def schedule_from_json(obj: dict) -> Schedule:
    tag = obj.get("solver")
    if tag == "sa":
        return SaSchedule.from_json(obj)
    if tag == "sqa":
        return SqaSchedule.from_json(obj)
    if tag == "ws":
        return WalksatConfig.from_json(obj)
    raise ScheduleError(f"schedule JSON with unknown solver tag {tag!r}")


def load_schedule(path: str | Path) -> Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return schedule_from_json(json.load(fh))


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_json(schedule), fh, sort_keys=True, indent=2)
        fh.write("\n")


def ensure_solver_tag(schedule: Schedule, tag: str) -> None:
    """Raise if a schedule does not belong to the named solver tag."""
    if tag not in SOLVER_TAGS:
        raise ScheduleError(f"unknown solver tag {tag!r}")
    actual = solver_id_of(schedule)
    if SOLVER_TAGS[tag] != actual:
        raise ScheduleMismatchError(
            f"schedule is for {actual}, requested solver {SOLVER_TAGS[tag]}"
        )


def run_solver(
    instance: KSatInstance,
    schedule: Schedule,
    seed: int,
    observer: Callable[[int, float, int], None] | None = None,
) -> SolverRunResult:
    """Run whichever solver the schedule describes (WalkSAT takes no observer)."""
    if isinstance(schedule, SaSchedule):
        return run_sa(instance, schedule, seed, observer)
    if isinstance(schedule, SqaSchedule):
        return run_sqa(instance, schedule, seed, observer)
    if isinstance(schedule, WalksatConfig):
        return run_walksat(instance, schedule, seed)
    raise ScheduleError(f"not a schedule: {schedule!r}")
