"""Diversity statistics over solver run censuses.

A census is the raw material of every comparison here: for each instance
and solver it holds one record per run, satisfied or not. From that we
derive distinct-solution growth curves, pairwise Hamming statistics,
false-positive-rate and efficiency curves versus the number of stored
solutions, find-probability percentile curves, and mixtures of solution
pools from two solvers.

Curves are instance-averaged; the spread reported is always the standard
error of the mean over instances (sample std / sqrt(count)).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .anneal import SOLVER_SA, SOLVER_SQA
from .errors import CensusError, ClauseSpaceTooLarge, DimensionError, DomainError
from .filters import _subsets
from .instance import Assignment, KSatInstance, energies
from .seeds import derive_seed, rng_from

PERCENTILE_GRID = (1.0, 5.0, 10.0, 25.0, 50.0, 100.0)


# ----------------------------------------------------------- census records

@dataclass(frozen=True)
class CensusRecord:
    """One solver run: final assignment and whether it satisfied the instance."""

    instance: str
    solver: str
    run: int
    seed: int
    n: int
    assignment: Assignment
    energy: int
    satisfied: bool
    mcs: int
    schedule: dict

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "solver": self.solver,
            "run": self.run,
            "seed": self.seed,
            "n": self.n,
            "assignment": self.assignment.to_hex(),
            "energy": self.energy,
            "satisfied": self.satisfied,
            "mcs": self.mcs,
            "schedule": self.schedule,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CensusRecord":
        return cls(
            instance=str(data["instance"]),
            solver=str(data["solver"]),
            run=int(data["run"]),
            seed=int(data["seed"]),
            n=int(data["n"]),
            assignment=Assignment.from_hex(data["assignment"], int(data["n"])),
            energy=int(data["energy"]),
            satisfied=bool(data["satisfied"]),
            mcs=int(data["mcs"]),
            schedule=dict(data["schedule"]),
        )


def _record_key(rec: CensusRecord) -> tuple:
    return (rec.instance, rec.solver, rec.run)


def record_line(rec: CensusRecord) -> str:
    """Canonical single-line JSON encoding of one record."""
    return json.dumps(rec.to_json(), sort_keys=True, separators=(",", ":"))


def write_census(path: str | Path, records: Sequence[CensusRecord]) -> None:
    """Write records as JSON lines in canonical (instance, solver, run) order.

    The ordering plus key-sorted JSON makes the file a pure function of its
    contents, so identical experiments produce byte-identical files.
    """
    ordered = sorted(records, key=_record_key)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in ordered:
            fh.write(record_line(rec))
            fh.write("\n")


def read_census(path: str | Path) -> list[CensusRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(CensusRecord.from_json(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise CensusError(f"{path}:{lineno}: bad census record: {exc}") from exc
    return records


class SolutionCensus:
    """Validated, immutable view of run records grouped by instance and solver.

    Construction re-checks every record against its instance: the recorded
    energy must match a recount and the satisfied flag must mean energy zero.
    Statistics downstream can then trust the data unconditionally.
    """

    def __init__(
        self,
        records: Sequence[CensusRecord],
        instances: Mapping[str, KSatInstance],
        validate: bool = True,
    ):
        self._instances = dict(instances)
        self._records = tuple(sorted(records, key=_record_key))
        self._groups: dict[tuple[str, str], list[CensusRecord]] = {}
        for rec in self._records:
            self._groups.setdefault((rec.instance, rec.solver), []).append(rec)
        self._distinct_cache: dict[tuple, list[Assignment]] = {}
        if validate:
            self._validate()

    def _validate(self) -> None:
        for iid in {rec.instance for rec in self._records}:
            if iid not in self._instances:
                raise CensusError(f"census references unknown instance {iid!r}")
        by_instance: dict[str, list[CensusRecord]] = {}
        for rec in self._records:
            by_instance.setdefault(rec.instance, []).append(rec)
        for iid, group in by_instance.items():
            inst = self._instances[iid]
            for rec in group:
                if rec.n != inst.n:
                    raise CensusError(
                        f"{iid} run {rec.run} ({rec.solver}): n={rec.n} "
                        f"but instance has n={inst.n}"
                    )
            recounted = energies(inst, [rec.assignment for rec in group])
            for rec, e in zip(group, recounted):
                if rec.energy != int(e) or rec.satisfied != (e == 0):
                    raise CensusError(
                        f"{iid} run {rec.run} ({rec.solver}): recorded "
                        f"energy={rec.energy} satisfied={rec.satisfied}, "
                        f"recount gives {int(e)}"
                    )

    @property
    def records(self) -> tuple[CensusRecord, ...]:
        return self._records

    @property
    def instance_ids(self) -> list[str]:
        return sorted({rec.instance for rec in self._records})

    @property
    def solvers(self) -> list[str]:
        return sorted({rec.solver for rec in self._records})

    def instance(self, instance_id: str) -> KSatInstance:
        try:
            return self._instances[instance_id]
        except KeyError:
            raise CensusError(f"unknown instance {instance_id!r}") from None

    def records_for(self, instance_id: str, solver: str) -> list[CensusRecord]:
        return list(self._groups.get((instance_id, solver), ()))

    def runs(self, instance_id: str, solver: str) -> int:
        return len(self._groups.get((instance_id, solver), ()))

    def solutions(
        self, instance_id: str, solver: str, first_runs: int | None = None
    ) -> list[Assignment]:
        """Satisfying assignments in run order, repeats included."""
        out = []
        for rec in self._groups.get((instance_id, solver), ()):
            if first_runs is not None and rec.run >= first_runs:
                continue
            if rec.satisfied:
                out.append(rec.assignment)
        return out

    def distinct(
        self, instance_id: str, solver: str, first_runs: int | None = None
    ) -> list[Assignment]:
        """Distinct satisfying assignments in order of first appearance."""
        key = (instance_id, solver, first_runs)
        if key not in self._distinct_cache:
            self._distinct_cache[key] = list(
                dict.fromkeys(self.solutions(instance_id, solver, first_runs))
            )
        return list(self._distinct_cache[key])

    def frequencies(
        self, instance_id: str, solver: str, first_runs: int | None = None
    ) -> dict[Assignment, int]:
        freq: dict[Assignment, int] = {}
        for a in self.solutions(instance_id, solver, first_runs):
            freq[a] = freq.get(a, 0) + 1
        return freq


def load_census(path: str | Path, instances: Mapping[str, KSatInstance]) -> SolutionCensus:
    return SolutionCensus(read_census(path), instances)


# ------------------------------------------------------------------- curves

@dataclass(frozen=True)
class DiversityCurve:
    """Instance-averaged curve with standard errors of the mean."""

    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    solver: str
    selection: str
    meta: dict = field(default_factory=dict)


def write_curves_csv(path: str | Path, curves: Sequence[DiversityCurve]) -> None:
    """Export curves as CSV: x, mean, stderr, solver, selection, meta columns."""
    meta_keys = sorted({key for curve in curves for key in curve.meta})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean", "stderr", "solver", "selection", *meta_keys])
        for curve in curves:
            extras = [str(curve.meta.get(key, "")) for key in meta_keys]
            for x, mean, err in zip(curve.x, curve.mean, curve.stderr):
                writer.writerow([x, repr(float(mean)), repr(float(err)),
                                 curve.solver, curve.selection, *extras])


def _mean_stderr(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors, ignoring NaN entries."""
    mat = np.asarray(mat, dtype=np.float64)
    ok = ~np.isnan(mat)
    count = ok.sum(axis=0)
    filled = np.where(ok, mat, 0.0)
    total = filled.sum(axis=0)
    safe = np.maximum(count, 1)
    mean = np.where(count > 0, total / safe, np.nan)
    dev = np.where(ok, mat - mean, 0.0)
    ssq = (dev * dev).sum(axis=0)
    var = np.where(count > 1, ssq / np.maximum(count - 1, 1), 0.0)
    stderr = np.where(count > 0, np.sqrt(var / safe), np.nan)
    return mean, stderr


def _hold_last(row: np.ndarray, length: int) -> np.ndarray:
    """Extend a non-empty row to `length` by repeating its final value."""
    out = np.full(length, row[-1], dtype=np.float64)
    take = min(row.size, length)
    out[:take] = row[:take]
    return out


# -------------------------------------------------------- hamming machinery

def hamming(a: Assignment, b: Assignment) -> int:
    return a.hamming(b)


def _word_matrix(solutions: Sequence[Assignment]) -> np.ndarray:
    """Pack assignments into little-endian uint64 words, one row each."""
    n = solutions[0].n
    for a in solutions:
        if a.n != n:
            raise DimensionError("assignments of mixed lengths")
    bits = np.stack([a.bits() for a in solutions])
    packed = np.packbits(bits, axis=1, bitorder="little")
    words = (n + 63) // 64
    padded = np.zeros((len(solutions), words * 8), dtype=np.uint8)
    padded[:, : packed.shape[1]] = packed
    return padded.view(np.uint64)


def pairwise_hamming_stats(solutions: Sequence[Assignment]) -> dict:
    """Mean and max Hamming distance over all unordered pairs."""
    count = len(solutions)
    if count < 2:
        raise DomainError("pairwise statistics need at least two assignments")
    words = _word_matrix(solutions)
    total = 0
    largest = 0
    for i in range(count - 1):
        dist = np.bitwise_count(words[i] ^ words[i + 1:]).sum(axis=1)
        total += int(dist.sum())
        largest = max(largest, int(dist.max()))
    pairs = count * (count - 1) // 2
    return {"mean": total / pairs, "max": largest}


def greedy_max_hamming_subset(
    solutions: Sequence[Assignment], s: int, seed: int
) -> list[Assignment]:
    """Pick s assignments greedily maximizing mean distance to those picked.

    The first pick is uniformly random (seeded); each later pick maximizes
    the mean Hamming distance to the chosen set, ties going to the lowest
    input index.
    """
    count = len(solutions)
    if s > count:
        raise DomainError(f"cannot pick {s} from {count} assignments")
    if s <= 0:
        return []
    rng = np.random.default_rng(seed)
    words = _word_matrix(solutions)
    start = int(rng.integers(count))
    chosen = [start]
    taken = np.zeros(count, dtype=bool)
    taken[start] = True
    dist_sum = np.bitwise_count(words ^ words[start]).sum(axis=1).astype(np.float64)
    while len(chosen) < s:
        score = dist_sum / len(chosen)
        score[taken] = -1.0
        pick = int(np.argmax(score))
        chosen.append(pick)
        taken[pick] = True
        dist_sum += np.bitwise_count(words ^ words[pick]).sum(axis=1)
    return [solutions[i] for i in chosen]


# ------------------------------------------------- distinct-solution growth

def distinct_solutions_curve(
    census: SolutionCensus, solver: str, normalizer: str = "none"
) -> DiversityCurve:
    """Mean number of distinct solutions among the first t runs, t = 1..T.

    With normalizer "by_sa_total" each instance's curve is divided by the
    number of distinct solutions SA found over all its runs; instances where
    SA found nothing are left out of the average.
    """
    if normalizer not in ("none", "by_sa_total"):
        raise DomainError(f"unknown normalizer {normalizer!r}")
    ids = [i for i in census.instance_ids if census.runs(i, solver) > 0]
    if not ids:
        raise CensusError(f"census has no {solver} runs")
    horizon = max(census.runs(i, solver) for i in ids)
    rows = []
    for iid in ids:
        group = census.records_for(iid, solver)
        seen: set[Assignment] = set()
        counts = np.empty(len(group), dtype=np.float64)
        for t, rec in enumerate(group):
            if rec.satisfied:
                seen.add(rec.assignment)
            counts[t] = len(seen)
        if normalizer == "by_sa_total":
            if census.runs(iid, SOLVER_SA) == 0:
                raise CensusError("normalizer by_sa_total requires SA runs")
            sa_total = len(census.distinct(iid, SOLVER_SA))
            if sa_total == 0:
                continue
            counts = counts / sa_total
        rows.append(_hold_last(counts, horizon))
    if not rows:
        raise CensusError("normalizer by_sa_total left no usable instances")
    mean, stderr = _mean_stderr(np.stack(rows))
    return DiversityCurve(
        x=np.arange(1, horizon + 1),
        mean=mean,
        stderr=stderr,
        solver=solver,
        selection="runs",
        meta={"normalizer": normalizer, "instances": len(rows)},
    )


# --------------------------------------------------- fpr/efficiency curves

def _guarded_subsets(inst: KSatInstance, cap: int) -> np.ndarray:
    space = math.comb(inst.n, inst.k) * (1 << inst.k)
    if space > cap:
        raise ClauseSpaceTooLarge(
            f"clause space {space} exceeds cap {cap} for n={inst.n}, k={inst.k}"
        )
    return _subsets(inst.n, inst.k)


def _efficiency_transform(fpr_row: np.ndarray, n: int, m: int) -> np.ndarray:
    s = np.arange(1, fpr_row.size + 1, dtype=np.float64)
    usable = (fpr_row > 0.0) & (fpr_row < 1.0)
    guarded = np.where(usable, fpr_row, 0.5)
    return np.where(usable, -np.log2(guarded) * m / (n * s), np.nan)


def _per_instance_curves(
    census: SolutionCensus,
    solver: str,
    selection: str,
    s_max: int,
    resamples: int,
    seed: int,
    cap: int,
    to_efficiency: bool,
) -> tuple[list[str], list[np.ndarray]]:
    """Per-instance FPR (or efficiency) rows of length s_max, held constant
    past each instance's last distinct solution. Instances with no solutions
    are dropped entirely.
    """
    if s_max < 1:
        raise DomainError("s_max must be at least 1")
    if selection not in ("random", "greedy_max_hamming"):
        raise DomainError(f"unknown selection policy {selection!r}")
    ids, rows = [], []
    for iid in census.instance_ids:
        pool = census.distinct(iid, solver)
        if not pool:
            continue
        inst = census.instance(iid)
        subsets = _guarded_subsets(inst, cap)
        bits = np.stack([a.bits() for a in pool])
        take = min(len(pool), s_max)
        if selection == "random":
            acc = np.zeros(take, dtype=np.float64)
            for r in range(resamples):
                rng = rng_from(seed, "curve", "random", iid, r)
                perm = rng.permutation(len(pool))[:take]
                fpr = _kernels.fpr_prefix_curve(
                    np.ascontiguousarray(bits[perm]), subsets
                )
                acc += _efficiency_transform(fpr, inst.n, inst.m) if to_efficiency else fpr
            row = acc / resamples
        else:
            order = greedy_max_hamming_subset(
                pool, take, derive_seed(seed, "curve", "greedy", iid)
            )
            fpr = _kernels.fpr_prefix_curve(
                np.stack([a.bits() for a in order]), subsets
            )
            row = _efficiency_transform(fpr, inst.n, inst.m) if to_efficiency else fpr
        ids.append(iid)
        rows.append(_hold_last(row, s_max))
    return ids, rows


def fpr_vs_s_curve(
    census: SolutionCensus,
    solver: str,
    selection: str = "random",
    s_max: int = 20,
    resamples: int = 25,
    seed: int = 0,
    cap: int = 10**8,
) -> DiversityCurve:
    """Mean exact FPR of filters built from s selected solutions, s = 1..s_max.

    Random selection is resampled `resamples` times per instance and averaged;
    greedy selection is a single seeded chain. Instances running out of
    distinct solutions hold their final value.
    """
    ids, rows = _per_instance_curves(
        census, solver, selection, s_max, resamples, seed, cap, to_efficiency=False
    )
    if not ids:
        raise CensusError(f"no {solver} solutions anywhere in the census")
    mean, stderr = _mean_stderr(np.stack(rows))
    return DiversityCurve(
        x=np.arange(1, s_max + 1),
        mean=mean,
        stderr=stderr,
        solver=solver,
        selection=selection,
        meta={"resamples": resamples if selection == "random" else 1,
              "instances": len(ids)},
    )


def efficiency_vs_s_curve(
    census: SolutionCensus,
    solver: str,
    selection: str = "random",
    s_max: int = 20,
    resamples: int = 25,
    seed: int = 0,
    cap: int = 10**8,
) -> DiversityCurve:
    """Like fpr_vs_s_curve but reporting filter efficiency per point.

    Efficiency is computed per selection (before any averaging) with the
    actual stored-solution count, then held constant once an instance has no
    further distinct solutions.
    """
    ids, rows = _per_instance_curves(
        census, solver, selection, s_max, resamples, seed, cap, to_efficiency=True
    )
    if not ids:
        raise CensusError(f"no {solver} solutions anywhere in the census")
    mean, stderr = _mean_stderr(np.stack(rows))
    return DiversityCurve(
        x=np.arange(1, s_max + 1),
        mean=mean,
        stderr=stderr,
        solver=solver,
        selection=selection,
        meta={"resamples": resamples if selection == "random" else 1,
              "instances": len(ids)},
    )


# ----------------------------------------------- find-probability rankings

def _ranked_by_frequency(
    freq: Mapping[Assignment, int], pool: Sequence[Assignment]
) -> list[Assignment]:
    # Most-found first; ties broken by packed bit value so ranking is stable.
    return sorted(pool, key=lambda a: (-freq.get(a, 0), a.value))


def sqa_hardness_percentiles(
    census: SolutionCensus,
    other_solver: str,
    percentiles: Sequence[float] = PERCENTILE_GRID,
    reference: str = SOLVER_SQA,
) -> tuple[DiversityCurve, DiversityCurve]:
    """How often another solver finds the reference solver's easy/hard finds.

    Reference-found solutions are ranked by reference find-frequency; for the
    top and bottom x% the mean per-run find probability under `other_solver`
    is averaged over instances. Instances where the reference found nothing
    drop out of the statistic.
    """
    for q in percentiles:
        if not 0 < q <= 100:
            raise DomainError(f"percentile {q} outside (0, 100]")
    easy_rows, hard_rows = [], []
    for iid in census.instance_ids:
        ref_freq = census.frequencies(iid, reference)
        if not ref_freq:
            continue
        other_runs = census.runs(iid, other_solver)
        if other_runs == 0:
            raise CensusError(f"no {other_solver} runs on instance {iid}")
        other_freq = census.frequencies(iid, other_solver)
        ranked = _ranked_by_frequency(ref_freq, list(ref_freq))
        total = len(ranked)
        easy, hard = [], []
        for q in percentiles:
            group = min(total, max(1, math.ceil(q / 100 * total)))
            top = ranked[:group]
            bottom = ranked[-group:]
            easy.append(
                sum(other_freq.get(a, 0) for a in top) / (group * other_runs)
            )
            hard.append(
                sum(other_freq.get(a, 0) for a in bottom) / (group * other_runs)
            )
        easy_rows.append(easy)
        hard_rows.append(hard)
    if not easy_rows:
        raise CensusError(f"{reference} found no solutions on any instance")
    x = np.asarray(percentiles, dtype=np.float64)
    meta = {"reference": reference, "instances": len(easy_rows)}
    e_mean, e_err = _mean_stderr(np.asarray(easy_rows))
    h_mean, h_err = _mean_stderr(np.asarray(hard_rows))
    easiest = DiversityCurve(x, e_mean, e_err, other_solver, "easiest", dict(meta))
    hardest = DiversityCurve(x, h_mean, h_err, other_solver, "hardest", dict(meta))
    return easiest, hardest


def probability_to_find_distribution(
    census: SolutionCensus,
    solver: str,
    oracle_solutions: Mapping[str, Sequence[Assignment]],
    percentiles: Sequence[float] = PERCENTILE_GRID,
) -> DiversityCurve:
    """Find probability of the rarest solution within each top-q% bin.

    All existing solutions (the oracle set per instance) are ranked by the
    solver's find frequency; the curve reports, for each percentile q, the
    per-run find probability of the least-frequent member of the top q%.
    """
    for q in percentiles:
        if not 0 < q <= 100:
            raise DomainError(f"percentile {q} outside (0, 100]")
    rows = []
    for iid in census.instance_ids:
        if iid not in oracle_solutions:
            raise CensusError(f"missing oracle solutions for instance {iid}")
        pool = list(dict.fromkeys(oracle_solutions[iid]))
        if not pool:
            continue
        inst = census.instance(iid)
        if np.any(energies(inst, pool) != 0):
            raise CensusError(f"oracle list for {iid} contains a non-solution")
        runs = census.runs(iid, solver)
        if runs == 0:
            raise CensusError(f"no {solver} runs on instance {iid}")
        freq = census.frequencies(iid, solver)
        ranked = _ranked_by_frequency(freq, pool)
        row = []
        for q in percentiles:
            group = min(len(ranked), max(1, math.ceil(q / 100 * len(ranked))))
            row.append(min(freq.get(a, 0) for a in ranked[:group]) / runs)
        rows.append(row)
    if not rows:
        raise CensusError("oracle provided no solutions on any instance")
    mean, stderr = _mean_stderr(np.asarray(rows))
    return DiversityCurve(
        x=np.asarray(percentiles, dtype=np.float64),
        mean=mean,
        stderr=stderr,
        solver=solver,
        selection="prob_to_find",
        meta={"instances": len(rows)},
    )


# ------------------------------------------------------------------ mixing

def mixed_selection(
    pool_a: Sequence[Assignment],
    pool_b: Sequence[Assignment],
    fraction_a: float,
    s: int,
    seed: int | np.random.Generator,
) -> list[Assignment]:
    """Pick s distinct assignments, a seeded fraction from pool A, rest from B.

    round(fraction_a * s) picks come uniformly from A's distinct set, the
    remainder uniformly from B's distinct set minus anything already picked
    (collisions are resampled, equivalently B is filtered first).
    """
    if not 0.0 <= fraction_a <= 1.0:
        raise DomainError(f"fraction_a={fraction_a} outside [0, 1]")
    if s < 0:
        raise DomainError("selection size must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pool_a = list(dict.fromkeys(pool_a))
    pool_b = list(dict.fromkeys(pool_b))
    take_a = round(fraction_a * s)
    if take_a > len(pool_a):
        raise DomainError(
            f"need {take_a} distinct assignments from pool A, have {len(pool_a)}"
        )
    picks: list[Assignment] = []
    if take_a:
        picks.extend(pool_a[i] for i in rng.choice(len(pool_a), take_a, replace=False))
    chosen = set(picks)
    candidates = [a for a in pool_b if a not in chosen]
    need = s - take_a
    if need > len(candidates):
        raise DomainError(
            f"need {need} distinct assignments from pool B, have {len(candidates)}"
        )
    if need:
        picks.extend(candidates[i] for i in rng.choice(len(candidates), need, replace=False))
    return picks


def mixed_fpr_curve(
    census: SolutionCensus,
    solver_a: str,
    solver_b: str,
    fraction_a: float,
    s_max: int = 20,
    resamples: int = 25,
    seed: int = 0,
    cap: int = 10**8,
) -> DiversityCurve:
    """Mean exact FPR of filters mixing two solvers' solution pools.

    Selections are independent per s (the mix ratio shifts with s), so each
    point is a fresh seeded draw; infeasible sizes hold the last feasible
    value within a resample.
    """
    ids, rows = _per_instance_mixed_fpr(
        census, solver_a, solver_b, fraction_a, s_max, resamples, seed, cap
    )
    if not ids:
        raise CensusError("no instance had enough solutions for the mixture")
    mean, stderr = _mean_stderr(np.stack(rows))
    return DiversityCurve(
        x=np.arange(1, s_max + 1),
        mean=mean,
        stderr=stderr,
        solver=f"{solver_a}+{solver_b}",
        selection="mixed",
        meta={"fraction_a": fraction_a, "resamples": resamples, "instances": len(ids)},
    )


def _per_instance_mixed_fpr(
    census: SolutionCensus,
    solver_a: str,
    solver_b: str,
    fraction_a: float,
    s_max: int,
    resamples: int,
    seed: int,
    cap: int,
) -> tuple[list[str], list[np.ndarray]]:
    if s_max < 1:
        raise DomainError("s_max must be at least 1")
    ids, rows = [], []
    for iid in census.instance_ids:
        pool_a = census.distinct(iid, solver_a)
        pool_b = census.distinct(iid, solver_b)
        if not pool_a and not pool_b:
            continue
        inst = census.instance(iid)
        subsets = _guarded_subsets(inst, cap)
        space = float(subsets.shape[0] * (1 << inst.k))
        per = np.full((resamples, s_max), np.nan)
        for r in range(resamples):
            rng = rng_from(seed, "mixed", iid, r)
            last = np.nan
            for s in range(1, s_max + 1):
                try:
                    picked = mixed_selection(pool_a, pool_b, fraction_a, s, rng)
                except DomainError:
                    per[r, s - 1] = last
                    continue
                bits = np.stack([a.bits() for a in picked])
                distinct = _kernels.distinct_projection_count(bits, subsets)
                last = (space - float(distinct)) / space
                per[r, s - 1] = last
        row = _mean_stderr(per)[0]
        if np.all(np.isnan(row)):
            continue
        ids.append(iid)
        rows.append(row)
    return ids, rows


# ------------------------------------------------------- cross-solver table

@dataclass(frozen=True)
class CrossPairStats:
    mean: float
    stderr: float
    instances: int


def _bit_counts(pool: Sequence[Assignment]) -> np.ndarray:
    return np.stack([a.bits() for a in pool]).sum(axis=0, dtype=np.int64)


def cross_solver_hamming_table(
    census: SolutionCensus,
    solvers: Sequence[str] | None = None,
    first_runs: int | None = None,
) -> dict[tuple[str, str], CrossPairStats | None]:
    """Expected Hamming distance between random distinct picks per solver pair.

    Within-solver pairs draw two different solutions; pairs with no usable
    instance (for example a solver that only ever finds one solution) are
    reported as None. Independent uniform assignments would sit at n/2.
    """
    names = sorted(set(solvers)) if solvers is not None else census.solvers
    if len(names) < 2:
        raise DomainError("need at least two solvers to compare")
    ids = census.instance_ids
    for name in names:
        if all(not census.distinct(i, name, first_runs) for i in ids):
            raise CensusError(f"{name} found no solutions on any instance")
    table: dict[tuple[str, str], CrossPairStats | None] = {}
    for ai in range(len(names)):
        for bi in range(ai, len(names)):
            a, b = names[ai], names[bi]
            values = []
            for iid in ids:
                pool_a = census.distinct(iid, a, first_runs)
                if a == b:
                    size = len(pool_a)
                    if size < 2:
                        continue
                    counts = _bit_counts(pool_a)
                    pairs = size * (size - 1)
                    mean_d = float((2 * counts * (size - counts)).sum()) / pairs
                else:
                    pool_b = census.distinct(iid, b, first_runs)
                    if not pool_a or not pool_b:
                        continue
                    ca, cb = _bit_counts(pool_a), _bit_counts(pool_b)
                    la, lb = len(pool_a), len(pool_b)
                    cross = (ca * (lb - cb) + (la - ca) * cb).sum()
                    mean_d = float(cross) / (la * lb)
                values.append(mean_d)
            if not values:
                table[(a, b)] = None
                continue
            arr = np.asarray(values, dtype=np.float64)
            spread = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
            table[(a, b)] = CrossPairStats(float(arr.mean()), spread, arr.size)
    return table


def write_cross_table_csv(
    path: str | Path, table: Mapping[tuple[str, str], CrossPairStats | None]
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver_a", "solver_b", "mean", "stderr", "instances"])
        for (a, b) in sorted(table):
            entry = table[(a, b)]
            if entry is None:
                writer.writerow([a, b, "", "", 0])
            else:
                writer.writerow([a, b, repr(entry.mean), repr(entry.stderr),
                                 entry.instances])
