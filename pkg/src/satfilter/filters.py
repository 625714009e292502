"""Satisfiability filters: hashed clause membership with one-sided error.

A filter stores s satisfying assignments of a random k-SAT instance whose
clauses were derived from the stored set by hashing. Querying an element
re-derives its clause; if every stored assignment satisfies it the answer
is "maybe", otherwise the element was definitely never stored. The false
positive rate of a filter is the fraction of the whole clause space
(C(n,k) * 2^k clauses) satisfied by all stored assignments; for independent
uniform assignments it is (1 - 2^-k)^s, and the efficiency
-log2(fpr) / (n s / m) is at most 1.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import struct
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    ClauseSpaceTooLarge,
    DimensionError,
    DomainError,
    DuplicateSolutionError,
    NonSatisfyingSolutionError,
)
from .instance import Assignment, Clause, KSatInstance, Literal

__all__ = [
    "FilterAnswer",
    "HashFamily",
    "SatFilter",
    "FilterMetrics",
    "element_to_clause",
    "build_instance_from_set",
    "build_filter",
    "fpr_independent",
    "exact_fpr",
    "sampled_fpr",
    "efficiency",
    "efficiency_from_alpha",
    "filter_metrics",
    "save_filter",
    "load_filter",
]


class FilterAnswer(Enum):
    MAYBE = "maybe"
    DEFINITELY_NOT_IN_SET = "definitely_not_in_set"


def _as_bytes(element: bytes | str) -> bytes:
    return element.encode("utf-8") if isinstance(element, str) else bytes(element)


@dataclass(frozen=True)
class HashFamily:
    """A pure, keyed map from elements to width-k clauses over n variables.

    Slot j of an element's clause comes from a keyed 64-bit mix of
    (master_seed, family_index, j); collisions with earlier slots re-mix
    with an incremented counter until the k variables are distinct, and the
    polarity rides along in the accepted digest. Distinct family indices
    give independent clause streams for the same elements.
    """

    k: int
    n: int
    master_seed: int
    family_index: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise DimensionError(f"clause width must be positive, got k={self.k}")
        if self.n < self.k:
            raise DimensionError(f"need n >= k, got n={self.n}, k={self.k}")
        if not 0 <= self.master_seed < (1 << 64):
            raise DomainError("master_seed must fit in 64 bits")
        if self.family_index < 0:
            raise DomainError(f"negative family index {self.family_index}")

    def _digest(self, element: bytes, slot: int, counter: int) -> bytes:
        key = struct.pack(
            "<QQQQ", self.master_seed, self.family_index, slot, counter
        )
        return hashlib.blake2b(element, digest_size=16, key=key).digest()

    def element_to_clause(self, element: bytes | str) -> Clause:
        data = _as_bytes(element)
        chosen: list[int] = []
        negated: list[bool] = []
        for slot in range(self.k):
            counter = 0
            while True:
                digest = self._digest(data, slot, counter)
                var = int.from_bytes(digest[:8], "little") % self.n
                if var not in chosen:
                    break
                counter += 1
            chosen.append(var)
            negated.append(bool(digest[8] & 1))
        return Clause(Literal(v, neg) for v, neg in zip(chosen, negated))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "master_seed": self.master_seed,
            "family_index": self.family_index,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HashFamily":
        return cls(
            k=obj["k"],
            n=obj["n"],
            master_seed=obj["master_seed"],
            family_index=obj.get("family_index", 0),
        )


def element_to_clause(family: HashFamily, element: bytes | str) -> Clause:
    return family.element_to_clause(element)


def build_instance_from_set(
    family: HashFamily, elements: Iterable[bytes | str]
) -> KSatInstance:
    """The conjunction of the elements' hashed clauses, in element order.

    Duplicate elements yield duplicate clauses (kept, as with random
    generation). The family's master seed is recorded as the instance seed.
    """
    clauses = [family.element_to_clause(el) for el in elements]
    return KSatInstance(family.n, family.k, clauses, source_seed=family.master_seed)


class SatFilter:
    """s stored satisfying assignments plus the hash family that built the
    instance; storage cost is exactly n bits per stored solution."""

    __slots__ = ("_solutions", "_family", "_m")

    def __init__(self, solutions: Sequence[Assignment], family: HashFamily, m: int):
        solutions = tuple(solutions)
        for idx, sol in enumerate(solutions):
            if sol.n != family.n:
                raise DimensionError(
                    f"solution {idx} has {sol.n} variables, family expects {family.n}"
                )
        if m < 0:
            raise DimensionError(f"negative clause count m={m}")
        self._solutions = solutions
        self._family = family
        self._m = m

    @property
    def solutions(self) -> tuple[Assignment, ...]:
        return self._solutions

    @property
    def family(self) -> HashFamily:
        return self._family

    @property
    def n(self) -> int:
        return self._family.n

    @property
    def k(self) -> int:
        return self._family.k

    @property
    def m(self) -> int:
        return self._m

    @property
    def s(self) -> int:
        return len(self._solutions)

    def storage_bits(self) -> int:
        return self.n * self.s

    def query(self, element: bytes | str) -> FilterAnswer:
        """One-sided membership test: stored elements always answer maybe."""
        clause = self._family.element_to_clause(element)
        if all(clause.satisfied_by(sol) for sol in self._solutions):
            return FilterAnswer.MAYBE
        return FilterAnswer.DEFINITELY_NOT_IN_SET

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SatFilter)
            and self._solutions == other._solutions
            and self._family == other._family
            and self._m == other._m
        )

    def __repr__(self) -> str:
        return f"SatFilter(n={self.n}, k={self.k}, s={self.s}, m={self._m})"


def build_filter(
    instance: KSatInstance,
    family: HashFamily,
    solutions: Sequence[Assignment],
) -> SatFilter:
    """Validate and assemble a filter: every solution must satisfy the
    instance (the failing index is reported) and duplicates are rejected."""
    if instance.n != family.n or instance.k != family.k:
        raise DimensionError(
            f"instance (n={instance.n}, k={instance.k}) does not match "
            f"family (n={family.n}, k={family.k})"
        )
    seen: set[Assignment] = set()
    for idx, sol in enumerate(solutions):
        e = instance.energy(sol)
        if e != 0:
            raise NonSatisfyingSolutionError(idx, e)
        if sol in seen:
            raise DuplicateSolutionError(idx)
        seen.add(sol)
    return SatFilter(solutions, family, instance.m)


# ------------------------------------------------------------- fpr math

def fpr_independent(k: int, s: int) -> float:
    """(1 - 2^-k)^s: false positive rate if the s stored assignments were
    independent and uniform."""
    if k < 1:
        raise DomainError(f"clause width must be positive, got k={k}")
    if s < 0:
        raise DomainError(f"negative solution count s={s}")
    return (1.0 - 2.0 ** (-k)) ** s


@lru_cache(maxsize=32)
def _subsets(n: int, k: int) -> np.ndarray:
    combos = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int64,
        count=math.comb(n, k) * k,
    )
    return combos.reshape(-1, k)


def _solution_matrix(solutions: Sequence[Assignment]) -> tuple[np.ndarray, int]:
    n = solutions[0].n
    for idx, sol in enumerate(solutions):
        if sol.n != n:
            raise DimensionError(f"solution {idx} has {sol.n} variables, expected {n}")
    mat = np.stack([sol.bits() for sol in solutions])
    return mat, n


def exact_fpr(
    solutions: Sequence[Assignment],
    k: int,
    cap: int = 10**8,
    chunk_size: int | None = None,
) -> float:
    """Exact false positive rate by scanning the whole clause space.

    For each variable subset, a clause is a false positive unless some
    stored solution projects onto its falsifying polarity pattern; counting
    distinct projections per subset gives the satisfied-by-all clause count
    without materializing 2^k polarities. Counts combine additively across
    subset chunks, so any partitioning yields the same result.
    """
    if k < 1:
        raise DomainError(f"clause width must be positive, got k={k}")
    if not solutions:
        return 1.0
    mat, n = _solution_matrix(solutions)
    if k > n:
        raise DimensionError(f"clause width k={k} exceeds n={n}")
    n_subsets = math.comb(n, k)
    total = n_subsets * (1 << k)
    if total > cap:
        raise ClauseSpaceTooLarge(
            f"clause space of size {total} exceeds cap {cap}; use sampled_fpr"
        )
    subsets = _subsets(n, k)
    if chunk_size is None:
        chunk_size = n_subsets if n_subsets else 1
    distinct = 0
    for start in range(0, n_subsets, chunk_size):
        chunk = subsets[start : start + chunk_size]
        if k <= 5:
            distinct += int(_kernels.distinct_projection_count(mat, chunk))
        else:
            codes = np.zeros((len(solutions), chunk.shape[0]), dtype=np.int64)
            for j in range(k):
                codes |= mat[:, chunk[:, j]].astype(np.int64) << j
            codes.sort(axis=0)
            distinct += int(
                chunk.shape[0] + np.count_nonzero(np.diff(codes, axis=0))
            )
    return (total - distinct) / total


def sampled_fpr(
    solutions: Sequence[Assignment],
    k: int,
    samples: int = 200_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo false positive estimate and its binomial standard error."""
    if k < 1:
        raise DomainError(f"clause width must be positive, got k={k}")
    if samples < 1:
        raise DomainError(f"need at least one sample, got {samples}")
    if not solutions:
        return 1.0, 0.0
    mat, n = _solution_matrix(solutions)
    if k > n:
        raise DimensionError(f"clause width k={k} exceeds n={n}")
    rng = np.random.default_rng(seed)
    hits = int(_kernels.sampled_fpr_hits(mat, k, samples, rng))
    p = hits / samples
    return p, math.sqrt(p * (1.0 - p) / samples)


def efficiency(fpr: float, n: int, s: int, m: int) -> float:
    """-log2(fpr) per stored bit-to-clause ratio: -log2(fpr) / (n s / m)."""
    if not 0.0 < fpr < 1.0:
        raise DomainError(f"false positive rate must lie in (0, 1), got {fpr}")
    if n < 1 or s < 1 or m < 1:
        raise DomainError(f"need positive n, s, m; got n={n}, s={s}, m={m}")
    return -math.log2(fpr) / (n * s / m)


def efficiency_from_alpha(k: int, alpha: float) -> float:
    """Efficiency under the independent-solution approximation:
    -log2(1 - 2^-k) * alpha."""
    if k < 1:
        raise DomainError(f"clause width must be positive, got k={k}")
    if alpha < 0:
        raise DomainError(f"negative clause-to-variable ratio {alpha}")
    return -math.log2(1.0 - 2.0 ** (-k)) * alpha


@dataclass(frozen=True)
class FilterMetrics:
    """Measured or analytic filter quality. ``method`` records how fpr was
    obtained; ``anomalous`` marks a measured efficiency above 1 (numerics,
    not physics)."""

    fpr: float
    efficiency: float
    method: str
    stderr: float | None = None
    anomalous: bool = False

    def to_json(self) -> dict:
        obj = {
            "fpr": self.fpr,
            "efficiency": self.efficiency,
            "method": self.method,
            "anomalous": self.anomalous,
        }
        if self.stderr is not None:
            obj["stderr"] = self.stderr
        return obj


def filter_metrics(
    flt: SatFilter,
    method: str = "auto",
    cap: int = 10**8,
    samples: int = 200_000,
    seed: int = 0,
) -> FilterMetrics:
    """FPR and efficiency of a built filter.

    ``method``: "independent" for the analytic (1-2^-k)^s approximation,
    "exact" for full clause-space enumeration, "sampled" for Monte Carlo,
    "auto" for exact with sampled fallback past the cap.
    """
    stderr = None
    if method == "independent":
        fpr = fpr_independent(flt.k, flt.s)
        used = "analytic_independent"
    elif method == "exact":
        fpr = exact_fpr(flt.solutions, flt.k, cap=cap)
        used = "exact_enumeration"
    elif method == "sampled":
        fpr, stderr = sampled_fpr(flt.solutions, flt.k, samples=samples, seed=seed)
        used = "sampled"
    elif method == "auto":
        try:
            fpr = exact_fpr(flt.solutions, flt.k, cap=cap)
            used = "exact_enumeration"
        except ClauseSpaceTooLarge:
            fpr, stderr = sampled_fpr(flt.solutions, flt.k, samples=samples, seed=seed)
            used = "sampled"
    else:
        raise DomainError(f"unknown metrics method {method!r}")
    eff = efficiency(fpr, flt.n, flt.s, flt.m)
    anomalous = used != "analytic_independent" and eff > 1.0
    if anomalous:
        warnings.warn(
            f"measured efficiency {eff:.4f} exceeds 1; numerical anomaly",
            RuntimeWarning,
            stacklevel=2,
        )
    return FilterMetrics(fpr=fpr, efficiency=eff, method=used, stderr=stderr,
                         anomalous=anomalous)


# ---------------------------------------------------------- persistence

_MAGIC = b"SFLT"
_VERSION = 1
_HEADER = struct.Struct("<4sHIHIIQI")


def save_filter(flt: SatFilter, path: str | Path) -> None:
    """Write the versioned binary layout plus a JSON twin at <path>.json.

    Header (little-endian): magic "SFLT", version u16, n u32, k u16, s u32,
    m u32, master_seed u64, family_index u32; body: s rows of ceil(n/8)
    bytes, bits packed least-significant-first.
    """
    path = Path(path)
    header = _HEADER.pack(
        _MAGIC, _VERSION, flt.n, flt.k, flt.s, flt.m,
        flt.family.master_seed, flt.family.family_index,
    )
    row_bytes = (flt.n + 7) // 8
    body = b"".join(
        sol.value.to_bytes(row_bytes, "little") for sol in flt.solutions
    )
    path.write_bytes(header + body)
    twin = {
        "format": "satfilter",
        "version": _VERSION,
        "n": flt.n,
        "k": flt.k,
        "s": flt.s,
        "m": flt.m,
        "family": flt.family.to_json(),
        "solutions": [sol.to_hex() for sol in flt.solutions],
    }
    Path(str(path) + ".json").write_text(
        json.dumps(twin, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_filter(path: str | Path) -> SatFilter:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DomainError(f"{path}: truncated filter header")
    magic, version, n, k, s, m, seed, family_index = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise DomainError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise DomainError(f"{path}: unsupported version {version}")
    row_bytes = (n + 7) // 8
    expected = _HEADER.size + s * row_bytes
    if len(raw) != expected:
        raise DomainError(f"{path}: expected {expected} bytes, found {len(raw)}")
    family = HashFamily(k=k, n=n, master_seed=seed, family_index=family_index)
    solutions = []
    for i in range(s):
        start = _HEADER.size + i * row_bytes
        value = int.from_bytes(raw[start : start + row_bytes], "little")
        solutions.append(Assignment(value, n))
    return SatFilter(solutions, family, m)
