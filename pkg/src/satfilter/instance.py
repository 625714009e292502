"""Random k-SAT instances, assignments and clause-level operations.

An instance is a conjunction of width-k disjunctive clauses over n boolean
variables. Clauses are drawn uniformly and independently with replacement:
k distinct variables per clause, each polarity a fair coin. Duplicate
clauses are therefore legal and kept; ``KSatInstance.deduplicated`` removes
them on request.

Assignments are bit-packed (one arbitrary-precision integer; bit i is
variable i), which makes equality, hashing, XOR/Hamming and hex round-trips
cheap. All generation runs through numpy's PCG64 generator, so any instance
is reproducible from its seed.
"""

from __future__ import annotations

import io
import itertools
import json
import math
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimacsParseError, DimensionError, SizeCapError

__all__ = [
    "Literal",
    "Clause",
    "Assignment",
    "KSatInstance",
    "generate_instance",
    "clauses_for_target_efficiency",
    "energy",
    "is_satisfying",
    "blocking_clause",
    "enumerate_solutions",
    "read_dimacs",
    "write_dimacs",
    "read_sidecar",
    "write_sidecar",
]


@dataclass(frozen=True, slots=True)
class Literal:
    """A possibly negated boolean variable, indexed from 0."""

    variable: int
    negated: bool

    def __post_init__(self):
        if self.variable < 0:
            raise DimensionError(f"negative variable index {self.variable}")

    def evaluate(self, value: bool) -> bool:
        return bool(value) != self.negated


@dataclass(frozen=True, slots=True)
class Clause:
    """A disjunction of literals over distinct variables.

    Literals are stored sorted by variable index, so two clauses with the
    same literal set compare equal regardless of input order.
    """

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal | tuple[int, bool]]):
        lits = tuple(
            lit if isinstance(lit, Literal) else Literal(int(lit[0]), bool(lit[1]))
            for lit in literals
        )
        if not lits:
            raise DimensionError("empty clause")
        variables = [lit.variable for lit in lits]
        if len(set(variables)) != len(variables):
            raise DimensionError(f"repeated variable in clause {variables}")
        object.__setattr__(self, "literals", tuple(sorted(lits, key=lambda l: l.variable)))

    @property
    def width(self) -> int:
        return len(self.literals)

    def variables(self) -> tuple[int, ...]:
        return tuple(lit.variable for lit in self.literals)

    def satisfied_by(self, assignment: "Assignment") -> bool:
        return any(lit.evaluate(assignment.bit(lit.variable)) for lit in self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)


class Assignment:
    """An immutable truth assignment to n variables, bit-packed in an int."""

    __slots__ = ("_value", "_n")

    def __init__(self, value: int, n: int):
        if n < 0:
            raise DimensionError(f"negative assignment length {n}")
        if value < 0 or value >> n:
            raise DimensionError("assignment value has bits outside [0, n)")
        self._value = value
        self._n = n

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "Assignment":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise DimensionError("bits must be one-dimensional")
        packed = np.packbits(arr, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), arr.size)

    @classmethod
    def from_hex(cls, text: str, n: int) -> "Assignment":
        raw = bytes.fromhex(text)
        if len(raw) != (n + 7) // 8:
            raise DimensionError(
                f"hex string encodes {len(raw)} bytes, expected {(n + 7) // 8} for n={n}"
            )
        value = int.from_bytes(raw, "little")
        if value >> n:
            raise DimensionError("hex string has bits outside [0, n)")
        return cls(value, n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Assignment":
        return cls.from_bits(rng.integers(0, 2, size=n, dtype=np.uint8))

    @property
    def n(self) -> int:
        return self._n

    @property
    def value(self) -> int:
        return self._value

    def bit(self, i: int) -> bool:
        if not 0 <= i < self._n:
            raise DimensionError(f"variable {i} outside [0, {self._n})")
        return bool((self._value >> i) & 1)

    def bits(self) -> np.ndarray:
        raw = self._value.to_bytes((self._n + 7) // 8, "little")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[
            : self._n
        ].copy()

    def to_hex(self) -> str:
        return self._value.to_bytes((self._n + 7) // 8, "little").hex()

    def popcount(self) -> int:
        return self._value.bit_count()

    def hamming(self, other: "Assignment") -> int:
        if other._n != self._n:
            raise DimensionError(f"length mismatch {self._n} != {other._n}")
        return (self._value ^ other._value).bit_count()

    def __len__(self) -> int:
        return self._n

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Assignment)
            and self._value == other._value
            and self._n == other._n
        )

    def __hash__(self) -> int:
        return hash((self._value, self._n))

    def __repr__(self) -> str:
        return f"Assignment({self.to_hex()!r}, n={self._n})"


@dataclass(frozen=True)
class CompiledClauses:
    """Flat array view of an instance for the numeric kernels.

    Clause literals sit in CSR layout (``cl_indptr``); ``occ_*`` invert the
    map, listing for each variable the clauses it appears in and its polarity
    there.
    """

    n: int
    m: int
    lit_var: np.ndarray
    lit_neg: np.ndarray
    cl_indptr: np.ndarray
    occ_indptr: np.ndarray
    occ_clause: np.ndarray
    occ_neg: np.ndarray


class KSatInstance:
    """A k-SAT formula: n variables and an ordered tuple of clauses."""

    __slots__ = ("_n", "_k", "_clauses", "_source_seed", "_compiled")

    def __init__(
        self,
        n: int,
        k: int,
        clauses: Iterable[Clause],
        source_seed: int | None = None,
    ):
        clauses = tuple(clauses)
        if n <= 0:
            raise DimensionError(f"need at least one variable, got n={n}")
        if k < 0 or (clauses and k == 0):
            raise DimensionError(f"invalid clause width k={k}")
        if k > n:
            raise DimensionError(f"clause width k={k} exceeds variable count n={n}")
        for ci, clause in enumerate(clauses):
            for lit in clause:
                if lit.variable >= n:
                    raise DimensionError(
                        f"clause {ci} references variable {lit.variable} >= n={n}"
                    )
        self._n = n
        self._k = k
        self._clauses = clauses
        self._source_seed = source_seed
        self._compiled = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def k(self) -> int:
        return self._k

    @property
    def clauses(self) -> tuple[Clause, ...]:
        return self._clauses

    @property
    def source_seed(self) -> int | None:
        return self._source_seed

    @property
    def m(self) -> int:
        return len(self._clauses)

    @property
    def alpha(self) -> float:
        return len(self._clauses) / self._n

    @property
    def uniform_width(self) -> bool:
        """True when every clause has the nominal width k."""
        return all(c.width == self._k for c in self._clauses)

    def compiled(self) -> CompiledClauses:
        if self._compiled is None:
            self._compiled = _compile(self)
        return self._compiled

    def energy(self, assignment: Assignment) -> int:
        """Number of clauses the assignment leaves unsatisfied."""
        if assignment.n != self._n:
            raise DimensionError(
                f"assignment has {assignment.n} variables, instance has {self._n}"
            )
        if not self._clauses:
            return 0
        comp = self.compiled()
        lit_true = assignment.bits()[comp.lit_var] ^ comp.lit_neg
        clause_sat = np.logical_or.reduceat(lit_true.astype(bool), comp.cl_indptr[:-1])
        return int(comp.m - np.count_nonzero(clause_sat))

    def is_satisfying(self, assignment: Assignment) -> bool:
        return self.energy(assignment) == 0

    def with_clauses(self, *extra: Clause) -> "KSatInstance":
        """A new instance with extra (e.g. blocking) clauses appended."""
        return KSatInstance(
            self._n, self._k, self._clauses + tuple(extra), self._source_seed
        )

    def deduplicated(self) -> "KSatInstance":
        """A new instance keeping only the first copy of each clause."""
        seen: set[Clause] = set()
        kept = []
        for clause in self._clauses:
            if clause not in seen:
                seen.add(clause)
                kept.append(clause)
        return KSatInstance(self._n, self._k, kept, self._source_seed)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KSatInstance)
            and self._n == other._n
            and self._k == other._k
            and self._clauses == other._clauses
        )

    def __hash__(self) -> int:
        return hash((self._n, self._k, self._clauses))

    def __repr__(self) -> str:
        return f"KSatInstance(n={self._n}, k={self._k}, m={self.m})"

    def __getstate__(self):
        return (self._n, self._k, self._clauses, self._source_seed)

    def __setstate__(self, state):
        self._n, self._k, self._clauses, self._source_seed = state
        self._compiled = None


def _compile(instance: KSatInstance) -> CompiledClauses:
    n, m = instance.n, instance.m
    total = sum(c.width for c in instance.clauses)
    lit_var = np.empty(total, dtype=np.int32)
    lit_neg = np.empty(total, dtype=np.uint8)
    cl_indptr = np.empty(m + 1, dtype=np.int64)
    pos = 0
    for ci, clause in enumerate(instance.clauses):
        cl_indptr[ci] = pos
        for lit in clause:
            lit_var[pos] = lit.variable
            lit_neg[pos] = lit.negated
            pos += 1
    cl_indptr[m] = pos

    counts = np.bincount(lit_var, minlength=n) if total else np.zeros(n, dtype=np.int64)
    occ_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=occ_indptr[1:])
    occ_clause = np.empty(total, dtype=np.int32)
    occ_neg = np.empty(total, dtype=np.uint8)
    cursor = occ_indptr[:-1].copy()
    for ci in range(m):
        for pos in range(cl_indptr[ci], cl_indptr[ci + 1]):
            v = lit_var[pos]
            occ_clause[cursor[v]] = ci
            occ_neg[cursor[v]] = lit_neg[pos]
            cursor[v] += 1
    return CompiledClauses(n, m, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg)


def generate_instance(n: int, k: int, m: int, seed: int) -> KSatInstance:
    """Draw a random k-SAT instance with m clauses over n variables.

    Each clause picks k distinct variables uniformly (no complementary
    pairs possible) and independent fair polarities; clauses are drawn with
    replacement, so duplicates can occur. Deterministic in ``seed``.
    """
    if n <= 0:
        raise DimensionError(f"need at least one variable, got n={n}")
    if k <= 0:
        raise DimensionError(f"clause width must be positive, got k={k}")
    if k > n:
        raise DimensionError(f"clause width k={k} exceeds variable count n={n}")
    if m < 0:
        raise DimensionError(f"negative clause count m={m}")
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(m):
        variables = rng.choice(n, size=k, replace=False)
        polarities = rng.integers(0, 2, size=k)
        clauses.append(
            Clause(
                Literal(int(v), bool(p)) for v, p in zip(variables, polarities)
            )
        )
    return KSatInstance(n, k, clauses, source_seed=seed)


def clauses_for_target_efficiency(n: int, k: int, target_efficiency: float) -> int:
    """Clause count m such that the independent-solution filter efficiency
    -log2(1 - 2^-k) * (m/n) lands on the target, rounded to nearest."""
    if n <= 0 or k <= 0:
        raise DimensionError(f"invalid dimensions n={n}, k={k}")
    if target_efficiency <= 0:
        raise DimensionError(f"target efficiency must be positive, got {target_efficiency}")
    bits_per_clause = -math.log2(1.0 - 2.0 ** (-k))
    return round(n * target_efficiency / bits_per_clause)


def energy(instance: KSatInstance, assignment: Assignment) -> int:
    return instance.energy(assignment)


def is_satisfying(instance: KSatInstance, assignment: Assignment) -> bool:
    return instance.is_satisfying(assignment)


def energies(instance: KSatInstance, assignments: Sequence[Assignment]) -> np.ndarray:
    """Unsatisfied-clause counts for many assignments in one vectorized pass."""
    rows = len(assignments)
    if rows == 0:
        return np.zeros(0, dtype=np.int64)
    for a in assignments:
        if a.n != instance.n:
            raise DimensionError(
                f"assignment has {a.n} variables, instance has {instance.n}"
            )
    if instance.m == 0:
        return np.zeros(rows, dtype=np.int64)
    comp = instance.compiled()
    bits = np.stack([a.bits() for a in assignments])
    lit_true = bits[:, comp.lit_var] ^ comp.lit_neg
    clause_sat = np.logical_or.reduceat(lit_true.astype(bool), comp.cl_indptr[:-1], axis=1)
    return (comp.m - np.count_nonzero(clause_sat, axis=1)).astype(np.int64)


def blocking_clause(
    assignment: Assignment, variables: Sequence[int] | str = "all"
) -> Clause:
    """A clause falsified exactly by assignments matching ``assignment`` on
    the chosen variables: each literal is the variable negated iff its bit
    is set. Appending it to an instance removes those solutions and no others.
    """
    if isinstance(variables, str):
        if variables != "all":
            raise DimensionError(f"unknown variable subset {variables!r}")
        subset: Sequence[int] = range(assignment.n)
    else:
        subset = list(variables)
        if not subset:
            raise DimensionError("empty variable subset for blocking clause")
        if len(set(subset)) != len(subset):
            raise DimensionError("repeated variable in blocking clause subset")
    return Clause(Literal(i, assignment.bit(i)) for i in subset)


def enumerate_solutions(instance: KSatInstance, cap: int = 30) -> list[Assignment]:
    """All satisfying assignments, ascending by packed integer value.

    Refuses instances with n above ``cap`` (2^n blow-up); the scan runs in
    vectorized chunks so small instances finish in milliseconds.
    """
    n = instance.n
    if n > cap:
        raise SizeCapError(f"enumeration over 2^{n} assignments exceeds cap n<={cap}")
    comp = instance.compiled()
    total = 1 << n
    if comp.m == 0:
        return [Assignment(v, n) for v in range(total)]
    lits = comp.lit_var.size
    chunk = max(1, min(total, (1 << 22) // max(lits, 1)))
    found: list[Assignment] = []
    shifts = comp.lit_var.astype(np.int64)
    for base in range(0, total, chunk):
        hi = min(base + chunk, total)
        values = np.arange(base, hi, dtype=np.int64)
        lit_true = ((values[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        lit_true ^= comp.lit_neg[None, :]
        clause_sat = np.logical_or.reduceat(lit_true.astype(bool), comp.cl_indptr[:-1], axis=1)
        good = values[clause_sat.all(axis=1)]
        found.extend(Assignment(int(v), n) for v in good)
    return found


def _modal_width(widths: Sequence[int]) -> int:
    counts = Counter(widths)
    best = max(counts.values())
    return min(w for w, c in counts.items() if c == best)


def read_dimacs(source: str | os.PathLike | io.TextIOBase) -> KSatInstance:
    """Parse a DIMACS CNF file.

    Variables are 1-indexed and signed in the file; clauses end with 0.
    Complementary or repeated variables within a clause are rejected, as are
    header/body mismatches. Mixed clause widths are allowed (instances that
    carry blocking clauses); the nominal k is then the most common width and
    ``uniform_width`` reports False.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_dimacs(fh)

    n = None
    m_declared = None
    clauses: list[Clause] = []
    current: list[int] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n is not None:
                raise DimacsParseError("duplicate problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"malformed problem line {line!r}", lineno)
            try:
                n, m_declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"non-integer header counts in {line!r}", lineno)
            if n <= 0:
                raise DimacsParseError(f"variable count must be positive, got {n}", lineno)
            if m_declared < 0:
                raise DimacsParseError(f"negative clause count {m_declared}", lineno)
            continue
        if n is None:
            raise DimacsParseError("clause data before problem line", lineno)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsParseError(f"non-integer token {token!r}", lineno)
            if lit == 0:
                if not current:
                    raise DimacsParseError("empty clause", lineno)
                seen = set()
                for signed in current:
                    var = abs(signed)
                    if var > n:
                        raise DimacsParseError(
                            f"literal {signed} outside declared range 1..{n}", lineno
                        )
                    if var in seen:
                        raise DimacsParseError(
                            f"variable {var} repeated or complementary in clause", lineno
                        )
                    seen.add(var)
                clauses.append(
                    Clause(Literal(abs(s) - 1, s < 0) for s in current)
                )
                current = []
            else:
                current.append(lit)
    if current:
        raise DimacsParseError("unterminated clause at end of file", lineno)
    if n is None:
        raise DimacsParseError("missing problem line", 1)
    if m_declared != len(clauses):
        raise DimacsParseError(
            f"header declares {m_declared} clauses, found {len(clauses)}", lineno
        )
    k = _modal_width([c.width for c in clauses]) if clauses else 0
    return KSatInstance(n, k, clauses)


def write_dimacs(
    instance: KSatInstance,
    target: str | os.PathLike | io.TextIOBase,
    comments: Sequence[str] = (),
) -> None:
    """Write DIMACS CNF. write -> read -> write is byte-identical."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8") as fh:
            write_dimacs(instance, fh, comments)
        return
    for comment in comments:
        target.write(f"c {comment}\n")
    target.write(f"p cnf {instance.n} {instance.m}\n")
    for clause in instance.clauses:
        signed = ((-1 if lit.negated else 1) * (lit.variable + 1) for lit in clause)
        target.write(" ".join(str(s) for s in signed) + " 0\n")


def write_sidecar(instance: KSatInstance, path: str | os.PathLike) -> None:
    """JSON metadata twin for a DIMACS file: {n, k, m, alpha, seed}."""
    meta = {
        "n": instance.n,
        "k": instance.k,
        "m": instance.m,
        "alpha": instance.alpha,
        "seed": instance.source_seed,
    }
    Path(path).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def read_sidecar(path: str | os.PathLike) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def all_clauses(n: int, k: int) -> Iterator[Clause]:
    """Every width-k clause over n variables, lexicographic order."""
    for variables in itertools.combinations(range(n), k):
        for signs in itertools.product((False, True), repeat=k):
            yield Clause(Literal(v, s) for v, s in zip(variables, signs))
