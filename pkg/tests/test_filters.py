import json
import math

import numpy as np
import pytest
from scipy import stats

from satfilter.errors import (
    ClauseSpaceTooLarge,
    DimensionError,
    DomainError,
    DuplicateSolutionError,
    NonSatisfyingSolutionError,
)
from satfilter.filters import (
    FilterAnswer,
    HashFamily,
    SatFilter,
    build_filter,
    build_instance_from_set,
    efficiency,
    efficiency_from_alpha,
    element_to_clause,
    exact_fpr,
    filter_metrics,
    fpr_independent,
    load_filter,
    sampled_fpr,
    save_filter,
)
from satfilter.instance import Assignment, all_clauses, enumerate_solutions, generate_instance


def random_assignments(n, count, seed):
    rng = np.random.default_rng(seed)
    seen = {}
    while len(seen) < count:
        a = Assignment.random(n, rng)
        seen[a] = None
    return list(seen)


def brute_fpr(solutions, n, k):
    """Independent recount: fraction of all width-k clauses every stored
    solution satisfies."""
    hits = total = 0
    for clause in all_clauses(n, k):
        total += 1
        if all(clause.satisfied_by(sol) for sol in solutions):
            hits += 1
    return hits / total


# ------------------------------------------------------------ closed forms

def test_independent_fpr_values():
    assert fpr_independent(4, 0) == 1.0
    assert abs(fpr_independent(4, 22) - 0.2417) <= 1e-4
    assert abs(fpr_independent(5, 44) - 0.2474) <= 1e-4


def test_independent_fpr_domain():
    with pytest.raises(DomainError):
        fpr_independent(0, 3)
    with pytest.raises(DomainError):
        fpr_independent(3, -1)


def test_efficiency_from_alpha_values():
    assert abs(efficiency_from_alpha(4, 8.06) - 0.7505) <= 1e-3
    assert abs(efficiency_from_alpha(3, 3.9) - 0.7513) <= 1e-3
    assert abs(efficiency_from_alpha(5, 19.6) - 0.898) <= 2e-3


def test_efficiency_functions_agree_on_independent_solutions():
    # -log2((1-2^-k)^s) / (n s / m) collapses to the alpha form for any s
    for k, n, m, s in ((4, 50, 403, 7), (3, 30, 117, 20), (5, 48, 941, 3)):
        direct = efficiency(fpr_independent(k, s), n, s, m)
        assert math.isclose(direct, efficiency_from_alpha(k, m / n), rel_tol=1e-12)


def test_efficiency_domain():
    with pytest.raises(DomainError):
        efficiency(0.0, 10, 5, 20)
    with pytest.raises(DomainError):
        efficiency(1.0, 10, 5, 20)
    with pytest.raises(DomainError):
        efficiency(0.5, 10, 0, 20)


# ------------------------------------------------------------- hash family

def test_family_is_pure_and_width_k():
    fam = HashFamily(k=4, n=20, master_seed=9)
    c1 = fam.element_to_clause("hello")
    c2 = fam.element_to_clause(b"hello")
    assert c1 == c2
    assert c1.width == 4
    assert len(set(c1.variables())) == 4
    assert element_to_clause(fam, "hello") == c1


def test_family_handles_n_equal_k():
    fam = HashFamily(k=3, n=3, master_seed=0)
    clause = fam.element_to_clause("x")
    assert clause.variables() == (0, 1, 2)


def test_family_validation():
    with pytest.raises(DimensionError):
        HashFamily(k=0, n=5, master_seed=0)
    with pytest.raises(DimensionError):
        HashFamily(k=6, n=5, master_seed=0)
    with pytest.raises(DomainError):
        HashFamily(k=2, n=5, master_seed=1 << 64)
    with pytest.raises(DomainError):
        HashFamily(k=2, n=5, master_seed=0, family_index=-1)


def test_family_json_round_trip():
    fam = HashFamily(k=3, n=12, master_seed=77, family_index=2)
    assert HashFamily.from_json(fam.to_json()) == fam


def clause_cell(clause, n, k):
    """Index a clause into [0, C(n,k) * 2^k) for histogramming."""
    from math import comb

    variables = clause.variables()
    rank = 0
    prev = -1
    remaining = k
    for v in variables:
        for u in range(prev + 1, v):
            rank += comb(n - 1 - u, remaining - 1)
        prev = v
        remaining -= 1
    polarity = 0
    for j, lit in enumerate(clause):
        polarity |= int(lit.negated) << j
    return rank * (1 << k) + polarity


def test_family_maps_elements_uniformly_over_clause_space():
    n, k = 8, 3
    fam = HashFamily(k=k, n=n, master_seed=5)
    cells = math.comb(n, k) * (1 << k)
    counts = np.zeros(cells, dtype=np.int64)
    draws = 150_000
    for i in range(draws):
        counts[clause_cell(fam.element_to_clause(f"el-{i}"), n, k)] += 1
    expected = draws / cells
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    df = cells - 1
    # 5-sigma guard band on the chi-square statistic itself
    assert abs(chi2 - df) < 5 * math.sqrt(2 * df)


def test_family_indices_are_independent():
    n, k = 8, 2
    fam0 = HashFamily(k=k, n=n, master_seed=5, family_index=0)
    fam1 = HashFamily(k=k, n=n, master_seed=5, family_index=1)
    cells = math.comb(n, k) * (1 << k)
    table = np.zeros((cells, cells), dtype=np.int64)
    for i in range(60_000):
        el = f"el-{i}"
        table[
            clause_cell(fam0.element_to_clause(el), n, k),
            clause_cell(fam1.element_to_clause(el), n, k),
        ] += 1
    _, p, _, _ = stats.chi2_contingency(table)
    assert p > 1e-4


def test_build_instance_keeps_duplicates_and_order():
    fam = HashFamily(k=3, n=10, master_seed=1)
    inst = build_instance_from_set(fam, ["a", "b", "a"])
    assert inst.m == 3
    assert inst.clauses[0] == inst.clauses[2]
    assert inst.clauses[0] == fam.element_to_clause("a")
    assert inst.source_seed == 1


# ----------------------------------------------------------------- queries

def build_demo_filter(elements, s=6, n=16, k=3, seed=3):
    fam = HashFamily(k=k, n=n, master_seed=seed)
    inst = build_instance_from_set(fam, elements)
    sols = enumerate_solutions(inst)
    assert len(sols) >= s
    picked = list(np.random.default_rng(0).choice(len(sols), size=s, replace=False))
    return build_filter(inst, fam, [sols[i] for i in picked])


def test_members_always_answer_maybe():
    elements = [f"member-{i}" for i in range(40)]
    flt = build_demo_filter(elements)
    assert all(flt.query(el) is FilterAnswer.MAYBE for el in elements)


def test_nonmember_rate_matches_exact_fpr():
    elements = [f"member-{i}" for i in range(40)]
    flt = build_demo_filter(elements)
    p = exact_fpr(flt.solutions, flt.k)
    queries = 20_000
    hits = sum(
        flt.query(f"other-{i}") is FilterAnswer.MAYBE for i in range(queries)
    )
    sigma = math.sqrt(p * (1 - p) / queries)
    assert abs(hits / queries - p) <= 4.5 * sigma


def test_build_filter_validates_solutions():
    fam = HashFamily(k=3, n=10, master_seed=2)
    inst = build_instance_from_set(fam, ["a", "b", "c", "d"])
    sols = enumerate_solutions(inst)
    bad = next(
        Assignment(v, 10) for v in range(1 << 10)
        if Assignment(v, 10) not in set(sols)
    )
    with pytest.raises(NonSatisfyingSolutionError) as err:
        build_filter(inst, fam, [sols[0], bad])
    assert err.value.index == 1
    assert err.value.energy >= 1
    with pytest.raises(DuplicateSolutionError):
        build_filter(inst, fam, [sols[0], sols[1], sols[0]])
    with pytest.raises(DimensionError):
        build_filter(inst, HashFamily(k=3, n=11, master_seed=2), [sols[0]])


def test_filter_storage_accounting():
    flt = build_demo_filter([f"m{i}" for i in range(25)], s=5, n=14)
    assert flt.s == 5
    assert flt.m == 25
    assert flt.storage_bits() == 5 * 14


# --------------------------------------------------------------- fpr exact

def test_exact_fpr_matches_clause_scan():
    n, k = 10, 3
    for seed in (0, 1):
        sols = random_assignments(n, 6, seed)
        assert math.isclose(
            exact_fpr(sols, k), brute_fpr(sols, n, k), rel_tol=0, abs_tol=1e-15
        )


def test_exact_fpr_matches_clause_scan_for_wide_clauses():
    # k > 5 exercises the vectorized path instead of the packed kernel
    n, k = 9, 6
    sols = random_assignments(n, 4, seed=2)
    assert math.isclose(exact_fpr(sols, k), brute_fpr(sols, n, k), abs_tol=1e-15)


def test_exact_fpr_chunking_is_invariant():
    sols = random_assignments(11, 5, seed=5)
    reference = exact_fpr(sols, 3)
    for chunk in (1, 7, 50, 10_000):
        assert exact_fpr(sols, 3, chunk_size=chunk) == reference


def test_exact_fpr_edge_cases():
    assert exact_fpr([], 3) == 1.0
    single = [Assignment(0b0110, 4)]
    assert math.isclose(exact_fpr(single, 2), brute_fpr(single, 4, 2), abs_tol=1e-15)
    with pytest.raises(DimensionError):
        exact_fpr(single, 5)
    with pytest.raises(ClauseSpaceTooLarge):
        exact_fpr(random_assignments(30, 3, 0), 4, cap=1000)
    with pytest.raises(DomainError):
        exact_fpr(single, 0)


def test_more_solutions_never_raise_fpr():
    sols = random_assignments(12, 10, seed=8)
    values = [exact_fpr(sols[:s], 3) for s in range(1, 11)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_sampled_fpr_agrees_with_exact():
    sols = random_assignments(16, 10, seed=4)
    p = exact_fpr(sols, 4)
    est, se = sampled_fpr(sols, 4, samples=120_000, seed=1)
    assert se > 0
    assert abs(est - p) <= 4.5 * se


def test_sampled_fpr_validation():
    with pytest.raises(DomainError):
        sampled_fpr(random_assignments(8, 2, 0), 3, samples=0)
    assert sampled_fpr([], 3) == (1.0, 0.0)


# ----------------------------------------------------------------- metrics

def test_filter_metrics_methods():
    flt = build_demo_filter([f"m{i}" for i in range(30)], s=8, n=16, k=4)
    independent = filter_metrics(flt, method="independent")
    assert independent.method == "analytic_independent"
    assert math.isclose(independent.fpr, fpr_independent(4, 8))

    exact = filter_metrics(flt, method="exact")
    assert exact.method == "exact_enumeration"
    assert math.isclose(exact.fpr, exact_fpr(flt.solutions, 4))
    assert math.isclose(
        exact.efficiency, efficiency(exact.fpr, flt.n, flt.s, flt.m)
    )

    sampled = filter_metrics(flt, method="sampled", samples=50_000)
    assert sampled.method == "sampled"
    assert sampled.stderr is not None
    assert abs(sampled.fpr - exact.fpr) <= 5 * sampled.stderr

    auto = filter_metrics(flt, method="auto")
    assert auto.method == "exact_enumeration"
    fallback = filter_metrics(flt, method="auto", cap=10, samples=20_000)
    assert fallback.method == "sampled"

    with pytest.raises(DomainError):
        filter_metrics(flt, method="guess")


def test_filter_metrics_flags_efficiency_above_one():
    # one stored solution but a huge clause budget: the measured efficiency
    # definition exceeds 1, which the metrics mark as anomalous
    fam = HashFamily(k=2, n=8, master_seed=0)
    flt = SatFilter([Assignment(0b10101010, 8)], fam, m=200)
    with pytest.warns(RuntimeWarning):
        metrics = filter_metrics(flt, method="exact")
    assert metrics.anomalous
    assert metrics.efficiency > 1.0
    assert metrics.to_json()["anomalous"] is True


# ------------------------------------------------------------- persistence

def test_save_load_round_trip(tmp_path):
    flt = build_demo_filter([f"m{i}" for i in range(20)], s=7, n=13, k=3, seed=9)
    path = tmp_path / "demo.sfilt"
    save_filter(flt, path)
    assert load_filter(path) == flt

    twin = json.loads((tmp_path / "demo.sfilt.json").read_text())
    assert twin["n"] == 13 and twin["k"] == 3 and twin["s"] == 7
    assert twin["family"] == flt.family.to_json()
    assert [Assignment.from_hex(h, 13) for h in twin["solutions"]] == list(flt.solutions)

    # byte-identical on re-save
    first = path.read_bytes()
    save_filter(load_filter(path), path)
    assert path.read_bytes() == first


def test_load_rejects_corrupt_files(tmp_path):
    flt = build_demo_filter([f"m{i}" for i in range(12)], s=3, n=10, k=3)
    path = tmp_path / "f.sfilt"
    save_filter(flt, path)
    raw = path.read_bytes()

    (tmp_path / "magic").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(DomainError):
        load_filter(tmp_path / "magic")

    (tmp_path / "version").write_bytes(raw[:4] + b"\x63\x00" + raw[6:])
    with pytest.raises(DomainError):
        load_filter(tmp_path / "version")

    (tmp_path / "short").write_bytes(raw[:-1])
    with pytest.raises(DomainError):
        load_filter(tmp_path / "short")

    (tmp_path / "stub").write_bytes(raw[:6])
    with pytest.raises(DomainError):
        load_filter(tmp_path / "stub")
