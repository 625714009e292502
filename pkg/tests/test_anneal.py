import math

import numpy as np
import pytest
from scipy import stats

from satfilter.anneal import (
    SOLVER_SA,
    SOLVER_SQA,
    ContinuousTimeWarning,
    SaSchedule,
    SolverRunResult,
    SqaSchedule,
    boltzmann_state_counts,
    equilibrium_magnetization,
    metropolis_accept_probability,
    run_sa,
    run_sqa,
    trotter_coupling,
)
from satfilter.errors import DimensionError, ScheduleError
from satfilter.instance import Assignment, Clause, KSatInstance, generate_instance


def unit_field_instance(r):
    """r copies of the positive unit clause on one variable: a two-level
    system with energies E(1) = 0 and E(0) = r, i.e. field strength r/2."""
    return KSatInstance(1, 1, [Clause([(0, False)])] * r)


# -------------------------------------------------------------- primitives

def test_metropolis_acceptance_values():
    assert metropolis_accept_probability(-2.0, 1.0) == 1.0
    assert metropolis_accept_probability(0.0, 5.0) == 1.0
    assert math.isclose(
        metropolis_accept_probability(2.0, 1.5), 0.049787068367863944
    )
    assert metropolis_accept_probability(3.0, 0.0) == 1.0
    with pytest.raises(ScheduleError):
        metropolis_accept_probability(1.0, -0.1)


def test_trotter_coupling_values():
    assert math.isclose(trotter_coupling(1.0, 1.0, 10), 1.152955335176056)
    assert math.isclose(trotter_coupling(3.0, 2.0, 8), 0.11347393422705161)
    assert trotter_coupling(0.0, 1.0, 4) == math.inf
    assert trotter_coupling(-1.0, 1.0, 4) == math.inf
    with pytest.raises(ScheduleError):
        trotter_coupling(1.0, 0.0, 4)
    with pytest.raises(ScheduleError):
        trotter_coupling(1.0, 1.0, 0)


def test_trotter_coupling_diverges_as_field_vanishes():
    values = [trotter_coupling(g, 1.0, 8) for g in (2.0, 1.0, 0.5, 0.1)]
    assert all(b < a for a, b in zip(values[1:], values))  # decreasing gamma, growing J


# --------------------------------------------------------------- schedules

def test_sa_schedule_validation_and_grid():
    with pytest.raises(ScheduleError):
        SaSchedule(2.0, 1.0, 10)
    with pytest.raises(ScheduleError):
        SaSchedule(-0.1, 1.0, 10)
    with pytest.raises(ScheduleError):
        SaSchedule(0.1, 1.0, 0)
    sched = SaSchedule(0.5, 2.0, 4)
    assert np.allclose(sched.betas(), [0.5, 1.0, 1.5, 2.0])
    assert sched.beta_at(0) == 0.5
    assert sched.beta_at(3) == 2.0
    assert SaSchedule(0.7, 0.9, 1).betas().tolist() == [0.7]


def test_sqa_schedule_validation_and_grid():
    with pytest.raises(ScheduleError):
        SqaSchedule(1.0, -0.1, 1.0, 8, 10)
    with pytest.raises(ScheduleError):
        SqaSchedule(0.5, 1.0, 1.0, 8, 10)  # increasing field
    with pytest.raises(ScheduleError):
        SqaSchedule(1.0, 0.0, 0.0, 8, 10)
    with pytest.raises(ScheduleError):
        SqaSchedule(1.0, 0.0, 1.0, 1, 10)  # one slice is not a ring
    with pytest.raises(ScheduleError):
        SqaSchedule(1.0, 0.0, 1.0, 8, 0)
    sched = SqaSchedule(3.0, 0.0, 2.0, 16, 4)
    assert np.allclose(sched.gammas(), [3.0, 2.0, 1.0, 0.0])
    assert sched.dtau == 0.125


def test_sqa_schedule_warns_on_coarse_grid():
    with pytest.warns(ContinuousTimeWarning):
        SqaSchedule(4.0, 0.0, 2.0, 8, 10)  # beta*gamma_0/M = 1.0


def test_schedule_json_round_trips():
    sa = SaSchedule(0.1, 3.0, 64)
    assert SaSchedule.from_json(sa.to_json()) == sa
    sqa = SqaSchedule(2.0, 0.5, 4.0, 32, 128, spatial_sweep=True)
    assert SqaSchedule.from_json(sqa.to_json()) == sqa
    assert sa.to_json()["solver"] == "sa"
    assert sqa.to_json()["solver"] == "sqa"


def test_run_result_consistency_guard():
    with pytest.raises(ValueError):
        SolverRunResult(Assignment(0, 2), 1, True, 5, 0, SOLVER_SA)


# --------------------------------------------------------------------- SA

def test_sa_is_deterministic_and_reports_true_energy(small_instance):
    sched = SaSchedule(0.2, 3.0, 40)
    a = run_sa(small_instance, sched, seed=5)
    b = run_sa(small_instance, sched, seed=5)
    c = run_sa(small_instance, sched, seed=6)
    assert a.final_assignment == b.final_assignment
    assert a.final_energy == small_instance.energy(a.final_assignment)
    assert a.satisfied == (a.final_energy == 0)
    assert a.mcs_used == 40
    assert a.solver_id == SOLVER_SA
    assert (c.final_assignment != a.final_assignment) or (c.seed != a.seed)


def test_sa_observer_reports_schedule_and_energies(small_instance):
    sched = SaSchedule(0.5, 1.5, 8)
    seen = []
    run_sa(small_instance, sched, seed=1, observer=lambda t, b, e: seen.append((t, b, e)))
    assert [t for t, _, _ in seen] == list(range(8))
    assert np.allclose([b for _, b, _ in seen], sched.betas())
    assert all(isinstance(e, int) and 0 <= e <= small_instance.m for _, _, e in seen)


def test_sa_at_infinite_temperature_visits_states_uniformly():
    # beta = 0 accepts every proposal; final states over many runs should
    # look uniform on the 2^3 cube
    inst = KSatInstance(3, 0, ())
    counts = np.zeros(8)
    for seed in range(1600):
        res = run_sa(inst, SaSchedule(0.0, 0.0, 3), seed=seed)
        counts[res.final_assignment.value] += 1
    chi2 = float(((counts - 200.0) ** 2 / 200.0).sum())
    assert stats.chi2.sf(chi2, df=7) > 1e-3


def test_fixed_beta_chain_matches_boltzmann():
    inst = generate_instance(3, 2, 4, seed=2)
    beta = 0.9
    energies = np.array([inst.energy(Assignment(v, 3)) for v in range(8)])
    weights = np.exp(-beta * energies)
    probs = weights / weights.sum()
    counts = boltzmann_state_counts(inst, beta, sweeps=200_000, seed=0)
    total = counts.sum()
    assert total == 200_000
    chi2 = float((((counts - total * probs) ** 2) / (total * probs)).sum())
    assert stats.chi2.sf(chi2, df=7) > 1e-3


def test_state_histogram_guards():
    with pytest.raises(DimensionError):
        boltzmann_state_counts(KSatInstance(17, 0, ()), 1.0, 10, 0)
    with pytest.raises(ScheduleError):
        boltzmann_state_counts(KSatInstance(2, 0, ()), -1.0, 10, 0)


# -------------------------------------------------------------------- SQA

def test_sqa_is_deterministic_and_reads_best_slice(small_instance):
    sched = SqaSchedule(2.0, 0.0, 3.0, 16, 30)
    res1, state = run_sqa(small_instance, sched, seed=3, return_state=True)
    res2 = run_sqa(small_instance, sched, seed=3)
    assert res1.final_assignment == res2.final_assignment
    assert state.replicas.shape == (16, small_instance.n)
    # cached slice energies are faithful
    recounted = [
        small_instance.energy(state.slice_assignment(p)) for p in range(16)
    ]
    assert recounted == state.energies.tolist()
    # readout is the first minimum-energy slice
    best = int(np.argmin(state.energies))
    assert res1.final_assignment == state.slice_assignment(best)
    assert res1.final_energy == int(state.energies.min())
    assert res1.solver_id == SOLVER_SQA


def test_sqa_observer_reports_field_schedule(small_instance):
    sched = SqaSchedule(1.5, 0.0, 2.0, 8, 6)
    seen = []
    run_sqa(small_instance, sched, seed=2, observer=lambda t, g, e: seen.append((t, g, e)))
    assert np.allclose([g for _, g, _ in seen], sched.gammas())
    assert len(seen) == 6


def test_sqa_classical_limit_is_locked_replica_sa(small_instance):
    # Gamma = 0 throughout: replicas start locked on one shared state and
    # every cluster spans the whole ring, so the trajectory must equal SA
    # at the fixed temperature under the same seed.
    for seed in (0, 1, 7):
        for beta, mcs in ((0.4, 1), (1.5, 13), (0.8, 60)):
            sa_trace, sqa_trace = [], []
            sa = run_sa(
                small_instance, SaSchedule(beta, beta, mcs), seed=seed,
                observer=lambda t, b, e: sa_trace.append(e),
            )
            sqa = run_sqa(
                small_instance, SqaSchedule(0.0, 0.0, beta, 16, mcs), seed=seed,
                observer=lambda t, g, e: sqa_trace.append(e),
            )
            assert sqa.final_assignment == sa.final_assignment
            assert sqa.final_energy == sa.final_energy
            assert sqa_trace == sa_trace


def transfer_matrix_magnetization(h, gamma, beta, slices, boundary):
    """Exact <sigma_z> of the discrete path-integral ring / chain for one
    spin with classical field h and transverse field gamma."""
    dtau = beta / slices
    coupling = -0.5 * math.log(math.tanh(gamma * dtau))
    D = np.diag([math.exp(dtau * h), math.exp(-dtau * h)])
    B = np.array(
        [
            [math.exp(coupling), math.exp(-coupling)],
            [math.exp(-coupling), math.exp(coupling)],
        ]
    )
    S = np.diag([1.0, -1.0])
    if boundary == "periodic":
        T = np.linalg.matrix_power(D @ B, slices)
        return np.trace(S @ T) / np.trace(T)
    factors = [D] + [B @ D] * (slices - 1)
    ones = np.ones(2)
    prod = np.linalg.multi_dot(factors) if len(factors) > 1 else factors[0]
    z = ones @ prod @ ones
    total = 0.0
    for p in range(slices):
        fs = list(factors)
        fs[p] = fs[p] @ S
        total += ones @ np.linalg.multi_dot(fs) @ ones if len(fs) > 1 else ones @ fs[0] @ ones
    return total / (slices * z)


@pytest.mark.parametrize("boundary", ["periodic", "open"])
def test_equilibrium_sampler_matches_transfer_matrix(boundary):
    h, gamma, beta, slices = 0.5, 1.2, 0.7, 4
    exact = transfer_matrix_magnetization(h, gamma, beta, slices, boundary)
    inst = unit_field_instance(1)
    runs = np.array(
        [
            equilibrium_magnetization(
                inst, gamma, beta, slices, sweeps=20_000, warmup=500,
                seed=910 + r, boundary=boundary,
            )
            for r in range(8)
        ]
    )
    sem = runs.std(ddof=1) / math.sqrt(8)
    assert sem < 0.005
    assert abs(runs.mean() - exact) <= 4 * sem


def test_equilibrium_sampler_guards():
    inst = unit_field_instance(1)
    with pytest.raises(ScheduleError):
        equilibrium_magnetization(inst, 1.0, 1.0, 4, 10, 1, 0, boundary="twisted")
    with pytest.raises(ScheduleError):
        equilibrium_magnetization(inst, -1.0, 1.0, 4, 10, 1, 0)
