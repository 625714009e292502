"""Satisfiability filters and the stochastic solvers that fill them.

The package covers the full pipeline: random k-SAT instances, three
incomplete solvers (simulated annealing, simulated quantum annealing by
path-integral Monte Carlo, and WalkSAT), filters built from the solutions
found, and the diversity statistics that explain how filter quality depends
on which solver produced the solutions.
"""

from .anneal import (
    SOLVER_SA,
    SOLVER_SQA,
    SOLVER_WS,
    ContinuousTimeWarning,
    SaSchedule,
    SolverRunResult,
    SqaSchedule,
    SqaState,
    boltzmann_state_counts,
    equilibrium_magnetization,
    metropolis_accept_probability,
    run_sa,
    run_sqa,
    trotter_coupling,
)
from .diversity import (
    CensusRecord,
    CrossPairStats,
    DiversityCurve,
    SolutionCensus,
    cross_solver_hamming_table,
    distinct_solutions_curve,
    efficiency_vs_s_curve,
    fpr_vs_s_curve,
    greedy_max_hamming_subset,
    hamming,
    load_census,
    mixed_fpr_curve,
    mixed_selection,
    pairwise_hamming_stats,
    probability_to_find_distribution,
    read_census,
    sqa_hardness_percentiles,
    write_census,
    write_curves_csv,
)
from .errors import (
    CensusError,
    ClauseSpaceTooLarge,
    DimacsParseError,
    DimensionError,
    DomainError,
    DuplicateSolutionError,
    ExternalOutputError,
    ExternalProcessError,
    ExternalSolverError,
    ExternalValidationError,
    NonSatisfyingSolutionError,
    SatFilterError,
    ScheduleError,
    ScheduleMismatchError,
    SizeCapError,
)
from .filters import (
    FilterAnswer,
    FilterMetrics,
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
from .harness import (
    EffortRecord,
    ExperimentSpec,
    GridPointReport,
    effort_99,
    generate_batch,
    optimize_schedule,
    run_census,
    run_experiment,
    runs_needed_99,
    scaling_study,
    select_mcs,
)
from .instance import (
    Assignment,
    Clause,
    KSatInstance,
    Literal,
    all_clauses,
    blocking_clause,
    clauses_for_target_efficiency,
    energies,
    energy,
    enumerate_solutions,
    generate_instance,
    is_satisfying,
    read_dimacs,
    read_sidecar,
    write_dimacs,
    write_sidecar,
)
from .seeds import derive_seed, rng_from
from .solvers import (
    Schedule,
    ensure_solver_tag,
    load_schedule,
    run_solver,
    save_schedule,
    schedule_from_json,
    schedule_to_json,
    solver_id_of,
)
from .walksat import (
    WalksatConfig,
    WalksatTrace,
    default_max_flips,
    external_walksat_adapter,
    run_walksat,
)

__version__ = "0.1.0"
