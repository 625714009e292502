"""Shared fixtures: small instances and a reusable mini experiment."""

import pytest

from satfilter import ExperimentSpec, generate_instance, run_experiment
from satfilter.instance import KSatInstance


@pytest.fixture
def small_instance():
    """n=12 3-SAT at alpha=2.5; satisfiable and cheap to enumerate."""
    return generate_instance(12, 3, 30, seed=7)


@pytest.fixture
def free_instance():
    """An instance with no clauses: every assignment satisfies it."""
    return KSatInstance(6, 0, ())


@pytest.fixture(scope="session")
def mini_experiment(tmp_path_factory):
    """A small but real experiment directory: census, curves, manifest.

    Shared by CLI and harness tests that only need plausible artifacts,
    not any particular statistics.
    """
    out = tmp_path_factory.mktemp("mini-exp")
    spec = ExperimentSpec(
        k=3,
        n=16,
        alpha=1.5,
        instance_count=3,
        runs_per_instance=30,
        master_seed=99,
        solvers=("SA", "SQA", "WS"),
        mcs=16,
        sa_grid=((0.1, 3.0),),
        sqa_grid=((1.5, 0.0, 3.0, 16),),
        pilot_instances=1,
        pilot_runs=4,
    )
    census = run_experiment(spec, out)
    return spec, out, census
