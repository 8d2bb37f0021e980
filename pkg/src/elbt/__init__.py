"""Ensemble learning-based test generation for small integer programs.

The package wires together five pieces: a mini expression language that
systems under test are written in (`elbt.lang`), a constraint-based input
generator driven by declarative spec files (`elbt.specgen`), from-scratch
ensemble learners (`elbt.learners`), disagreement-based input selection
(`elbt.diversity` + `elbt.engine`), and a mutation-testing harness used to
compare the generated suites against a random baseline (`elbt.mutation` +
`elbt.experiment`).
"""

__version__ = "0.1.0"

from elbt.lang import Fault, Program, execute, parse, pretty_print
from elbt.specgen import SpecSet, generate_batch, parse_spec, random_batch, sample_branch
from elbt.mutation import filter_executable, generate_mutants, score_suite
from elbt.learners import EnsembleSpec, parse_combo, train
from elbt.diversity import mad_diversity, select_max_utility, vote_diversity
from elbt.engine import LbtConfig, TestCase, random_suite, run, seed_suite
from elbt.experiment import ExperimentConfig, pivot_bagging_boosting, run_experiment

__all__ = [
    "Fault",
    "Program",
    "execute",
    "parse",
    "pretty_print",
    "SpecSet",
    "parse_spec",
    "sample_branch",
    "generate_batch",
    "random_batch",
    "generate_mutants",
    "filter_executable",
    "score_suite",
    "EnsembleSpec",
    "parse_combo",
    "train",
    "mad_diversity",
    "vote_diversity",
    "select_max_utility",
    "LbtConfig",
    "TestCase",
    "seed_suite",
    "run",
    "random_suite",
    "ExperimentConfig",
    "run_experiment",
    "pivot_bagging_boosting",
]
