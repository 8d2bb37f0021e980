"""The iterative test-generation loop.

Seed a small suite from the spec branches, then repeat: train the configured
ensemble on the labeled suite, draw a candidate batch, rank candidates by
committee disagreement, select the winner, label it by executing the
original program, and grow the suite by one. The original program is the
oracle throughout; a fault on it aborts the run. `random_suite` is the
uniform baseline the generated suites are compared against.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from elbt.diversity import UtilityScore, mad_diversity, select_max_utility, vote_diversity
from elbt.lang import Fault, Program, Value, execute
from elbt.learners import CLASSIFICATION, REGRESSION, Dataset, EnsembleSpec, train
from elbt.rng import derive_seed
from elbt.specgen import SpecSet, generate_batch, random_batch


class SutFaultError(Exception):
    """The original program faulted on a generated input; it must be total."""

    def __init__(self, program: str, inputs: tuple[int, ...], fault: Fault):
        super().__init__(
            f"original program '{program}' faulted on input {inputs}: "
            f"{fault.kind} ({fault.detail})"
        )


class InsufficientInputsError(Exception):
    """The spec cannot supply as many distinct inputs as requested."""


class EmptyBatchError(Exception):
    """A candidate batch (and its retry) entirely duplicated the suite."""


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # domain type, not a pytest class

    input: tuple[int, ...]
    expected: Union[Value, bool]
    iteration: int  # 0 for seed cases, then the loop iteration that selected it
    utility: float = 0.0


@dataclass(frozen=True)
class LbtConfig:
    ensemble: EnsembleSpec
    seed: int = 42
    seed_suite_size: int = 6
    batch_size: int = 20
    target_suite_size: int = 50

    def __post_init__(self):
        if self.seed_suite_size < 2:
            raise ValueError("seed suite needs at least 2 cases to train on")
        if self.target_suite_size <= self.seed_suite_size:
            raise ValueError("target size must exceed the seed suite size")
        if self.batch_size < 2:
            raise ValueError("batch size must be at least 2")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    candidates: int
    max_utility: float
    selected_input: tuple[int, ...]
    suite_size: int
    train_size: int
    train_fingerprint: str


@dataclass(frozen=True)
class RunTrace:
    records: tuple[IterationRecord, ...]


def _suite_fingerprint(suite: Sequence[TestCase]) -> str:
    h = hashlib.sha256()
    for case in suite:
        h.update(repr(case.input).encode())
    return h.hexdigest()[:12]


def _label(program: Program, inputs: tuple[int, ...]) -> Value:
    out = execute(program, inputs)
    if isinstance(out, Fault):
        raise SutFaultError(program.name, inputs, out)
    return out


def _check_target_type(task: str, expected, program: Program) -> None:
    if task == CLASSIFICATION and not isinstance(expected, str):
        raise ValueError(
            f"classification run needs class-label outputs; '{program.name}' returned "
            f"{expected!r}"
        )
    if task == REGRESSION and type(expected) is not int:
        raise ValueError(
            f"regression run needs integer outputs; '{program.name}' returned {expected!r}"
        )


def seed_suite(spec: SpecSet, sut: Program, k: int, seed: int) -> list[TestCase]:
    """k distinct branch-generated inputs labeled by the original program."""
    if k < 2:
        raise ValueError("seed suite needs at least 2 cases")
    batch = generate_batch(spec, k, derive_seed(seed, "seed-suite"))
    if len(batch.inputs) < k:
        raise InsufficientInputsError(
            f"spec branches yielded only {len(batch.inputs)} distinct inputs, need {k}"
        )
    return [TestCase(inputs, _label(sut, inputs), iteration=0) for inputs in batch.inputs]


def _utilities(ensemble, task: str, candidates, provenance) -> list[UtilityScore]:
    scores = []
    if ensemble.n_members < 2:
        # Degenerate committee (boosting stopped at one member): no
        # disagreement signal, every candidate ties at zero.
        return [UtilityScore(c, 0.0, p) for c, p in zip(candidates, provenance)]
    for cand, prov in zip(candidates, provenance):
        x = np.asarray(cand, dtype=np.float64)
        members = ensemble.member_predictions(x)
        if task == CLASSIFICATION:
            d = vote_diversity(members, ensemble.predict_one(x))
        else:
            d = mad_diversity([float(p) for p in members])
        scores.append(UtilityScore(cand, d, prov))
    return scores


def run(config: LbtConfig, spec: SpecSet, sut: Program) -> tuple[list[TestCase], RunTrace]:
    """Grow a suite from seed to target size; deterministic for a fixed config."""
    task = config.ensemble.task
    suite = seed_suite(spec, sut, config.seed_suite_size, config.seed)
    for case in suite:
        _check_target_type(task, case.expected, sut)
    chosen = {case.input for case in suite}
    records: list[IterationRecord] = []
    iterations = config.target_suite_size - config.seed_suite_size
    for t in range(1, iterations + 1):
        features = np.array([case.input for case in suite], dtype=np.float64)
        if task == CLASSIFICATION:
            targets = np.array([case.expected for case in suite], dtype=object)
        else:
            targets = np.array([case.expected for case in suite], dtype=np.float64)
        train_size = len(suite)
        train_fp = _suite_fingerprint(suite)
        ensemble = train(config.ensemble, Dataset(features, targets, task), derive_seed(config.seed, "train", t))

        batch = generate_batch(spec, config.batch_size, derive_seed(config.seed, "batch", t))
        pairs = [(c, p) for c, p in zip(batch.inputs, batch.provenance) if c not in chosen]
        if not pairs:
            batch = generate_batch(
                spec, config.batch_size, derive_seed(config.seed, "batch-retry", t)
            )
            pairs = [(c, p) for c, p in zip(batch.inputs, batch.provenance) if c not in chosen]
            if not pairs:
                raise EmptyBatchError(f"iteration {t}: candidates exhausted by the suite")
        candidates = [c for c, _ in pairs]
        provenance = [p for _, p in pairs]
        scores = _utilities(ensemble, task, candidates, provenance)
        max_utility = max(s.d for s in scores)
        winner = select_max_utility(scores, chosen, derive_seed(config.seed, "tie", t))
        expected = _label(sut, winner)
        _check_target_type(task, expected, sut)
        suite.append(TestCase(winner, expected, iteration=t, utility=max_utility))
        chosen.add(winner)
        records.append(
            IterationRecord(
                iteration=t,
                candidates=len(candidates),
                max_utility=max_utility,
                selected_input=winner,
                suite_size=len(suite),
                train_size=train_size,
                train_fingerprint=train_fp,
            )
        )
    return suite, RunTrace(tuple(records))


def random_suite(spec: SpecSet, sut: Program, size: int, seed: int) -> list[TestCase]:
    """Uniform-random baseline suite labeled by the original program."""
    if size < 1:
        raise ValueError("size must be >= 1")
    batch = random_batch(spec, size, derive_seed(seed, "random-suite"))
    return [
        TestCase(inputs, _label(sut, inputs), iteration=i)
        for i, inputs in enumerate(batch.inputs)
    ]


# ---------------------------------------------------------------------------
# CSV wire formats


def _format_expected(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def parse_expected(text: str) -> Union[Value, bool]:
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        return text


def write_suite_csv(suite: Sequence[TestCase], path, header_comment: str = "") -> None:
    width = len(suite[0].input) if suite else 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        cols = [f"input_{i + 1}" for i in range(width)] + ["expected", "iteration", "utility"]
        fh.write(",".join(cols) + "\n")
        for case in suite:
            row = [str(v) for v in case.input]
            row += [_format_expected(case.expected), str(case.iteration), repr(case.utility)]
            fh.write(",".join(row) + "\n")


def read_suite_csv(path) -> list[TestCase]:
    cases: list[TestCase] = []
    with open(path, encoding="utf-8") as fh:
        header: list[str] | None = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                n_inputs = sum(1 for c in header if c.startswith("input_"))
                continue
            parts = line.split(",")
            inputs = tuple(int(v) for v in parts[:n_inputs])
            expected = parse_expected(parts[n_inputs])
            iteration = int(parts[n_inputs + 1])
            utility = float(parts[n_inputs + 2])
            cases.append(TestCase(inputs, expected, iteration, utility))
    return cases


def write_trace_csv(trace: RunTrace, path, header_comment: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("iteration,candidates,max_utility,selected_input,suite_size\n")
        for rec in trace.records:
            selected = " ".join(str(v) for v in rec.selected_input)
            fh.write(
                f"{rec.iteration},{rec.candidates},{repr(rec.max_utility)},"
                f"{selected},{rec.suite_size}\n"
            )
