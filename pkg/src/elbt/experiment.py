"""Comparison experiments: every ensemble combination vs the random baseline.

One shared mutant pool is built per experiment (generate, filter on probe
inputs, cap); every suite is scored against that exact pool, and each run's
kill curve falls out of a single scoring pass because a mutant records its
first killing test. Outputs are plain CSVs plus a pool.meta stamp; rerunning
the same config reproduces them byte for byte.
"""

from __future__ import annotations

import hashlib
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from elbt.engine import LbtConfig, TestCase, random_suite, run
from elbt.lang import Program, parse, pretty_print
from elbt.learners import (
    CLASSIFICATION,
    REGRESSION,
    combo_base_code,
    combo_codes,
    combo_family,
    parse_combo,
)
from elbt.mutation import (
    Mutant,
    cap_mutants,
    filter_executable,
    generate_mutants,
    kill_counts_by_prefix,
    score_suite,
)
from elbt.rng import derive_seed
from elbt.specgen import SpecSet, UnsatBranchError, parse_spec, random_batch, sample_branch

RANDOM_BASELINE = "random"

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class ExperimentConfig:
    sut_path: str
    spec_path: str
    task: str
    out_dir: str
    combos: tuple[str, ...] = ()  # empty = all nine codes for the task
    seeds: tuple[int, ...] = tuple(range(1, 11))
    target_suite_size: int = 50
    seed_suite_size: int = 6
    batch_size: int = 20
    n_members: int = 10
    mutant_cap: int = 4000
    pool_seed: int = 0
    probe_random: int = 100
    checkpoint_every: int = 5
    workers: Optional[int] = None  # None = one per CPU

    def __post_init__(self):
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise ValueError(f"unknown task '{self.task}'")
        if not self.seeds:
            raise ValueError("at least one seed required")
        combos = self.combos or combo_codes(self.task)
        for code in combos:
            if code not in combo_codes(self.task):
                raise ValueError(f"combo '{code}' is not a {self.task} combination")
        object.__setattr__(self, "combos", tuple(combos))

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        section = raw.get("experiment", raw)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(section) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("combos", "seeds"):
            if key in section:
                section[key] = tuple(section[key])
        base = Path(path).parent
        for key in ("sut_path", "spec_path", "out_dir"):
            if key in section:
                section[key] = str((base / section[key]).resolve())
        return cls(**section)


@dataclass(frozen=True)
class RunResult:
    combo: str  # combination code or 'random'
    seed: int
    kill_count: int
    mutation_score: float
    curve: tuple[tuple[int, int], ...]  # (suite prefix size, kills)
    suite: tuple[TestCase, ...]
    trace_rows: tuple = ()


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[RunResult, ...]
    pool_generated: int
    pool_executable: int
    pool_size: int
    pool_fingerprint: str
    combos: tuple[str, ...]

    def results_for(self, combo: str) -> list[RunResult]:
        return [r for r in self.rows if r.combo == combo]

    def mean_kills(self, combo: str) -> float:
        results = self.results_for(combo)
        return sum(r.kill_count for r in results) / len(results)

    def aggregates(self) -> list[tuple[str, str, float, float, float]]:
        """(combo, family, mean_kills, std_kills, mean_score) per combo + baseline."""
        out = []
        for combo in list(self.combos) + [RANDOM_BASELINE]:
            results = self.results_for(combo)
            if not results:
                continue
            kills = [r.kill_count for r in results]
            scores = [r.mutation_score for r in results]
            mean = sum(kills) / len(kills)
            std = math.sqrt(sum((k - mean) ** 2 for k in kills) / len(kills))
            family = "Random" if combo == RANDOM_BASELINE else combo_family(combo)
            out.append((combo, family, mean, std, sum(scores) / len(scores)))
        return out


def pivot_bagging_boosting(table: ComparisonTable) -> dict[str, tuple[float, float]]:
    """Family means: {'Bagging'|'Boosting': (mean_kills, mean_score)}."""
    groups: dict[str, list[RunResult]] = {"Bagging": [], "Boosting": []}
    for row in table.rows:
        if row.combo == RANDOM_BASELINE:
            continue
        groups[combo_family(row.combo)].append(row)
    out = {}
    for family, rows in groups.items():
        if rows:
            out[family] = (
                sum(r.kill_count for r in rows) / len(rows),
                sum(r.mutation_score for r in rows) / len(rows),
            )
    return out


def pivot_base_estimators(table: ComparisonTable) -> list[tuple[str, str, float, float]]:
    """(method code, base code, mean_kills, mean_score) for explicit-base combos."""
    out = []
    for combo in table.combos:
        base = combo_base_code(combo)
        if base is None:
            continue
        method = combo.split("-", 1)[0]
        results = table.results_for(combo)
        if not results:
            continue
        out.append(
            (
                method,
                base,
                sum(r.kill_count for r in results) / len(results),
                sum(r.mutation_score for r in results) / len(results),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Pool construction


def probe_inputs(spec: SpecSet, seed: int, n_random: int = 100) -> list[tuple[int, ...]]:
    """Executability probes: one witness per satisfiable branch + random points."""
    probes: list[tuple[int, ...]] = []
    seen = set()
    for branch in spec.branches:
        try:
            witness = sample_branch(spec, branch.name, 1, derive_seed(seed, "probe"))[0]
        except UnsatBranchError:
            continue
        if witness not in seen:
            seen.add(witness)
            probes.append(witness)
    for vec in random_batch(spec, n_random, derive_seed(seed, "probe-random")).inputs:
        if vec not in seen:
            seen.add(vec)
            probes.append(vec)
    return probes


def build_pool(
    sut: Program, spec: SpecSet, cap: int, pool_seed: int, n_random: int = 100
) -> tuple[list[Mutant], int, int]:
    """Shared scored pool: (capped executable mutants, generated, executable)."""
    generated = generate_mutants(sut)
    executable = filter_executable(generated, probe_inputs(spec, pool_seed, n_random))
    pool = cap_mutants(executable, cap, pool_seed)
    return pool, len(generated), len(executable)


def pool_fingerprint(pool: Sequence[Mutant]) -> str:
    h = hashlib.sha256()
    for mutant in pool:
        h.update(str(mutant.id).encode())
        h.update(pretty_print(mutant.program).encode())
    return h.hexdigest()[:12]


# ---------------------------------------------------------------------------
# Per-run execution (worker-pool friendly: module-level state + function)

_CTX: dict = {}


def _init_worker(payload) -> None:
    _CTX.update(payload)


def _checkpoint_sizes(target: int, step: int) -> list[int]:
    sizes = list(range(step, target + 1, step))
    if not sizes or sizes[-1] != target:
        sizes.append(target)
    return sizes


def _run_one(task_item: tuple[str, int]) -> RunResult:
    combo, seed = task_item
    cfg: ExperimentConfig = _CTX["config"]
    sut: Program = _CTX["sut"]
    spec: SpecSet = _CTX["spec"]
    pool: list[Mutant] = _CTX["pool"]
    if combo == RANDOM_BASELINE:
        suite = random_suite(spec, sut, cfg.target_suite_size, seed)
        trace_rows: tuple = ()
    else:
        lbt = LbtConfig(
            ensemble=parse_combo(combo, n_members=cfg.n_members),
            seed=seed,
            seed_suite_size=cfg.seed_suite_size,
            batch_size=cfg.batch_size,
            target_suite_size=cfg.target_suite_size,
        )
        suite, trace = run(lbt, spec, sut)
        trace_rows = trace.records
    report = score_suite(pool, [(case.input, case.expected) for case in suite])
    sizes = _checkpoint_sizes(cfg.target_suite_size, cfg.checkpoint_every)
    kills = kill_counts_by_prefix(report, sizes)
    return RunResult(
        combo=combo,
        seed=seed,
        kill_count=report.kill_count,
        mutation_score=report.mutation_score,
        curve=tuple(zip(sizes, kills)),
        suite=tuple(suite),
        trace_rows=trace_rows,
    )


# ---------------------------------------------------------------------------
# Output files


def _write_curve_csv(result: RunResult, pool_size: int, path: Path, stamp: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {stamp}\n")
        fh.write("suite_size,kill_count,mutation_score\n")
        for size, kills in result.curve:
            score = kills / pool_size if pool_size else 0.0
            fh.write(f"{size},{kills},{repr(score)}\n")


def _write_aggregate_csv(table: ComparisonTable, path: Path, stamp: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {stamp}\n")
        fh.write("combo,family,mean_kills,std_kills,mean_score\n")
        for combo, family, mean_k, std_k, mean_s in table.aggregates():
            fh.write(f"{combo},{family},{repr(mean_k)},{repr(std_k)},{repr(mean_s)}\n")


def _write_runs_csv(rows: Sequence[RunResult], path: Path, stamp: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {stamp}\n")
        fh.write("combo,seed,kill_count,mutation_score\n")
        for r in rows:
            fh.write(f"{r.combo},{r.seed},{r.kill_count},{repr(r.mutation_score)}\n")


def _write_pivots(table: ComparisonTable, out: Path, stamp: str) -> None:
    with open(out / "pivot_family.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {stamp}\n")
        fh.write("family,mean_kills,mean_score\n")
        for family, (mean_k, mean_s) in sorted(pivot_bagging_boosting(table).items()):
            fh.write(f"{family},{repr(mean_k)},{repr(mean_s)}\n")
    with open(out / "pivot_base.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {stamp}\n")
        fh.write("method,base,mean_kills,mean_score\n")
        for method, base, mean_k, mean_s in pivot_base_estimators(table):
            fh.write(f"{method},{base},{repr(mean_k)},{repr(mean_s)}\n")


def run_experiment(config: ExperimentConfig) -> ComparisonTable:
    """Run every (combo, seed) plus the paired random baseline and write CSVs."""
    sut = parse(Path(config.sut_path).read_text(encoding="utf-8"))
    spec = parse_spec(Path(config.spec_path).read_text(encoding="utf-8"))
    pool, n_generated, n_executable = build_pool(
        sut, spec, config.mutant_cap, config.pool_seed, config.probe_random
    )
    fingerprint = pool_fingerprint(pool)
    stamp = f"pool={fingerprint}"

    out = Path(config.out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    with open(out / "pool.meta", "w", encoding="utf-8") as fh:
        fh.write(f"generated={n_generated}\n")
        fh.write(f"executable={n_executable}\n")
        fh.write(f"capped={len(pool)}\n")
        fh.write(f"fingerprint={fingerprint}\n")

    tasks = [(combo, seed) for combo in config.combos for seed in config.seeds]
    tasks += [(RANDOM_BASELINE, seed) for seed in config.seeds]
    payload = {"config": config, "sut": sut, "spec": spec, "pool": pool}

    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)
    results: list[RunResult] = []
    try:
        if workers > 1:
            with ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker, initargs=(payload,)
            ) as pool_exec:
                iterator = pool_exec.map(_run_one, tasks)
                for result in iterator:
                    results.append(result)
                    _write_curve_csv(
                        result, len(pool), out / "curves" / f"{result.combo}_{result.seed}.csv", stamp
                    )
        else:
            _init_worker(payload)
            for item in tasks:
                result = _run_one(item)
                results.append(result)
                _write_curve_csv(
                    result, len(pool), out / "curves" / f"{result.combo}_{result.seed}.csv", stamp
                )
    finally:
        # Flush whatever completed, so a failed run still leaves partial results.
        table = ComparisonTable(
            rows=tuple(results),
            pool_generated=n_generated,
            pool_executable=n_executable,
            pool_size=len(pool),
            pool_fingerprint=fingerprint,
            combos=config.combos,
        )
        if results:
            _write_runs_csv(results, out / "runs.csv", stamp)
            _write_aggregate_csv(table, out / "aggregate.csv", stamp)
            _write_pivots(table, out, stamp)
    return table
