"""Command-line interface.

    elbt gen        --spec f.spec --batch 20 --seed 42 [--random]
    elbt mutate     --sut f.sut --seed 42 --cap 4000 --out mutants.jsonl [--spec f.spec]
    elbt score      --mutants mutants.jsonl --suite suite.csv --out scores.csv
    elbt run        --sut f.sut --spec f.spec --combo bc-dtc --target 50 --seed 42 \\
                    --out suite.csv --trace trace.csv
    elbt experiment --config exp.toml
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from elbt.engine import LbtConfig, read_suite_csv, run, write_suite_csv, write_trace_csv
from elbt.experiment import ExperimentConfig, build_pool, run_experiment
from elbt.lang import parse
from elbt.learners import parse_combo
from elbt.mutation import (
    cap_mutants,
    filter_executable,
    generate_mutants,
    read_mutants_jsonl,
    score_suite,
    write_mutants_jsonl,
    write_score_csv,
)
from elbt.specgen import generate_batch, parse_spec, random_batch
from elbt.experiment import probe_inputs


def _load_spec(path: str):
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _load_sut(path: str):
    return parse(Path(path).read_text(encoding="utf-8"))


def _cmd_gen(args) -> int:
    spec = _load_spec(args.spec)
    if args.random:
        batch = random_batch(spec, args.batch, args.seed)
    else:
        batch = generate_batch(spec, args.batch, args.seed)
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        cols = [f"input_{i + 1}" for i in range(len(spec.variables))]
        out.write(",".join(cols + ["provenance"]) + "\n")
        for vec, prov in zip(batch.inputs, batch.provenance):
            out.write(",".join(str(v) for v in vec) + f",{prov}\n")
    finally:
        if args.out is not None:
            out.close()
    return 0


def _cmd_mutate(args) -> int:
    sut = _load_sut(args.sut)
    mutants = generate_mutants(sut)
    n_generated = len(mutants)
    if args.spec:
        mutants = filter_executable(mutants, probe_inputs(_load_spec(args.spec), args.seed))
    mutants = cap_mutants(mutants, args.cap, args.seed)
    write_mutants_jsonl(mutants, args.out)
    filtered = " (executable-filtered)" if args.spec else ""
    print(f"generated {n_generated} mutants{filtered}, wrote {len(mutants)} to {args.out}")
    return 0


def _cmd_score(args) -> int:
    mutants = read_mutants_jsonl(args.mutants)
    suite = read_suite_csv(args.suite)
    report = score_suite(mutants, [(case.input, case.expected) for case in suite])
    write_score_csv(report, args.out)
    print(
        f"killed {report.kill_count}/{report.executable} "
        f"(score {report.mutation_score:.4f}), wrote {args.out}"
    )
    return 0


def _cmd_run(args) -> int:
    sut = _load_sut(args.sut)
    spec = _load_spec(args.spec)
    config = LbtConfig(
        ensemble=parse_combo(args.combo),
        seed=args.seed,
        seed_suite_size=args.seed_suite,
        batch_size=args.batch,
        target_suite_size=args.target,
    )
    suite, trace = run(config, spec, sut)
    write_suite_csv(suite, args.out)
    if args.trace:
        write_trace_csv(trace, args.trace)
    print(f"suite of {len(suite)} cases written to {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_toml(args.config)
    table = run_experiment(config)
    expected = (len(config.combos) + 1) * len(config.seeds)
    if len(table.rows) != expected:
        print(f"experiment incomplete: {len(table.rows)}/{expected} runs", file=sys.stderr)
        return 1
    print(
        f"{len(table.rows)} runs scored against {table.pool_size} mutants "
        f"(pool {table.pool_fingerprint}); outputs in {config.out_dir}"
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="elbt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate candidate inputs from a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--batch", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--random", action="store_true", help="uniform baseline, ignore branches")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("mutate", help="write first-order mutants as JSONL")
    p.add_argument("--sut", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=4000)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None, help="spec file for executability probes")
    p.set_defaults(func=_cmd_mutate)

    p = sub.add_parser("score", help="score a suite CSV against mutants JSONL")
    p.add_argument("--mutants", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("run", help="run the learning-based generation loop")
    p.add_argument("--sut", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--combo", required=True)
    p.add_argument("--target", type=int, default=50)
    p.add_argument("--seed-suite", type=int, default=6)
    p.add_argument("--batch", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("experiment", help="run a full comparison experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_experiment)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
