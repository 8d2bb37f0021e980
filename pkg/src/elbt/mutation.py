"""First-order AST mutation, executability filtering, and suite scoring.

Mutants are produced by single-node edits from a fixed operator catalog
(relational / arithmetic / logical operator replacement, unary insertion and
removal, integer literal perturbation, operand swap on non-commutative
operators, class-label replacement), deduplicated by their printed source,
in a deterministic order: AST pre-order, then catalog order.

A mutant is *executable* when it returns a value (no fault) on every probe
input; only executable mutants enter the scored pool. A test kills a mutant
when the mutant faults on the test input or returns a value different from
the expected output recorded from the original program.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from elbt.lang import (
    Binary,
    ClassLit,
    Fault,
    If,
    IntLit,
    Program,
    Unary,
    Var,
    execute,
    parse,
    pretty_print,
)
from elbt.lang.nodes import Assign, Expr, Return, Stmt, format_expr
from elbt.rng import derive_seed

_RELATIONAL = ("==", "!=", "<", "<=", ">", ">=")
_ARITHMETIC = ("+", "-", "*", "/", "%")
_NON_COMMUTATIVE = ("-", "/", "%", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class MutationEdit:
    path: str  # e.g. "body[1].cond.lhs"
    operator: str  # catalog operator kind
    original: str  # printed fragment before the edit
    replacement: str


@dataclass(frozen=True)
class Mutant:
    id: int
    edit: MutationEdit
    program: Program
    base: Program | None = None


@dataclass(frozen=True)
class MutationReport:
    total_generated: int
    executable: int
    statuses: tuple[tuple[int, int | None], ...]  # (mutant id, killing test index | None)
    kill_count: int
    mutation_score: float


# ---------------------------------------------------------------------------
# Site collection and single-node replacement

_Step = tuple[str, int | None]


def _walk_expr(expr: Expr, steps: tuple[_Step, ...], is_cond: bool, out: list) -> None:
    out.append((steps, expr, is_cond))
    if isinstance(expr, Binary):
        _walk_expr(expr.lhs, steps + (("lhs", None),), False, out)
        _walk_expr(expr.rhs, steps + (("rhs", None),), False, out)
    elif isinstance(expr, Unary):
        _walk_expr(expr.operand, steps + (("operand", None),), False, out)


def _walk_stmts(stmts: tuple[Stmt, ...], field: str, base: tuple[_Step, ...], out: list) -> None:
    for i, stmt in enumerate(stmts):
        steps = base + ((field, i),)
        if isinstance(stmt, If):
            _walk_expr(stmt.cond, steps + (("cond", None),), True, out)
            _walk_stmts(stmt.then, "then", steps, out)
            _walk_stmts(stmt.orelse, "orelse", steps, out)
        elif isinstance(stmt, (Assign, Return)):
            _walk_expr(stmt.expr, steps + (("expr", None),), False, out)


def _expr_sites(program: Program) -> list[tuple[tuple[_Step, ...], Expr, bool]]:
    """Every expression node in AST pre-order with its path and condition flag."""
    out: list = []
    _walk_stmts(program.body, "body", (), out)
    return out


def _rebuild(node, steps: tuple[_Step, ...], new_node):
    if not steps:
        return new_node
    field, idx = steps[0]
    value = getattr(node, field)
    if idx is None:
        replaced = _rebuild(value, steps[1:], new_node)
    else:
        items = list(value)
        items[idx] = _rebuild(items[idx], steps[1:], new_node)
        replaced = tuple(items)
    return dataclasses.replace(node, **{field: replaced})


def _path_text(steps: tuple[_Step, ...]) -> str:
    parts = []
    for field, idx in steps:
        parts.append(f"{field}[{idx}]" if idx is not None else field)
    return ".".join(parts)


# ---------------------------------------------------------------------------
# Operator catalog


def _candidate_edits(node: Expr, is_cond: bool, labels: Sequence[str]) -> Iterable[tuple[str, Expr]]:
    """Replacement nodes for one site, in catalog order."""
    if isinstance(node, Binary):
        if node.op in _RELATIONAL:
            for op in _RELATIONAL:
                if op != node.op:
                    yield "relational-replacement", dataclasses.replace(node, op=op)
        elif node.op in _ARITHMETIC:
            for op in _ARITHMETIC:
                if op != node.op:
                    yield "arithmetic-replacement", dataclasses.replace(node, op=op)
        elif node.op in ("&&", "||"):
            flipped = "||" if node.op == "&&" else "&&"
            yield "logical-replacement", dataclasses.replace(node, op=flipped)
    if isinstance(node, Var) or (isinstance(node, Binary) and node.op in _ARITHMETIC):
        yield "unary-insert-negate", Unary("-", node)
    if is_cond:
        yield "unary-insert-not", Unary("!", node)
    if isinstance(node, Unary):
        yield "unary-remove", node.operand
    if isinstance(node, IntLit):
        c = node.value
        for v in (c + 1, c - 1, 0, -c):
            if v != c:
                yield "literal-perturbation", IntLit(v)
    if isinstance(node, Binary) and node.op in _NON_COMMUTATIVE and node.lhs != node.rhs:
        yield "operand-swap", Binary(node.op, node.rhs, node.lhs)
    if isinstance(node, ClassLit):
        for label in labels:
            if label != node.label:
                yield "class-replacement", ClassLit(label)


def generate_mutants(program: Program) -> list[Mutant]:
    """All first-order mutants of a program, deduplicated by printed source."""
    labels = sorted({n.label for _, n, _ in _expr_sites(program) if isinstance(n, ClassLit)})
    seen = {pretty_print(program)}
    mutants: list[Mutant] = []
    for steps, node, is_cond in _expr_sites(program):
        for kind, replacement in _candidate_edits(node, is_cond, labels):
            mutated = _rebuild(program, steps, replacement)
            source = pretty_print(mutated)
            if source in seen:
                continue
            seen.add(source)
            edit = MutationEdit(_path_text(steps), kind, format_expr(node), format_expr(replacement))
            mutants.append(Mutant(len(mutants), edit, mutated, base=program))
    return mutants


# ---------------------------------------------------------------------------
# Filtering, capping, scoring


def filter_executable(
    mutants: Sequence[Mutant], probe_inputs: Sequence[Sequence[int]]
) -> list[Mutant]:
    """Mutants that return a value (never fault) on every probe input."""
    if not probe_inputs:
        raise ValueError("probe_inputs must be non-empty")
    kept = []
    for mutant in mutants:
        if all(not isinstance(execute(mutant.program, p), Fault) for p in probe_inputs):
            kept.append(mutant)
    return kept


def cap_mutants(mutants: Sequence[Mutant], cap: int, seed: int) -> list[Mutant]:
    """Uniform subsample down to `cap`, keeping id order; no-op when under cap."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if len(mutants) <= cap:
        return list(mutants)
    rng = random.Random(derive_seed(seed, "mutant-cap"))
    picked = rng.sample(range(len(mutants)), cap)
    return [mutants[i] for i in sorted(picked)]


def score_suite(
    mutants: Sequence[Mutant],
    suite: Sequence[tuple[Sequence[int], object]],
    total_generated: int | None = None,
) -> MutationReport:
    """Kill status per mutant against (input, expected-output) pairs.

    Expected outputs must come from the original program. Evaluation
    short-circuits at the first killing test; the recorded index is that
    first test's position in the suite.
    """
    statuses: list[tuple[int, int | None]] = []
    kills = 0
    for mutant in mutants:
        killed_by: int | None = None
        for i, (inputs, expected) in enumerate(suite):
            out = execute(mutant.program, inputs)
            if isinstance(out, Fault) or out != expected:
                killed_by = i
                kills += 1
                break
        statuses.append((mutant.id, killed_by))
    executable = len(mutants)
    return MutationReport(
        total_generated=total_generated if total_generated is not None else executable,
        executable=executable,
        statuses=tuple(statuses),
        kill_count=kills,
        mutation_score=kills / executable if executable else 0.0,
    )


def kill_counts_by_prefix(report: MutationReport, prefix_sizes: Sequence[int]) -> list[int]:
    """Kills attributable to each suite prefix, from one full scoring pass.

    Valid because a mutant's recorded killer is the *first* killing test: a
    prefix of size s kills exactly the mutants with killing index < s.
    """
    indices = sorted(idx for _, idx in report.statuses if idx is not None)
    out = []
    for size in prefix_sizes:
        lo, hi = 0, len(indices)
        while lo < hi:
            mid = (lo + hi) // 2
            if indices[mid] < size:
                lo = mid + 1
            else:
                hi = mid
        out.append(lo)
    return out


# ---------------------------------------------------------------------------
# Wire formats


def write_mutants_jsonl(mutants: Sequence[Mutant], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in mutants:
            fh.write(
                json.dumps(
                    {
                        "id": m.id,
                        "path": m.edit.path,
                        "operator": m.edit.operator,
                        "original": m.edit.original,
                        "replacement": m.edit.replacement,
                        "source": pretty_print(m.program),
                    }
                )
                + "\n"
            )


def read_mutants_jsonl(path) -> list[Mutant]:
    mutants = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            edit = MutationEdit(rec["path"], rec["operator"], rec["original"], rec["replacement"])
            mutants.append(Mutant(rec["id"], edit, parse(rec["source"])))
    return mutants


def write_score_csv(report: MutationReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("mutant_id,status,killing_test_index\n")
        for mutant_id, killed_by in report.statuses:
            if killed_by is None:
                fh.write(f"{mutant_id},survived,\n")
            else:
                fh.write(f"{mutant_id},killed,{killed_by}\n")
