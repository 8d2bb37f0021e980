"""Candidate input generation from declarative SUT specifications.

A `.spec` file declares bounded integer variables and named branches, each a
conjunction of comparison atoms over linear terms (plus products of at most
two variables, so e.g. `x*x + y*y == z*z` is expressible):

    var x in [1, 200];
    branch equilateral { x == y; y == z; }

Branch witnesses come from a randomized backtracking search with forward
checking over the bounded domains: variable and value orders are shuffled
per draw, so successive draws spread across the solution set, and a draw
that enumerates the whole space without finding anything new proves the
branch exhausted. `random_batch` is the uniform baseline that ignores the
branches entirely.
"""

from __future__ import annotations

import math
import operator
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from elbt.rng import derive_seed


class SpecParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsatBranchError(Exception):
    """The branch has no solution within the declared bounds."""

    def __init__(self, branch: str):
        super().__init__(f"branch '{branch}' is unsatisfiable within bounds")
        self.branch = branch


class AllBranchesUnsatError(Exception):
    """No branch of the spec yielded a single witness."""


_CMP = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class Atom:
    """Comparison `sum(terms) op const`; a term is coeff * (product of <=2 vars)."""

    terms: tuple[tuple[int, tuple[str, ...]], ...]
    op: str
    const: int

    def variables(self) -> frozenset[str]:
        return frozenset(v for _, vs in self.terms for v in vs)

    def evaluate(self, values: Mapping[str, int]) -> bool:
        total = 0
        for coeff, vs in self.terms:
            t = coeff
            for v in vs:
                t *= values[v]
            total += t
        return _CMP[self.op](total, self.const)


@dataclass(frozen=True)
class Branch:
    name: str
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError(f"branch '{self.name}' has no atoms")

    def satisfied_by(self, values: Mapping[str, int]) -> bool:
        return all(atom.evaluate(values) for atom in self.atoms)


@dataclass(frozen=True)
class SpecSet:
    variables: tuple[str, ...]
    bounds: tuple[tuple[int, int], ...]  # inclusive [lo, hi], parallel to variables
    branches: tuple[Branch, ...]

    def __post_init__(self):
        if len(self.variables) != len(self.bounds):
            raise ValueError("one bound pair per variable required")
        for name, (lo, hi) in zip(self.variables, self.bounds):
            if lo > hi:
                raise ValueError(f"variable '{name}': empty bounds [{lo}, {hi}]")
        names = [b.name for b in self.branches]
        if len(set(names)) != len(names):
            raise ValueError("duplicate branch names")
        declared = set(self.variables)
        for branch in self.branches:
            for atom in branch.atoms:
                undeclared = atom.variables() - declared
                if undeclared:
                    raise ValueError(
                        f"branch '{branch.name}' references undeclared {sorted(undeclared)}"
                    )

    def branch(self, name: str) -> Branch:
        for b in self.branches:
            if b.name == name:
                return b
        raise ValueError(f"unknown branch '{name}'")

    def bound_of(self, name: str) -> tuple[int, int]:
        return self.bounds[self.variables.index(name)]

    def domain_size(self) -> int:
        total = 1
        for lo, hi in self.bounds:
            total *= hi - lo + 1
        return total

    def in_bounds(self, vector: Sequence[int]) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(vector, self.bounds))


@dataclass(frozen=True)
class CandidateBatch:
    inputs: tuple[tuple[int, ...], ...]
    provenance: tuple[str, ...]  # branch name or "random", parallel to inputs

    def __post_init__(self):
        if len(self.inputs) != len(self.provenance):
            raise ValueError("one provenance entry per input required")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("batch inputs must be pairwise distinct")


# ---------------------------------------------------------------------------
# Spec file parsing


def _tokenize_spec(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        i, n = 0, len(line)
        while i < n:
            ch = line[i]
            if ch in " \t":
                i += 1
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (line[j].isalnum() or line[j] == "_"):
                    j += 1
                tokens.append(("ident", line[i:j], lineno))
                i = j
            elif ch.isdigit():
                j = i
                while j < n and line[j].isdigit():
                    j += 1
                tokens.append(("int", line[i:j], lineno))
                i = j
            elif line[i : i + 2] in ("==", "!=", "<=", ">="):
                tokens.append(("op", line[i : i + 2], lineno))
                i += 2
            elif ch in "[](){},;*+-<>":
                tokens.append(("op", ch, lineno))
                i += 1
            else:
                raise SpecParseError(f"unexpected character {ch!r}", lineno)
    tokens.append(("eof", "", len(text.splitlines()) + 1))
    return tokens


class _SpecParser:
    def __init__(self, tokens):
        self._tokens = tokens
        self._pos = 0

    def _peek(self):
        return self._tokens[self._pos]

    def _next(self):
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _expect(self, kind, text=None):
        k, t, line = self._next()
        if k != kind or (text is not None and t != text):
            want = text if text is not None else kind
            raise SpecParseError(f"expected {want!r}, found {t or k!r}", line)
        return t, line

    def _accept(self, text):
        k, t, _ = self._peek()
        if k == "op" and t == text:
            self._next()
            return True
        return False

    def parse(self) -> SpecSet:
        variables: list[str] = []
        bounds: list[tuple[int, int]] = []
        branches: list[Branch] = []
        while True:
            kind, text, line = self._peek()
            if kind == "eof":
                break
            if kind == "ident" and text == "var":
                self._next()
                name, _ = self._expect("ident")
                if name in variables:
                    raise SpecParseError(f"variable '{name}' redeclared", line)
                self._expect("ident", "in")
                self._expect("op", "[")
                lo = self._parse_int()
                self._expect("op", ",")
                hi = self._parse_int()
                self._expect("op", "]")
                self._expect("op", ";")
                variables.append(name)
                bounds.append((lo, hi))
            elif kind == "ident" and text == "branch":
                self._next()
                name, _ = self._expect("ident")
                self._expect("op", "{")
                atoms = []
                while not self._accept("}"):
                    atoms.append(self._parse_atom())
                branches.append(Branch(name, tuple(atoms)))
            else:
                raise SpecParseError(f"expected 'var' or 'branch', found {text!r}", line)
        return SpecSet(tuple(variables), tuple(bounds), tuple(branches))

    def _parse_int(self) -> int:
        sign = -1 if self._accept("-") else 1
        text, _ = self._expect("int")
        return sign * int(text)

    def _parse_atom(self) -> Atom:
        lhs_terms, lhs_const = self._parse_sum()
        kind, op, line = self._next()
        if kind != "op" or op not in _CMP:
            raise SpecParseError(f"expected comparison operator, found {op!r}", line)
        rhs_terms, rhs_const = self._parse_sum()
        self._expect("op", ";")
        # Normalize to sum(terms) op const with like terms combined.
        combined: dict[tuple[str, ...], int] = {}
        for coeff, vs in lhs_terms:
            combined[vs] = combined.get(vs, 0) + coeff
        for coeff, vs in rhs_terms:
            combined[vs] = combined.get(vs, 0) - coeff
        terms = tuple(
            (coeff, vs) for vs, coeff in sorted(combined.items()) if coeff != 0
        )
        return Atom(terms, op, rhs_const - lhs_const)

    def _parse_sum(self):
        terms: list[tuple[int, tuple[str, ...]]] = []
        const = 0
        negate = self._accept("-")
        while True:
            coeff, vs = self._parse_term()
            if negate:
                coeff = -coeff
            if vs:
                terms.append((coeff, vs))
            else:
                const += coeff
            k, t, _ = self._peek()
            if k == "op" and t in ("+", "-"):
                self._next()
                negate = t == "-"
            else:
                return terms, const

    def _parse_term(self):
        coeff = 1
        vars_: list[str] = []
        while True:
            kind, text, line = self._peek()
            if kind == "int":
                self._next()
                coeff *= int(text)
            elif kind == "ident":
                self._next()
                vars_.append(text)
            else:
                raise SpecParseError(f"expected term, found {text or kind!r}", line)
            if not self._accept("*"):
                break
        if len(vars_) > 2:
            raise SpecParseError("products are limited to two variables", line)
        return coeff, tuple(sorted(vars_))


def parse_spec(text: str) -> SpecSet:
    """Parse `.spec` text into a SpecSet."""
    return _SpecParser(_tokenize_spec(text)).parse()


# ---------------------------------------------------------------------------
# Randomized backtracking sampler


def _filter_candidates(
    atom: Atom, var: str, candidates: list[int], assign: dict[str, int]
) -> list[int]:
    """Values of `var` satisfying `atom` given that all its other vars are assigned.

    The atom collapses to a2*v^2 + a1*v  op  r. Equalities are solved directly
    (exact division / integer square root); other comparisons scan the
    candidate list.
    """
    rest = 0
    a1 = 0
    a2 = 0
    for coeff, vs in atom.terms:
        if var in vs:
            mult = coeff
            power = 0
            for v in vs:
                if v == var:
                    power += 1
                else:
                    mult *= assign[v]
            if power == 2:
                a2 += mult
            else:
                a1 += mult
        else:
            t = coeff
            for v in vs:
                t *= assign[v]
            rest += t
    r = atom.const - rest
    op = atom.op
    if op == "==":
        if a2 == 0:
            if a1 == 0:
                return list(candidates) if r == 0 else []
            if r % a1 != 0:
                return []
            v = r // a1
            return [v] if v in candidates else []
        if a1 == 0:
            if r % a2 != 0:
                return []
            sq = r // a2
            if sq < 0:
                return []
            root = math.isqrt(sq)
            if root * root != sq:
                return []
            roots = {root, -root}
            return sorted(v for v in roots if v in candidates)
        return [v for v in candidates if a2 * v * v + a1 * v == r]
    cmp = _CMP[op]
    return [v for v in candidates if cmp(a2 * v * v + a1 * v, r)]


def _solutions(spec: SpecSet, branch: Branch, rng: random.Random) -> Iterator[tuple[int, ...]]:
    """Enumerate satisfying assignments in a randomized order.

    Depth-first search over a shuffled variable order; each atom narrows its
    last-assigned variable's candidate values, so every atom is enforced
    before the search descends past it. Run to completion the iterator visits
    every solution exactly once.
    """
    for atom in branch.atoms:
        if not atom.variables() and not atom.evaluate({}):
            return
    order = list(spec.variables)
    rng.shuffle(order)
    position = {v: i for i, v in enumerate(order)}
    atoms_at: list[list[Atom]] = [[] for _ in order]
    for atom in branch.atoms:
        vs = atom.variables()
        if vs:
            atoms_at[max(position[v] for v in vs)].append(atom)
    domains = []
    for v in order:
        lo, hi = spec.bound_of(v)
        domains.append(list(range(lo, hi + 1)))
    assign: dict[str, int] = {}

    def dfs(depth: int) -> Iterator[tuple[int, ...]]:
        if depth == len(order):
            yield tuple(assign[v] for v in spec.variables)
            return
        var = order[depth]
        candidates = domains[depth]
        for atom in atoms_at[depth]:
            candidates = _filter_candidates(atom, var, candidates, assign)
            if not candidates:
                return
        values = list(candidates)
        rng.shuffle(values)
        for val in values:
            assign[var] = val
            yield from dfs(depth + 1)
            del assign[var]

    yield from dfs(0)


@dataclass
class _BranchSampler:
    """Draw distinct witnesses one at a time; detects exhaustion exactly."""

    spec: SpecSet
    branch: Branch
    seed: int
    seen: set[tuple[int, ...]] = field(default_factory=set)
    exhausted: bool = False

    def __post_init__(self):
        self._rng = random.Random(self.seed)

    def next_new(self) -> tuple[int, ...] | None:
        """A witness not drawn before, or None once the branch is used up.

        Each draw is a fresh randomized search; if a full pass yields nothing
        outside `seen`, the solution set is covered and the branch is exhausted.
        """
        if self.exhausted:
            return None
        rng = random.Random(self._rng.getrandbits(64))
        for sol in _solutions(self.spec, self.branch, rng):
            if sol not in self.seen:
                self.seen.add(sol)
                return sol
        self.exhausted = True
        return None


def sample_branch(
    spec: SpecSet, branch: str, k: int, seed: int
) -> list[tuple[int, ...]]:
    """Up to k distinct witnesses of one branch (all found, if fewer exist).

    Raises UnsatBranchError when the branch has no solution at all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sampler = _BranchSampler(spec, spec.branch(branch), derive_seed(seed, "branch", branch))
    out: list[tuple[int, ...]] = []
    for _ in range(k):
        witness = sampler.next_new()
        if witness is None:
            if not out:
                raise UnsatBranchError(branch)
            break
        out.append(witness)
    return out


def generate_batch(spec: SpecSet, batch_size: int, seed: int) -> CandidateBatch:
    """Round-robin one witness per branch until the batch is full.

    Unsatisfiable and exhausted branches are skipped; inputs are distinct
    across the whole batch. Raises AllBranchesUnsatError if nothing at all
    can be generated.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    samplers = [
        _BranchSampler(spec, b, derive_seed(seed, "gen", i, b.name))
        for i, b in enumerate(spec.branches)
    ]
    inputs: list[tuple[int, ...]] = []
    provenance: list[str] = []
    chosen: set[tuple[int, ...]] = set()
    active = list(range(len(samplers)))
    while active and len(inputs) < batch_size:
        next_round = []
        for idx in active:
            if len(inputs) >= batch_size:
                next_round.append(idx)
                continue
            witness = samplers[idx].next_new()
            while witness is not None and witness in chosen:
                witness = samplers[idx].next_new()
            if witness is None:
                continue
            inputs.append(witness)
            provenance.append(spec.branches[idx].name)
            chosen.add(witness)
            next_round.append(idx)
        active = next_round
    if not inputs:
        raise AllBranchesUnsatError("no branch produced a witness")
    return CandidateBatch(tuple(inputs), tuple(provenance))


def random_batch(spec: SpecSet, batch_size: int, seed: int) -> CandidateBatch:
    """Uniform i.i.d. vectors over the variable bounds, deduplicated.

    This is the baseline generator; branch constraints are ignored entirely.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    rng = random.Random(derive_seed(seed, "uniform"))
    target = min(batch_size, spec.domain_size())
    chosen: set[tuple[int, ...]] = set()
    inputs: list[tuple[int, ...]] = []
    while len(inputs) < target:
        vec = tuple(rng.randint(lo, hi) for lo, hi in spec.bounds)
        if vec not in chosen:
            chosen.add(vec)
            inputs.append(vec)
    return CandidateBatch(tuple(inputs), tuple(("random",) * len(inputs)))
