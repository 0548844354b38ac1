"""The slow law that rewrites goal equations.

One law step runs per K controller steps.  The law is a pure function of
its own state: it never sees slot parameters, momentum, or probes, so the
goal stream it produces is decided before the controller ever runs.

Kinds: "identity" keeps the goals fixed, "schedule" cycles through a
program of goal lists, "grammar_walk" applies one seeded random mutation
per step, resampling (up to 32 attempts) any mutation that would produce
a sequence the grammar rejects.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .expr import (
    ArgTuple,
    EquationPairList,
    GrammarError,
    Index,
    IndexSequence,
    parse_sequence,
)
from .prng import new_words, rng_from_words, rng_to_words

IDENTITY_LAW = "identity"
SCHEDULE = "schedule"
GRAMMAR_WALK = "grammar_walk"
LAW_KINDS = (IDENTITY_LAW, SCHEDULE, GRAMMAR_WALK)

MUTATION_ATTEMPTS = 32

__all__ = [
    "IDENTITY_LAW",
    "SCHEDULE",
    "GRAMMAR_WALK",
    "LAW_KINDS",
    "MUTATION_ATTEMPTS",
    "LawSpec",
    "LawState",
    "LawStallWarning",
    "initial_law_state",
    "step_law",
]


class LawStallWarning(RuntimeWarning):
    """Every mutation attempt in a law step was rejected; goals unchanged."""


@dataclass(frozen=True)
class LawSpec:
    """Static description of the rewrite law for one scenario.

    `arities` carries the per-slot arity table so mutations and validity
    checks need nothing beyond this object.
    """

    kind: str
    arities: tuple
    pairs: EquationPairList | None = None
    program: tuple = ()
    period: int = 1
    law_seed: int = 0
    mutation_weights: tuple = (1.0, 1.0, 1.0, 1.0)

    def to_json(self) -> dict:
        if self.kind == IDENTITY_LAW:
            return {"kind": self.kind, "pairs": self.pairs.to_json()}
        if self.kind == SCHEDULE:
            return {
                "kind": self.kind,
                "period": self.period,
                "program": [p.to_json() for p in self.program],
            }
        return {
            "kind": self.kind,
            "law_seed": self.law_seed,
            "mutation_weights": list(self.mutation_weights),
            "pairs": self.pairs.to_json(),
        }


@dataclass
class LawState:
    """Dynamic law state: current goals plus the law's own bookkeeping."""

    cpair: EquationPairList
    program_counter: int = 0
    macro_count: int = 0
    rng_words: np.ndarray | None = None

    def copy(self) -> "LawState":
        words = None if self.rng_words is None else self.rng_words.copy()
        return LawState(self.cpair, self.program_counter, self.macro_count, words)


def initial_law_state(spec: LawSpec) -> LawState:
    if spec.kind == SCHEDULE:
        return LawState(cpair=spec.program[0])
    if spec.kind == GRAMMAR_WALK:
        return LawState(cpair=spec.pairs, rng_words=new_words(spec.law_seed))
    return LawState(cpair=spec.pairs)


def step_law(spec: LawSpec, state: LawState) -> LawState:
    """Advance the law by one step.  Pure in (spec, state)."""
    n = state.macro_count + 1
    if spec.kind == IDENTITY_LAW:
        return LawState(state.cpair, state.program_counter, n, None)
    if spec.kind == SCHEDULE:
        pc = state.program_counter
        cpair = state.cpair
        if n % spec.period == 0:
            pc = (pc + 1) % len(spec.program)
            cpair = spec.program[pc]
        return LawState(cpair, pc, n, None)
    return _step_grammar_walk(spec, state, n)


# --- grammar walk ----------------------------------------------------------

MUT_SWAP_ADJACENT = 0
MUT_APPEND_UNARY = 1
MUT_SWAP_SIDES = 2
MUT_WRAP_HEADS = 3


def _step_grammar_walk(spec: LawSpec, state: LawState, n: int) -> LawState:
    gen = rng_from_words(state.rng_words)
    pairs = state.cpair.pairs
    weights = np.asarray(spec.mutation_weights, dtype=float)
    total = weights.sum()
    new_pairs = None
    for _ in range(MUTATION_ATTEMPTS):
        k = int(gen.integers(len(pairs)))
        r = gen.random() * total
        kind = int(np.searchsorted(np.cumsum(weights), r, side="right"))
        kind = min(kind, 3)
        cand = _mutate(gen, pairs[k], kind, spec.arities)
        if cand is None:
            continue
        left, right = cand
        if _parses(left, spec.arities) and _parses(right, spec.arities):
            new_pairs = pairs[:k] + ((left, right),) + pairs[k + 1 :]
            break
    words = rng_to_words(gen)
    if new_pairs is None:
        warnings.warn(
            f"goal rewrite stalled after {MUTATION_ATTEMPTS} attempts; "
            f"goals left unchanged",
            LawStallWarning,
            stacklevel=3,
        )
        return LawState(state.cpair, state.program_counter, n, words)
    return LawState(EquationPairList(new_pairs), state.program_counter, n, words)


def _parses(seq: IndexSequence, arities) -> bool:
    try:
        parse_sequence(seq, arities)
    except GrammarError:
        return False
    return True


def _mutate(gen, pair, kind, arities):
    """One mutation draw; None when the pick cannot apply to this pair."""
    left, right = pair
    if kind == MUT_SWAP_ADJACENT:
        side = int(gen.integers(2))
        seq = left if side == 0 else right
        if len(seq.items) < 2:
            return None
        j = int(gen.integers(len(seq.items) - 1))
        items = list(seq.items)
        items[j], items[j + 1] = items[j + 1], items[j]
        out = IndexSequence(tuple(items))
        return (out, right) if side == 0 else (left, out)
    if kind == MUT_APPEND_UNARY:
        unary = [i for i, a in enumerate(arities) if a == 1]
        if not unary:
            return None
        side = int(gen.integers(2))
        slot = unary[int(gen.integers(len(unary)))]
        seq = left if side == 0 else right
        out = IndexSequence(seq.items + (Index(slot),))
        return (out, right) if side == 0 else (left, out)
    if kind == MUT_SWAP_SIDES:
        return (right, left)
    binary = [i for i, a in enumerate(arities) if a == 2]
    if not binary or not left.items or not right.items:
        return None
    slot = binary[int(gen.integers(len(binary)))]
    head_l, rest_l = _split_head(left, arities)
    head_r, rest_r = _split_head(right, arities)
    tup_l = ArgTuple((IndexSequence(head_l), IndexSequence(head_r)))
    tup_r = ArgTuple((IndexSequence(head_r), IndexSequence(head_l)))
    new_l = IndexSequence((Index(slot), tup_l) + rest_l)
    new_r = IndexSequence((Index(slot), tup_r) + rest_r)
    return (new_l, new_r)


def _split_head(seq: IndexSequence, arities) -> tuple:
    # the head factor spans its bound tuple when the leading slot is binary
    first = seq.items[0]
    span = 1
    if (
        isinstance(first, Index)
        and 0 <= first.i < len(arities)
        and arities[first.i] == 2
    ):
        span = 2
    return seq.items[:span], seq.items[span:]
