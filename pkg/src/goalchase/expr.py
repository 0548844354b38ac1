"""Index sequences and the expression trees they compile to.

A sequence of slot indices denotes a chain of per-slot maps read left to
right, composing with the leftmost factor outermost.  An arity-2 index
must be followed immediately by a 2-tuple holding the sequences that
produce its arguments; those arguments consume the value flowing into the
factor (the probe itself at chain tail).  The empty sequence denotes the
identity map.

Text form: ``[1,2]`` composes slot 1 after slot 2, ``[0,(1,2)]`` applies
slot 0 to the outputs of slots 1 and 2, ``[]`` is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bridge import BridgeFamily, eval_bridge, grad_bridge

__all__ = [
    "GrammarError",
    "ArityError",
    "Index",
    "ArgTuple",
    "IndexSequence",
    "Identity",
    "Apply",
    "Compose",
    "IDENTITY",
    "EquationPairList",
    "seq_from_text",
    "seq_to_text",
    "parse_sequence",
    "eval_expr",
    "grad_expr",
    "node_count",
]


class GrammarError(ValueError):
    """An index sequence violates the chain grammar."""


class ArityError(GrammarError):
    """A tuple is missing, misplaced, or of the wrong size for its slot."""


# --- sequence data ---------------------------------------------------------


@dataclass(frozen=True)
class Index:
    i: int


@dataclass(frozen=True)
class ArgTuple:
    children: tuple["IndexSequence", ...]


@dataclass(frozen=True)
class IndexSequence:
    """Ordered items, each an Index or an ArgTuple of sub-sequences."""

    items: tuple = ()


# --- expression trees ------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class Apply:
    slot: int
    children: tuple = ()


@dataclass(frozen=True)
class Compose:
    outer: object
    inner: object


IDENTITY = Identity()


# --- text serialization ----------------------------------------------------


def seq_to_text(seq: IndexSequence) -> str:
    return "[" + ",".join(_item_to_text(it) for it in seq.items) + "]"


def _item_to_text(item) -> str:
    if isinstance(item, Index):
        return str(item.i)
    parts = []
    for child in item.children:
        if len(child.items) == 1 and isinstance(child.items[0], Index):
            parts.append(str(child.items[0].i))
        else:
            parts.append(seq_to_text(child))
    return "(" + ",".join(parts) + ")"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise GrammarError(
                f"expected {ch!r} at position {self.pos} in {self.text!r}"
            )
        self.pos += 1

    def take_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise GrammarError(
                f"expected slot index at position {start} in {self.text!r}"
            )
        return int(self.text[start : self.pos])


def seq_from_text(text: str) -> IndexSequence:
    """Parse the bracketed text form back into an IndexSequence."""
    sc = _Scanner(text)
    seq = _scan_sequence(sc)
    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise GrammarError(f"trailing input at position {sc.pos} in {text!r}")
    return seq


def _scan_sequence(sc: _Scanner) -> IndexSequence:
    sc.take("[")
    items = []
    if sc.peek() == "]":
        sc.take("]")
        return IndexSequence(())
    while True:
        ch = sc.peek()
        if ch == "(":
            items.append(_scan_tuple(sc))
        else:
            items.append(Index(sc.take_int()))
        if sc.peek() == ",":
            sc.take(",")
            continue
        sc.take("]")
        return IndexSequence(tuple(items))


def _scan_tuple(sc: _Scanner) -> ArgTuple:
    sc.take("(")
    children = []
    while True:
        ch = sc.peek()
        if ch == "[":
            children.append(_scan_sequence(sc))
        else:
            children.append(IndexSequence((Index(sc.take_int()),)))
        if sc.peek() == ",":
            sc.take(",")
            continue
        sc.take(")")
        return ArgTuple(tuple(children))


# --- grammar ---------------------------------------------------------------


def parse_sequence(seq: IndexSequence, arities) -> object:
    """Compile an IndexSequence into an expression tree.

    `arities` maps slot index to declared arity.  Factors are read left to
    right and chained by composition, leftmost outermost; an arity-2 index
    binds the 2-tuple that follows it, and each tuple entry is parsed as a
    full sub-sequence.
    """
    factors = []
    items = seq.items
    k = 0
    while k < len(items):
        item = items[k]
        if isinstance(item, ArgTuple):
            raise GrammarError(
                f"tuple at position {k} has no preceding arity-2 slot"
            )
        i = item.i
        if not 0 <= i < len(arities):
            raise GrammarError(
                f"slot index {i} out of range for {len(arities)} slot(s)"
            )
        arity = arities[i]
        if arity == 1:
            factors.append(Apply(i, (IDENTITY,)))
            k += 1
            continue
        if k + 1 >= len(items) or not isinstance(items[k + 1], ArgTuple):
            raise ArityError(
                f"arity-{arity} slot {i} at position {k} must be followed "
                f"by a {arity}-tuple"
            )
        tup = items[k + 1]
        if len(tup.children) != arity:
            raise ArityError(
                f"slot {i} takes {arity} arguments, tuple has "
                f"{len(tup.children)}"
            )
        kids = tuple(parse_sequence(c, arities) for c in tup.children)
        factors.append(Apply(i, kids))
        k += 2
    if not factors:
        return IDENTITY
    tree = factors[-1]
    for f in reversed(factors[:-1]):
        tree = Compose(f, tree)
    return tree


# --- evaluation and gradients ----------------------------------------------


def eval_expr(tree, families, slots, d, *, counter=None) -> np.ndarray:
    """Evaluate a tree at probe `d` given per-slot families and parameters.

    Reads nothing beyond (tree, families, slots, d).  Inside a Compose the
    inner value becomes the probe seen by the outer subtree, so closed
    arguments of a mid-chain factor consume the value flowing in from the
    right.  `counter`, when given, is a one-element list incremented once
    per visited node.
    """
    if counter is not None:
        counter[0] += 1
    if isinstance(tree, Identity):
        return np.asarray(d, dtype=float)
    if isinstance(tree, Apply):
        args = [
            eval_expr(c, families, slots, d, counter=counter)
            for c in tree.children
        ]
        return eval_bridge(families[tree.slot], slots[tree.slot], args)
    inner = eval_expr(tree.inner, families, slots, d, counter=counter)
    return eval_expr(tree.outer, families, slots, inner, counter=counter)


def grad_expr(tree, families, slots, d, cotangent) -> list[np.ndarray]:
    """Per-slot gradients of `cotangent . eval_expr` as a list over slots.

    Repeated occurrences of a slot accumulate; slots absent from the tree
    get exact zeros.
    """
    grads = [np.zeros_like(np.asarray(s, dtype=float)) for s in slots]
    _vjp(tree, families, slots, np.asarray(d, dtype=float),
         np.asarray(cotangent, dtype=float), grads)
    return grads


def _vjp(tree, families, slots, d, cot, grads) -> np.ndarray:
    # returns gradient with respect to the incoming value d
    if isinstance(tree, Identity):
        return cot
    if isinstance(tree, Apply):
        args = [eval_expr(c, families, slots, d) for c in tree.children]
        gp, gargs = grad_bridge(families[tree.slot], slots[tree.slot], args, cot)
        grads[tree.slot] += gp
        dd = np.zeros_like(d)
        for child, ga in zip(tree.children, gargs):
            dd += _vjp(child, families, slots, d, ga, grads)
        return dd
    inner_val = eval_expr(tree.inner, families, slots, d)
    d_inner = _vjp(tree.outer, families, slots, inner_val, cot, grads)
    return _vjp(tree.inner, families, slots, d, d_inner, grads)


def node_count(tree) -> int:
    if isinstance(tree, Identity):
        return 1
    if isinstance(tree, Apply):
        return 1 + sum(node_count(c) for c in tree.children)
    return 1 + node_count(tree.outer) + node_count(tree.inner)


# --- equation pairs --------------------------------------------------------


@dataclass(frozen=True)
class EquationPairList:
    """Goal equations: each pair demands left side == right side pointwise."""

    pairs: tuple = ()

    def to_json(self) -> list:
        return [[seq_to_text(l), seq_to_text(r)] for l, r in self.pairs]

    @classmethod
    def from_json(cls, obj) -> "EquationPairList":
        pairs = []
        for entry in obj:
            if len(entry) != 2:
                raise GrammarError(
                    f"equation pair needs exactly 2 sides, got {len(entry)}"
                )
            left, right = entry
            pairs.append((seq_from_text(left), seq_from_text(right)))
        return cls(tuple(pairs))

    def compile(self, arities) -> list:
        return [
            (parse_sequence(l, arities), parse_sequence(r, arities))
            for l, r in self.pairs
        ]
