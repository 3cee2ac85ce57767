"""Partition calculus: canonical partitions, coarsening moves, the coarser preorder and Xi-sets.

A partition here is a set of disjoint non-empty blocks of party labels whose
union may be a strict subset of the layout. Coarsening moves are:

* ``a`` discard a block,
* ``b`` merge two blocks,
* ``c`` drop one party from a block that holds at least two.

``is_coarser`` is the reflexive-transitive closure of these moves, computed by
breadth-first search over canonical forms.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from config_loader import max_partition_labels

MOVE_KINDS = ("a", "b", "c")


class PartitionError(ValueError):
    """Raised for malformed partitions, invalid moves or unmet preconditions."""


def _canonical(blocks: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    normalized = []
    seen: set[str] = set()
    for block in blocks:
        members = tuple(sorted(block))
        if not members:
            raise PartitionError("partition blocks must be non-empty")
        for label in members:
            if label in seen:
                raise PartitionError(f"label {label!r} appears more than once")
            seen.add(label)
        normalized.append(members)
    return tuple(sorted(normalized, key=lambda block: block[0]))


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", _canonical(self.blocks))
        if not self.blocks:
            raise PartitionError("a partition needs at least one block")

    @classmethod
    def of(cls, *blocks: Iterable[str]) -> "Partition":
        return cls(tuple(tuple(block) for block in blocks))

    @classmethod
    def singletons(cls, labels: Iterable[str]) -> "Partition":
        return cls(tuple((label,) for label in labels))

    @classmethod
    def parse(cls, text: str, labels: Optional[Sequence[str]] = None) -> "Partition":
        """Parse ``"AB|CD|E"``; multi-character labels need ``labels`` to tokenise."""

        if not text or not text.strip():
            raise PartitionError("empty partition text")
        vocabulary = sorted(labels or (), key=len, reverse=True)
        blocks = []
        for chunk in text.strip().split("|"):
            chunk = chunk.strip()
            if not chunk:
                raise PartitionError(f"empty block in {text!r}")
            blocks.append(_tokenise(chunk, vocabulary))
        partition = cls(tuple(blocks))
        if labels is not None:
            unknown = partition.parties.difference(labels)
            if unknown:
                raise PartitionError(f"unknown labels {sorted(unknown)} in {text!r}")
        return partition

    @property
    def parties(self) -> frozenset[str]:
        return frozenset(label for block in self.blocks for label in block)

    @property
    def block_sets(self) -> tuple[frozenset[str], ...]:
        return tuple(frozenset(block) for block in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "|".join("".join(block) for block in self.blocks)


def _tokenise(chunk: str, vocabulary: Sequence[str]) -> tuple[str, ...]:
    if not vocabulary or all(len(label) == 1 for label in vocabulary):
        return tuple(chunk)
    tokens = []
    pos = 0
    while pos < len(chunk):
        for label in vocabulary:
            if chunk.startswith(label, pos):
                tokens.append(label)
                pos += len(label)
                break
        else:
            raise PartitionError(f"cannot tokenise {chunk!r} at position {pos}")
    return tuple(tokens)


@dataclass(frozen=True)
class CoarseningMove:
    kind: str
    blocks: tuple[int, ...]
    party: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in MOVE_KINDS:
            raise PartitionError(f"unknown move kind {self.kind!r}")
        expected = 2 if self.kind == "b" else 1
        if len(self.blocks) != expected:
            raise PartitionError(f"move {self.kind} takes {expected} block operand(s), got {self.blocks}")
        if (self.kind == "c") != (self.party is not None):
            raise PartitionError("only type-c moves name a party")

    def describe(self, source: Partition) -> str:
        names = ["".join(source.blocks[i]) for i in self.blocks if 0 <= i < len(source)]
        if self.kind == "a":
            return f"discard {names[0]}"
        if self.kind == "b":
            return f"merge {names[0]}+{names[1]}"
        return f"drop {self.party} from {names[0]}"


def apply_move(p: Partition, move: CoarseningMove) -> Partition:
    blocks = list(p.blocks)
    for index in move.blocks:
        if not 0 <= index < len(blocks):
            raise PartitionError(f"block index {index} out of range for {p}")
    if move.kind == "a":
        if len(blocks) == 1:
            raise PartitionError(f"cannot discard the only block of {p}")
        del blocks[move.blocks[0]]
    elif move.kind == "b":
        i, j = move.blocks
        if i == j:
            raise PartitionError("merge needs two distinct blocks")
        merged = blocks[i] + blocks[j]
        blocks = [block for k, block in enumerate(blocks) if k not in (i, j)] + [merged]
    else:
        i = move.blocks[0]
        host = blocks[i]
        if len(host) < 2:
            raise PartitionError(f"type-c move needs a block with at least two parties, got {''.join(host)}")
        if move.party not in host:
            raise PartitionError(f"party {move.party!r} is not in block {''.join(host)}")
        blocks[i] = tuple(label for label in host if label != move.party)
    return Partition(tuple(blocks))


def single_moves(p: Partition, kinds: str = "abc") -> Iterator[tuple[CoarseningMove, Partition]]:
    k = len(p)
    if "a" in kinds and k > 1:
        for i in range(k):
            move = CoarseningMove("a", (i,))
            yield move, apply_move(p, move)
    if "b" in kinds:
        for i, j in itertools.combinations(range(k), 2):
            move = CoarseningMove("b", (i, j))
            yield move, apply_move(p, move)
    if "c" in kinds:
        for i, block in enumerate(p.blocks):
            if len(block) < 2:
                continue
            for label in block:
                move = CoarseningMove("c", (i,), label)
                yield move, apply_move(p, move)


@lru_cache(maxsize=4096)
def coarser_partitions(p: Partition, kinds: str = "abc") -> frozenset[Partition]:
    """Every partition reachable from ``p`` with the given move kinds, ``p`` included."""

    seen = {p}
    queue = deque([p])
    while queue:
        current = queue.popleft()
        for _, nxt in single_moves(current, kinds):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


@dataclass(frozen=True)
class Coarsening:
    reachable: bool
    moves: tuple[CoarseningMove, ...] = ()
    path: tuple[Partition, ...] = ()

    def __bool__(self) -> bool:
        return self.reachable

    def describe(self) -> list[str]:
        return [move.describe(src) for move, src in zip(self.moves, self.path)]


def is_coarser(p: Partition, r: Partition) -> Coarsening:
    """True (with one witness move sequence) iff ``r`` is reachable from ``p``."""

    if p == r:
        return Coarsening(True, (), (p,))
    if not r.parties <= p.parties or len(r) > len(p):
        return Coarsening(False)
    parents: dict[Partition, Optional[tuple[Partition, CoarseningMove]]] = {p: None}
    queue = deque([p])
    while queue:
        current = queue.popleft()
        for move, nxt in single_moves(current):
            if nxt in parents:
                continue
            parents[nxt] = (current, move)
            if nxt == r:
                moves: list[CoarseningMove] = []
                path: list[Partition] = [r]
                node = r
                while parents[node] is not None:
                    prev, step = parents[node]  # type: ignore[misc]
                    moves.append(step)
                    path.append(prev)
                    node = prev
                return Coarsening(True, tuple(reversed(moves)), tuple(reversed(path)))
            queue.append(nxt)
    return Coarsening(False)


def is_discard_coarsening(p: Partition, r: Partition) -> bool:
    """p >a r: every block of r is a block of p."""

    return set(r.block_sets) <= set(p.block_sets)


def is_merge_coarsening(p: Partition, r: Partition) -> bool:
    """p >b r: same parties, every block of p sits inside a block of r, and r != p."""

    if p == r or p.parties != r.parties:
        return False
    return all(any(block <= target for target in r.block_sets) for block in p.block_sets)


def xi_set(p: Partition, r: Partition) -> frozenset[Partition]:
    """Partitions on which the measure must vanish once J(p) = J(r).

    Candidates are reached from ``p`` by discards and party drops (never merges)
    and keep at least two blocks. For p >a r a candidate may touch r's parties
    with at most one block; for p >b r all of its blocks must lie inside a
    single block of r.
    """

    candidates = coarser_partitions(p, "ac")
    if is_discard_coarsening(p, r):
        inside = r.parties
        return frozenset(
            t
            for t in candidates
            if len(t) >= 2 and sum(1 for block in t.block_sets if block & inside) <= 1
        )
    if is_merge_coarsening(p, r):
        return frozenset(
            t
            for t in candidates
            if len(t) >= 2
            and any(all(block <= target for block in t.block_sets) for target in r.block_sets)
        )
    raise PartitionError(f"xi_set needs {p} >a {r} or {p} >b {r}")


def _set_partitions(items: Sequence[str]) -> Iterator[list[tuple[str, ...]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1 :]


def all_partitions(labels: Iterable[str], max_parties: Optional[int] = None) -> frozenset[Partition]:
    """All partitions of all non-empty subsets of ``labels``."""

    items = sorted(set(labels))
    limit = max_parties if max_parties is not None else max_partition_labels()
    if len(items) > limit:
        raise PartitionError(f"{len(items)} labels exceed the partition guard of {limit}")
    result = set()
    for size in range(1, len(items) + 1):
        for subset in itertools.combinations(items, size):
            for blocks in _set_partitions(subset):
                result.add(Partition(tuple(blocks)))
    return frozenset(result)


@dataclass(frozen=True)
class CoarseningPairs:
    """Finer/coarser pairs among partitions with at least two blocks.

    ``closure`` holds (finer, coarser, needs_c) for every strictly coarser
    partition; ``needs_c`` is set when no chain of discards and merges gets
    there. ``steps`` holds (finer, coarser, kind) for every single move.
    """

    closure: tuple[tuple[Partition, Partition, bool], ...]
    steps: tuple[tuple[Partition, Partition, str], ...]


@lru_cache(maxsize=16)
def coarsening_pairs(labels: tuple[str, ...]) -> CoarseningPairs:
    closure = []
    steps = []
    partitions = sorted((p for p in all_partitions(labels) if len(p) >= 2), key=str)
    for p in partitions:
        ab = coarser_partitions(p, "ab")
        for r in sorted(coarser_partitions(p, "abc"), key=str):
            if r != p and len(r) >= 2:
                closure.append((p, r, r not in ab))
        for move, r in single_moves(p):
            if len(r) >= 2:
                steps.append((p, r, move.kind))
    return CoarseningPairs(tuple(closure), tuple(steps))


__all__ = [
    "Coarsening",
    "CoarseningMove",
    "CoarseningPairs",
    "MOVE_KINDS",
    "Partition",
    "PartitionError",
    "all_partitions",
    "apply_move",
    "coarsening_pairs",
    "coarser_partitions",
    "is_coarser",
    "is_discard_coarsening",
    "is_merge_coarsening",
    "single_moves",
    "xi_set",
]
