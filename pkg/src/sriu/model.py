"""Q-sequence databases and partially-ordered sequential rules.

Items are dense integers whose order matches the order of their labels, so
"lexicographically larger" is plain integer comparison everywhere else in
the package.  Positions are 1-based itemset indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

INF = math.inf


class QItem(NamedTuple):
    item: int
    quantity: int


@dataclass(frozen=True)
class Item:
    id: int
    label: str


@dataclass(frozen=True)
class QSequence:
    sid: int
    itemsets: tuple[tuple[QItem, ...], ...]
    positions: dict[int, int] = field(init=False, repr=False, compare=False)
    quantities: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        positions = {}
        quantities = {}
        for index, itemset in enumerate(self.itemsets, start=1):
            if not itemset:
                raise ValueError(f"sequence {self.sid}: empty itemset at position {index}")
            previous = -1
            for qitem in itemset:
                if qitem.item <= previous:
                    raise ValueError(f"sequence {self.sid}: itemset {index} is not strictly increasing")
                if qitem.item in positions:
                    raise ValueError(f"sequence {self.sid}: duplicate item in sequence")
                if qitem.quantity < 1:
                    raise ValueError(f"sequence {self.sid}: quantity must be >= 1")
                previous = qitem.item
                positions[qitem.item] = index
                quantities[qitem.item] = qitem.quantity
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "quantities", quantities)

    def __contains__(self, item: int) -> bool:
        return item in self.positions

    def __len__(self) -> int:
        return len(self.itemsets)

    def items(self) -> list[int]:
        return sorted(self.positions)


class ItemTable:
    """Bidirectional label <-> dense id mapping."""

    def __init__(self, labels: Iterable[str]):
        self.labels: tuple[str, ...] = tuple(labels)
        self.ids = {label: i for i, label in enumerate(self.labels)}
        if len(self.ids) != len(self.labels):
            raise ValueError("duplicate labels in item table")

    def __len__(self):
        return len(self.labels)

    def id_of(self, label: str) -> int:
        return self.ids[label]

    def label_of(self, item: int) -> str:
        return self.labels[item]

    def item(self, label: str) -> Item:
        return Item(self.ids[label], label)


class SequenceDatabase:
    """Immutable store of q-sequences with per-item external utilities.

    ``source_size`` is the number of sequences of the database this one was
    derived from (it differs from ``len(db)`` only after empty sequences
    have been dropped by pruning) and is the denominator for P(Y).
    """

    def __init__(self, sequences: Sequence[QSequence], external_utility: Sequence[float],
                 item_table: ItemTable, source_size: int | None = None):
        self.sequences: tuple[QSequence, ...] = tuple(sequences)
        self.external_utility: tuple[float, ...] = tuple(external_utility)
        self.item_table = item_table
        self.source_size = len(self.sequences) if source_size is None else source_size
        if len(self.external_utility) != len(item_table):
            raise ValueError("external utility table does not cover the item table")
        for expected, seq in enumerate(self.sequences):
            if seq.sid != expected:
                raise ValueError(f"sids must be consecutive from 0; got {seq.sid} at {expected}")
            for item in seq.positions:
                if item >= len(self.external_utility):
                    raise ValueError(f"sequence {seq.sid}: item {item} has no external utility")
        for value in self.external_utility:
            if value < 0:
                raise ValueError("external utilities must be non-negative")

        eu = self.external_utility
        self.utilities: tuple[dict[int, float], ...] = tuple(
            {i: q * eu[i] for i, q in seq.quantities.items()} for seq in self.sequences)
        self.sequence_utilities: tuple[float, ...] = tuple(sum(u.values()) for u in self.utilities)

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __getitem__(self, sid: int) -> QSequence:
        return self.sequences[sid]

    def items(self) -> list[int]:
        """Items occurring in at least one sequence."""
        present = set()
        for seq in self.sequences:
            present.update(seq.positions)
        return sorted(present)

    def label(self, item: int) -> str:
        return self.item_table.label_of(item)

    def labels(self, items: Iterable[int]) -> list[str]:
        return [self.item_table.label_of(i) for i in items]

    def ids(self, labels: Iterable[str]) -> tuple[int, ...]:
        return tuple(sorted(self.item_table.id_of(label) for label in labels))

    def rule(self, antecedent: Iterable[str], consequent: Iterable[str]) -> SequentialRule:
        """Build a rule from item labels."""
        return SequentialRule(self.ids(antecedent), self.ids(consequent))

    def total_utility(self) -> float:
        return sum(self.sequence_utilities)


@dataclass(frozen=True, order=True)
class SequentialRule:
    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise ValueError("antecedent and consequent must be non-empty")
        if any(a >= b for a, b in zip(self.antecedent, self.antecedent[1:])) or any(
                a >= b for a, b in zip(self.consequent, self.consequent[1:])):
            raise ValueError("rule sides must be strictly increasing item tuples")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("antecedent and consequent must be disjoint")

    @property
    def size(self) -> tuple[int, int]:
        return len(self.antecedent), len(self.consequent)

    @property
    def items(self) -> tuple[int, ...]:
        return self.antecedent + self.consequent

    def sort_key(self):
        return (len(self.antecedent) * len(self.consequent), self.antecedent, self.consequent)

    def expand_left(self, item: int) -> SequentialRule:
        return SequentialRule(tuple(sorted(self.antecedent + (item,))), self.consequent)

    def expand_right(self, item: int) -> SequentialRule:
        return SequentialRule(self.antecedent, tuple(sorted(self.consequent + (item,))))

    def format(self, db: SequenceDatabase) -> str:
        return "{%s} -> {%s}" % (",".join(db.labels(self.antecedent)),
                                 ",".join(db.labels(self.consequent)))


class RuleOccurrence(NamedTuple):
    sid: int
    alpha: int
    beta: int


def item_utility(item: int, sequence: QSequence, db: SequenceDatabase) -> float:
    """q(i, s) * eu(i); raises KeyError when the item is not in the sequence."""
    if item not in sequence.positions:
        raise KeyError(f"item {item} does not occur in sequence {sequence.sid}")
    return sequence.quantities[item] * db.external_utility[item]


def sequence_utility(sequence: QSequence, db: SequenceDatabase) -> float:
    eu = db.external_utility
    return sum(q * eu[i] for i, q in sequence.quantities.items())


def rule_occurs(rule: SequentialRule, sequence: QSequence) -> RuleOccurrence | None:
    positions = sequence.positions
    try:
        alpha = max(positions[i] for i in rule.antecedent)
        beta = min(positions[i] for i in rule.consequent)
    except KeyError:
        return None
    if alpha < beta:
        return RuleOccurrence(sequence.sid, alpha, beta)
    return None


def rule_support(rule: SequentialRule, db: SequenceDatabase) -> list[int]:
    return [seq.sid for seq in db if rule_occurs(rule, seq) is not None]


def rule_utility(rule: SequentialRule, db: SequenceDatabase) -> float:
    total = 0
    for sid in rule_support(rule, db):
        utilities = db.utilities[sid]
        total += sum(utilities[i] for i in rule.items)
    return total


def itemset_support(items: Iterable[int], db: SequenceDatabase) -> list[int]:
    """Sequences containing every item, at any positions."""
    items = tuple(items)
    return [seq.sid for seq in db if all(i in seq.positions for i in items)]


def itemset_utility(items: Iterable[int], db: SequenceDatabase) -> float:
    """Utility of an itemset, counted where all its items share one itemset."""
    items = set(items)
    total = 0
    for seq in db:
        for itemset in seq.itemsets:
            if items <= {q.item for q in itemset}:
                total += sum(db.utilities[seq.sid][i] for i in items)
                break
    return total


def total_item_utility(item: int, db: SequenceDatabase) -> float:
    return sum(u[item] for u in db.utilities if item in u)


def confidence_from_counts(rule_count: int, antecedent_count: int) -> float:
    if antecedent_count == 0:
        return 0.0
    return rule_count / antecedent_count


def conviction_from_counts(rule_count: int, antecedent_count: int, consequent_count: int,
                           size: int) -> float:
    """(1 - P(Y)) / (1 - conf); +inf when conf is 1 and P(Y) < 1, 1 for 0/0."""
    conf = confidence_from_counts(rule_count, antecedent_count)
    p_y = consequent_count / size if size else 0.0
    if rule_count == antecedent_count and antecedent_count > 0:
        return 1.0 if consequent_count == size else INF
    return (1.0 - p_y) / (1.0 - conf)


def rule_confidence(rule: SequentialRule, db: SequenceDatabase) -> float:
    return confidence_from_counts(len(rule_support(rule, db)),
                                  len(itemset_support(rule.antecedent, db)))


def rule_conviction(rule: SequentialRule, db: SequenceDatabase) -> float:
    return conviction_from_counts(len(rule_support(rule, db)),
                                  len(itemset_support(rule.antecedent, db)),
                                  len(itemset_support(rule.consequent, db)),
                                  db.source_size)
