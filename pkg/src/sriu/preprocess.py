"""Database reduction and construction of the 1x1 seed rules.

Candidate items of a rule X -> Y inside one occurrence (alpha, beta):

* left-eligible:  id > max(X), position < beta
* right-eligible: id > max(Y), position >= alpha, not in X

The right boundary is inclusive, so an item sitting in the same itemset as
the last antecedent item counts as a right candidate even though adding it
never yields an occurrence.  That only loosens the estimates; expansions are
re-validated when they are materialized.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import (QSequence, RuleOccurrence, SequenceDatabase, SequentialRule,
                    rule_support)


class SequenceIndex:
    """Items of one sequence sorted by id, with aligned positions and utilities."""

    __slots__ = ("sid", "ids", "pos", "util", "positions", "utilities", "max_item")

    def __init__(self, seq: QSequence, utilities: dict[int, float]):
        self.sid = seq.sid
        self.ids = sorted(seq.positions)
        self.pos = [seq.positions[i] for i in self.ids]
        self.util = [utilities[i] for i in self.ids]
        self.positions = seq.positions
        self.utilities = utilities
        self.max_item = self.ids[-1]


def index_sequences(db: SequenceDatabase) -> list[SequenceIndex]:
    return [SequenceIndex(seq, db.utilities[seq.sid]) for seq in db]


class Candidates(NamedTuple):
    left_only: list[int]
    both: list[int]
    right_only: list[int]


class ExpansionUtility(NamedTuple):
    """UL/ULR/UR utilities and the item counts behind them."""
    ul: float
    ulr: float
    ur: float
    n_left: int
    n_both: int
    n_right: int

    @property
    def il(self) -> int:
        return self.n_left + self.n_both

    @property
    def ir(self) -> int:
        return self.n_right + self.n_both

    @property
    def all_ul(self) -> float:
        return self.ul + self.ulr

    @property
    def all_ur(self) -> float:
        return self.ur + self.ulr

    @property
    def extend(self) -> float:
        return self.ul + self.ulr + self.ur

    @property
    def n_total(self) -> int:
        return self.n_left + self.n_both + self.n_right


NO_EXPANSION = ExpansionUtility(0, 0, 0, 0, 0, 0)


def expansion_candidates(rule: SequentialRule, occurrence: RuleOccurrence,
                         sequence: QSequence) -> Candidates:
    max_x, max_y = rule.antecedent[-1], rule.consequent[-1]
    _, alpha, beta = occurrence
    antecedent = set(rule.antecedent)
    left_only, both, right_only = [], [], []
    for item in sorted(sequence.positions):
        if item in antecedent or item in rule.consequent:
            continue
        p = sequence.positions[item]
        left = item > max_x and p < beta
        right = item > max_y and p >= alpha
        if left and right:
            both.append(item)
        elif left:
            left_only.append(item)
        elif right:
            right_only.append(item)
    return Candidates(left_only, both, right_only)


def expansion_utility(view: SequenceIndex, max_x: int, max_y: int, alpha: int, beta: int,
                      antecedent) -> ExpansionUtility:
    """Fast path of :func:`expansion_candidates` summed into utilities.

    ``antecedent`` is any container supporting ``in``; consequent items never
    qualify because their ids are <= max_y and positions >= beta.
    """
    ids, pos, util = view.ids, view.pos, view.util
    ul = ulr = ur = 0
    n_left = n_both = n_right = 0
    for k in range(bisect_right(ids, min(max_x, max_y)), len(ids)):
        item = ids[k]
        p = pos[k]
        left = item > max_x and p < beta
        right = item > max_y and p >= alpha and item not in antecedent
        if left:
            if right:
                ulr += util[k]
                n_both += 1
            else:
                ul += util[k]
                n_left += 1
        elif right:
            ur += util[k]
            n_right += 1
    if n_left + n_both + n_right == 0:
        return NO_EXPANSION
    return ExpansionUtility(ul, ulr, ur, n_left, n_both, n_right)


def compute_seu(db: SequenceDatabase) -> dict[int, float]:
    seu: dict[int, float] = defaultdict(int)
    for seq, su in zip(db, db.sequence_utilities):
        for item in seq.positions:
            seu[item] += su
    return dict(seu)


def rule_seu(rule: SequentialRule, db: SequenceDatabase) -> float:
    return sum(db.sequence_utilities[sid] for sid in rule_support(rule, db))


def _restrict(db: SequenceDatabase, keep: set[int]) -> SequenceDatabase:
    sequences = []
    for seq in db:
        itemsets = []
        for itemset in seq.itemsets:
            kept = tuple(q for q in itemset if q.item in keep)
            if kept:
                itemsets.append(kept)
        if itemsets:
            sequences.append(QSequence(len(sequences), tuple(itemsets)))
    return SequenceDatabase(sequences, db.external_utility, db.item_table, db.source_size)


def prune_unpromising(db: SequenceDatabase, min_util: float) -> tuple[SequenceDatabase, list[int]]:
    """Remove items with SEU < min_util until a fixpoint; returns (db, removed)."""
    removed: list[int] = []
    while True:
        seu = compute_seu(db)
        drop = {item for item, value in seu.items() if value < min_util}
        if not drop:
            return db, sorted(removed)
        removed.extend(drop)
        db = _restrict(db, set(seu) - drop)


class PairUtilityIndex:
    """SEU of sequences where item a occurs in an earlier itemset than item b."""

    def __init__(self, values: dict[tuple[int, int], float]):
        self.values = values

    def __len__(self):
        return len(self.values)

    def __contains__(self, pair):
        return pair in self.values

    def get(self, a: int, b: int) -> float:
        return self.values.get((a, b), 0)

    def prune(self, min_util: float) -> tuple[PairUtilityIndex, int]:
        kept = {pair: v for pair, v in self.values.items() if v >= min_util}
        return PairUtilityIndex(kept), len(self.values) - len(kept)


def _ordered_pairs(seq: QSequence):
    """All (a, b) with pos(a) < pos(b)."""
    earlier: list[int] = []
    for itemset in seq.itemsets:
        items = [q.item for q in itemset]
        for b in items:
            for a in earlier:
                yield a, b
        earlier.extend(items)


def scan_pairs(db: SequenceDatabase):
    """One pass building the pair index and the support list of each 1x1 rule."""
    values: dict[tuple[int, int], float] = defaultdict(int)
    support: dict[tuple[int, int], list[int]] = defaultdict(list)
    for seq, su in zip(db, db.sequence_utilities):
        for pair in _ordered_pairs(seq):
            values[pair] += su
            support[pair].append(seq.sid)
    return PairUtilityIndex(dict(values)), dict(support)


def build_ipeum(db: SequenceDatabase) -> PairUtilityIndex:
    return scan_pairs(db)[0]


def ipeum_prune(index: PairUtilityIndex, min_util: float) -> tuple[PairUtilityIndex, int]:
    return index.prune(min_util)


def build_maxis(db: SequenceDatabase) -> dict[int, int]:
    return {seq.sid: max(seq.positions) for seq in db}


@dataclass(frozen=True)
class TempElement:
    sid: int
    utility: float
    eu: ExpansionUtility
    positions: tuple[int, int]
    e: int

    @property
    def items(self) -> tuple[int, int]:
        return self.eu.il, self.eu.ir

    @property
    def estimated(self) -> float:
        return self.utility + self.eu.extend


@dataclass
class TempTable:
    rule: SequentialRule
    elements: list[TempElement] = field(default_factory=list)

    @property
    def tu(self) -> float:
        return sum(el.utility for el in self.elements)

    @property
    def sum_eu(self) -> float:
        return sum(el.estimated for el in self.elements)

    @property
    def e_index(self) -> int:
        return sum(el.e for el in self.elements)

    @property
    def sids(self) -> list[int]:
        return [el.sid for el in self.elements]

    @property
    def mode(self) -> str:
        return expansion_mode(self.e_index)


def average_utilities(eu: ExpansionUtility) -> tuple[float, float]:
    """(AvgULeft, AvgURight); a side without candidates averages to -inf."""
    left = (eu.ul + eu.ulr) / eu.il if eu.il else -math.inf
    right = (eu.ur + eu.ulr) / eu.ir if eu.ir else -math.inf
    return left, right


def element_e(eu: ExpansionUtility) -> int:
    left, right = average_utilities(eu)
    return 1 if left >= right else -1


def compute_e_index(table: TempTable) -> int:
    return table.e_index


def expansion_mode(e_index: int) -> str:
    """'rl' (right-left) when the vote is >= 0, else 'lr' (left-right)."""
    return "rl" if e_index >= 0 else "lr"


def build_temp_table(rule: SequentialRule, sids, views: list[SequenceIndex]) -> TempTable:
    (x,), (y,) = rule.antecedent, rule.consequent
    table = TempTable(rule)
    members = (x,)
    for sid in sids:
        view = views[sid]
        alpha, beta = view.positions[x], view.positions[y]
        eu = expansion_utility(view, x, y, alpha, beta, members)
        utility = view.utilities[x] + view.utilities[y]
        table.elements.append(TempElement(sid, utility, eu, (alpha, beta), element_e(eu)))
    return table


@dataclass
class SeedRules:
    seeds: list[tuple[SequentialRule, TempTable]]
    discarded: int


def generate_seed_rules(db: SequenceDatabase, min_util: float, views=None,
                        pair_support=None) -> SeedRules:
    """All 1x1 rules with SEU(r) >= min_util, with populated TempTables."""
    if views is None:
        views = index_sequences(db)
    if pair_support is None:
        _, pair_support = scan_pairs(db)
    su = db.sequence_utilities
    seeds = []
    discarded = 0
    for (x, y) in sorted(pair_support):
        sids = pair_support[(x, y)]
        if sum(su[s] for s in sids) < min_util:
            discarded += 1
            continue
        rule = SequentialRule((x,), (y,))
        seeds.append((rule, build_temp_table(rule, sids, views)))
    return SeedRules(seeds, discarded)
