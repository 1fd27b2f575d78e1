"""Brute-force reference results for small databases.

Nothing here uses the engine's tables or pruning: rules are enumerated
structurally and every metric is recomputed by scanning the sequences.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from . import formats
from .model import (SequenceDatabase, SequentialRule, rule_confidence, rule_occurs, rule_support,
                    rule_utility)
from .preprocess import expansion_candidates, expansion_utility, index_sequences, scan_pairs
from .tables import eule, eure, leeu, reeu
from .preprocess import ExpansionUtility


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_sequences: int = 8
    max_distinct_items: int = 7
    max_items_per_side: int = 7

    def check(self, db: SequenceDatabase):
        if len(db) > self.max_sequences:
            raise OracleLimitError(f"{len(db)} sequences exceeds limit {self.max_sequences}")
        n_items = len(db.items())
        if n_items > self.max_distinct_items:
            raise OracleLimitError(f"{n_items} items exceeds limit {self.max_distinct_items}")


class RuleStats(NamedTuple):
    rule: SequentialRule
    utility: float
    confidence: float
    support: int


def enumerate_all_rules(db: SequenceDatabase, limits: OracleLimits = OracleLimits()) -> list[RuleStats]:
    """Every disjoint (X, Y) over occurring items with non-empty support."""
    limits.check(db)
    items = db.items()
    cap = limits.max_items_per_side
    found = []
    # 0 = absent, 1 = antecedent, 2 = consequent
    for assignment in itertools.product((0, 1, 2), repeat=len(items)):
        x = tuple(i for i, a in zip(items, assignment) if a == 1)
        y = tuple(i for i, a in zip(items, assignment) if a == 2)
        if not x or not y or len(x) > cap or len(y) > cap:
            continue
        rule = SequentialRule(x, y)
        support = rule_support(rule, db)
        if support:
            found.append(RuleStats(rule, rule_utility(rule, db), rule_confidence(rule, db),
                                   len(support)))
    found.sort(key=lambda s: s.rule.sort_key())
    return found


def _subsets(items):
    for size in range(1, len(items) + 1):
        yield from itertools.combinations(items, size)


def enumerate_rules_by_split(db: SequenceDatabase, limits: OracleLimits = OracleLimits()) -> set[SequentialRule]:
    """Second enumerator: union over sequences and cut points of prefix x suffix subsets."""
    limits.check(db)
    cap = limits.max_items_per_side
    rules = set()
    for seq in db:
        for cut in range(1, len(seq)):
            prefix = sorted(q.item for itemset in seq.itemsets[:cut] for q in itemset)
            suffix = sorted(q.item for itemset in seq.itemsets[cut:] for q in itemset)
            for x in _subsets(prefix):
                if len(x) > cap:
                    break
                for y in _subsets(suffix):
                    if len(y) > cap:
                        break
                    rules.add(SequentialRule(x, y))
    return rules


def brute_force_husr(db: SequenceDatabase, min_util: float, min_conf: float,
                     limits: OracleLimits = OracleLimits()) -> set[SequentialRule]:
    return {s.rule for s in enumerate_all_rules(db, limits)
            if s.utility >= min_util and s.confidence >= min_conf}


def _rise(parent_utility, min_ratio, semantics):
    if semantics == "none":
        return 0
    if semantics == "growth":
        return parent_utility * (1 + min_ratio)
    if semantics == "literal":
        return parent_utility * min_ratio
    raise ValueError(f"unknown ratio semantics {semantics!r}")


def _children(node, phase, convention, items):
    x, y = node.antecedent, node.consequent
    left = [(SequentialRule(x + (i,), y), "l") for i in items if i > x[-1] and i not in y]
    right = [(SequentialRule(x, y + (j,)), "r") for j in items if j > y[-1] and j not in x]
    if convention == "lr":
        return [(r, k, "double") for r, k in left] + [(r, k, "single") for r, k in right] \
            if phase == "double" else [(r, k, "single") for r, k in right]
    return [(r, k, "double") for r, k in right] + [(r, k, "single") for r, k in left] \
        if phase == "double" else [(r, k, "single") for r, k in left]


def brute_force_ratio_set(db: SequenceDatabase, min_util: float, min_conf: float,
                          min_ratio: float = 0.0, mode: str = "lr",
                          ratio_semantics: str = "growth",
                          seed_modes: dict[SequentialRule, str] | None = None,
                          limits: OracleLimits = OracleLimits(),
                          stats: dict[SequentialRule, RuleStats] | None = None) -> set[SequentialRule]:
    """Walk the whole expansion forest and keep rules whose path never
    misses the rise threshold and that meet both thresholds themselves.

    ``mode`` is "lr", "rl" or "auto"; in auto mode each seed's convention is
    read from ``seed_modes`` (seeds without an entry use "lr").
    ``ratio_semantics`` is "growth", "literal" or "none".
    """
    if stats is None:
        stats = {s.rule: s for s in enumerate_all_rules(db, limits)}
    items = db.items()
    emitted = set()
    for seed in [r for r in stats if len(r.antecedent) == 1 and len(r.consequent) == 1]:
        if mode == "auto":
            convention = (seed_modes or {}).get(seed, "lr")
        else:
            convention = mode
        s = stats[seed]
        if s.utility >= min_util and s.confidence >= min_conf:
            emitted.add(seed)
        stack = [(seed, "double")]
        while stack:
            node, phase = stack.pop()
            parent = stats[node]
            floor = _rise(parent.utility, min_ratio, ratio_semantics)
            for child, _, child_phase in _children(node, phase, convention, items):
                c = stats.get(child)
                if c is None or c.utility < floor:
                    continue
                if c.utility >= min_util and c.confidence >= min_conf:
                    emitted.add(child)
                stack.append((child, child_phase))
    return emitted


# -- bound certification -----------------------------------------------------

def element_expansion(rule: SequentialRule, db: SequenceDatabase, sid: int) -> ExpansionUtility | None:
    """EU triple and counts of ``rule`` in one sequence from explicit candidate lists."""
    seq = db[sid]
    occ = rule_occurs(rule, seq)
    if occ is None:
        return None
    cand = expansion_candidates(rule, occ, seq)
    u = db.utilities[sid]
    return ExpansionUtility(sum(u[i] for i in cand.left_only), sum(u[i] for i in cand.both),
                            sum(u[i] for i in cand.right_only), len(cand.left_only),
                            len(cand.both), len(cand.right_only))


def rule_bounds(rule: SequentialRule, db: SequenceDatabase) -> dict[str, float]:
    totals = {"EURE": 0, "EULE": 0, "LEEU": 0, "REEU": 0}
    for sid in rule_support(rule, db):
        eu = element_expansion(rule, db, sid)
        utility = sum(db.utilities[sid][i] for i in rule.items)
        totals["EURE"] += eure(utility, eu)
        totals["EULE"] += eule(utility, eu)
        totals["LEEU"] += leeu(utility, eu)
        totals["REEU"] += reeu(utility, eu)
    return totals


def _seu(rule, db):
    return sum(db.sequence_utilities[sid] for sid in rule_support(rule, db))


def _random_descendant(rng: random.Random, rule: SequentialRule, items, shape: str):
    """Add 1-3 lexicographically larger items; shape is 'left', 'right', 'lr' or 'rl'."""
    steps = []
    x, y = rule.antecedent, rule.consequent
    plan = {"left": ["l"] * 3, "right": ["r"] * 3, "lr": ["l", "r", "r"], "rl": ["r", "l", "l"]}[shape]
    for kind in plan[:rng.randint(1, 3)]:
        if kind == "l":
            options = [i for i in items if i > x[-1] and i not in y]
        else:
            options = [j for j in items if j > y[-1] and j not in x]
        if not options:
            continue
        pick = rng.choice(options)
        if kind == "l":
            x = x + (pick,)
        else:
            y = y + (pick,)
        steps.append((kind, pick))
    return SequentialRule(x, y), steps


@dataclass
class BoundReport:
    trials: int
    checks: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def format(self) -> str:
        head = f"{self.trials} trials, {self.checks} checks, {len(self.violations)} violations"
        return "\n".join([head] + self.violations)


def _violation(seed, db, rule, steps, what, expected, actual):
    dump = formats.serialize_database(db).strip().replace("\n", " | ")
    utils = formats.serialize_utilities(db).strip().replace("\n", ", ")
    return (f"seed={seed} db=[{dump}] eu=[{utils}] rule={rule.format(db)} "
            f"expansion={steps} {what}: expected {expected} actual {actual}")


def certify_bounds(generator: Callable[[random.Random], SequenceDatabase], trials: int,
                   seed: int = 0, limits: OracleLimits = OracleLimits()) -> BoundReport:
    """Check the bound inequalities on random (rule, expansion) pairs.

    For a descendant d of r: SEU(d) <= SEU(r) and, for one-item expansions,
    SEU(d) is at most the pair index entry of the new item and the opposite
    side's largest item; u(d) and the descendant's own bound stay below
    EURE(r) along right-only paths, LEEU(r) along left-only paths and
    EULE(r) = REEU(r) along any path.  The fast candidate scan used by the
    miner is compared with the explicit candidate lists as well.
    """
    report = BoundReport(trials)
    for trial in range(trials):
        trial_seed = seed * 1_000_003 + trial
        rng = random.Random(trial_seed)
        db = generator(rng)
        rules = [s.rule for s in enumerate_all_rules(db, limits)]
        if not rules:
            continue
        rule = rng.choice(rules)
        shape = rng.choice(["left", "right", "lr", "rl"])
        child, steps = _random_descendant(rng, rule, db.items(), shape)
        ipeum, _ = scan_pairs(db)
        views = index_sequences(db)

        def check(what, ok, expected, actual):
            report.checks += 1
            if not ok:
                report.violations.append(
                    _violation(trial_seed, db, rule, steps, what, expected, actual))

        for sid in rule_support(rule, db):
            occ = rule_occurs(rule, db[sid])
            slow = element_expansion(rule, db, sid)
            fast = expansion_utility(views[sid], rule.antecedent[-1], rule.consequent[-1],
                                     occ.alpha, occ.beta, set(rule.antecedent))
            check("candidate scan", fast == slow, slow, fast)

        parent_b = rule_bounds(rule, db)
        check("EULE == REEU", parent_b["EULE"] == parent_b["REEU"], parent_b["EULE"], parent_b["REEU"])
        if len(rule.antecedent) == 1 and len(rule.consequent) == 1:
            pair = ipeum.get(rule.antecedent[0], rule.consequent[0])
            check("SEU(seed) == IPEUM", _seu(rule, db) == pair, pair, _seu(rule, db))
        if not steps:
            continue
        u_child = rule_utility(child, db)
        seu_child = _seu(child, db)
        check("SEU(child) <= SEU(rule)", seu_child <= _seu(rule, db), _seu(rule, db), seu_child)
        if len(steps) == 1:
            kind, item = steps[0]
            pair = ipeum.get(item, rule.consequent[-1]) if kind == "l" else \
                ipeum.get(rule.antecedent[-1], item)
            check("SEU(child) <= IPEUM", seu_child <= pair, pair, seu_child)
        child_b = rule_bounds(child, db)
        kinds = {k for k, _ in steps}
        names = ["EULE", "REEU"]
        if kinds == {"r"}:
            names.append("EURE")
        if kinds == {"l"}:
            names.append("LEEU")
        for name in names:
            check(f"u(child) <= {name}(rule)", u_child <= parent_b[name], parent_b[name], u_child)
            check(f"{name}(child) <= {name}(rule)", child_b[name] <= parent_b[name],
                  parent_b[name], child_b[name])
    return report
