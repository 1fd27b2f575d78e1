"""Mining high-utility sequential rules whose utility rises along expansions.

Each 1x1 seed picks an expansion convention:

* left-right (flag 1): left expansions first, then right expansions only.
  The double phase grows the antecedent and is bounded by EULE; the single
  phase grows the consequent and is bounded by EURE, with CONFP available
  because confidence cannot rise while the antecedent is fixed.
* right-left (flag 0): the mirror image, bounded by REEU and LEEU.

A non-seed rule is reported when its utility reaches
``max(min_util, rise_threshold(u(parent)))``, its confidence reaches
``min_conf`` and every rule on its expansion path from the seed reached its
own rise threshold.  A rule whose own step misses the rise threshold
therefore ends its branch.
"""
from __future__ import annotations

import logging
import time
from bisect import bisect_right
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable

from .idset import BACKENDS, IdSet, idset_from
from .model import SequenceDatabase, SequentialRule, conviction_from_counts
from .preprocess import (ExpansionUtility, SequenceIndex, build_maxis, expansion_utility,
                         index_sequences, prune_unpromising, scan_pairs, generate_seed_rules)
from .tables import LEFT_RIGHT, RIGHT_LEFT, PUElement, PUTable, UTable, make_uelement

log = logging.getLogger(__name__)

MODES = ("auto", "lr", "rl", "no-ratio")
RATIO_SEMANTICS = ("growth", "literal")
COUNTERS = ("seup_items", "seup_rules", "ipeum_pairs_pruned", "ipeup_skips", "eurep", "eulep",
            "leeup", "reeup", "confp_cuts", "sumeu_cuts", "ratio_cuts", "maxis_cuts",
            "candidates", "lr_seeds", "rl_seeds", "peak_tables", "idset_bytes",
            "peak_idset_bytes")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MiningConfig:
    min_util: float
    min_conf: float
    min_ratio: float = 0.0
    ratio_semantics: str = "growth"
    mode: str = "auto"
    confp: bool = True
    ipeup: bool = True
    idset: str = "compressed"

    def __post_init__(self):
        if self.min_util < 0:
            raise ConfigError("min_util must be >= 0")
        if not 0 < self.min_conf <= 1:
            raise ConfigError("min_conf must be in (0, 1]")
        if self.min_ratio < 0:
            raise ConfigError("min_ratio must be >= 0")
        if self.ratio_semantics not in RATIO_SEMANTICS:
            raise ConfigError(f"ratio_semantics must be one of {RATIO_SEMANTICS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.idset not in BACKENDS:
            raise ConfigError(f"idset must be one of {BACKENDS}")

    def to_dict(self):
        return asdict(self)


VARIANTS = {
    "V1": {},
    "V2": {"idset": "flat"},
    "V3": {"confp": False},
    "V4": {"ipeup": False},
    "V5": {"mode": "lr"},
    "V6": {"mode": "rl"},
    "V7": {"mode": "no-ratio"},
}


def variant_config(variant: str, min_util: float, min_conf: float, **overrides) -> MiningConfig:
    """Config for one of the V1..V7 variants (V1 is the full algorithm)."""
    try:
        settings = dict(VARIANTS[variant])
    except KeyError:
        raise ConfigError(f"unknown variant {variant!r}") from None
    settings.update(overrides)
    return MiningConfig(min_util, min_conf, **settings)


def rise_threshold(parent_utility: float, config: MiningConfig) -> float:
    if config.mode == "no-ratio":
        return 0
    if config.ratio_semantics == "growth":
        return parent_utility * (1 + config.min_ratio)
    return parent_utility * config.min_ratio


def effective_threshold(parent_utility: float, config: MiningConfig) -> float:
    return max(config.min_util, rise_threshold(parent_utility, config))


def _chain_never_drops(config: MiningConfig) -> bool:
    """Whether rule utilities are non-decreasing along every valid path."""
    return config.mode != "no-ratio" and (
        config.ratio_semantics == "growth" or config.min_ratio >= 1)


@dataclass(frozen=True)
class MinedRule:
    rule: SequentialRule
    utility: float
    confidence: float
    conviction: float
    support: int
    parent_utility: float | None
    expansion: str  # "seed", "l" or "r"
    depth: int
    mode: str  # convention of the seed tree: "lr" or "rl"

    @property
    def parent(self) -> SequentialRule | None:
        if self.expansion == "seed":
            return None
        x, y = self.rule.antecedent, self.rule.consequent
        if self.expansion == "l":
            return SequentialRule(x[:-1], y)
        return SequentialRule(x, y[:-1])


@dataclass
class MiningResult:
    rules: list[MinedRule]
    counters: Counter
    config: MiningConfig
    seed_modes: dict[SequentialRule, str] = field(default_factory=dict)
    seconds: float = 0.0

    def __len__(self):
        return len(self.rules)

    def rule_set(self) -> set[SequentialRule]:
        return {m.rule for m in self.rules}

    def by_rule(self) -> dict[SequentialRule, MinedRule]:
        return {m.rule: m for m in self.rules}

    def telemetry(self) -> dict[str, int]:
        return {name: int(self.counters.get(name, 0)) for name in COUNTERS}


def _left_part(view: SequenceIndex, max_x: int, beta: int) -> tuple[float, int]:
    ids, pos, util = view.ids, view.pos, view.util
    total, count = 0, 0
    for k in range(bisect_right(ids, max_x), len(ids)):
        if pos[k] < beta:
            total += util[k]
            count += 1
    return total, count


def _right_part(view: SequenceIndex, max_y: int, alpha: int, antecedent) -> tuple[float, int]:
    ids, pos, util = view.ids, view.pos, view.util
    total, count = 0, 0
    for k in range(bisect_right(ids, max_y), len(ids)):
        if pos[k] >= alpha and ids[k] not in antecedent:
            total += util[k]
            count += 1
    return total, count


class _Miner:
    def __init__(self, db: SequenceDatabase, config: MiningConfig, views, ipeum, maxis,
                 item_support: dict[int, IdSet]):
        self.db = db
        self.config = config
        self.views = views
        self.ipeum = ipeum
        self.maxis = maxis
        self.item_support = item_support
        self.universe = len(db)
        self.counters: Counter = Counter()
        self.found: dict[SequentialRule, MinedRule] = {}
        self.seed_modes: dict[SequentialRule, str] = {}
        self._support_cache: dict[tuple[int, ...], IdSet] = {}
        self._live_tables = 0
        self._live_bytes = sum(s.nbytes for s in item_support.values())
        self.counters["idset_bytes"] = self._live_bytes
        self.counters["peak_idset_bytes"] = self._live_bytes
        self._mode = "lr"

    # -- bookkeeping -------------------------------------------------------
    def _new_idset(self, sids) -> IdSet:
        s = idset_from(sids, self.config.idset, self.universe)
        self.counters["idset_bytes"] += s.nbytes
        return s

    def _itemset_support(self, items: tuple[int, ...]) -> IdSet:
        cached = self._support_cache.get(items)
        if cached is None:
            if len(items) == 1:
                cached = self.item_support[items[0]]
            else:
                cached = self._itemset_support(items[:-1]) & self.item_support[items[-1]]
                self.counters["idset_bytes"] += cached.nbytes
            self._support_cache[items] = cached
        return cached

    def _hold(self, tables):
        self._live_tables += len(tables)
        self._live_bytes += sum(t.support.nbytes for t in tables)
        c = self.counters
        c["peak_tables"] = max(c["peak_tables"], self._live_tables)
        c["peak_idset_bytes"] = max(c["peak_idset_bytes"], self._live_bytes)

    def _release(self, tables):
        self._live_tables -= len(tables)
        self._live_bytes -= sum(t.support.nbytes for t in tables)

    def _emit(self, table, tu, parent_utility, expansion):
        rule = table.rule
        support = table.support.cardinality()
        ant = table.antecedent_support.cardinality()
        cons = self._itemset_support(rule.consequent).cardinality()
        mined = MinedRule(
            rule=rule, utility=tu, confidence=support / ant if ant else 0.0,
            conviction=conviction_from_counts(support, ant, cons, self.db.source_size),
            support=support, parent_utility=parent_utility, expansion=expansion,
            depth=table.depth, mode=self._mode)
        if rule in self.found:
            raise AssertionError(f"rule generated twice: {rule}")
        self.found[rule] = mined

    # -- seeds -------------------------------------------------------------
    def run_seed(self, rule: SequentialRule, temp):
        cfg = self.config
        support = self._new_idset(temp.sids)
        ant_support = self.item_support[rule.antecedent[0]]
        if cfg.mode in ("lr", "rl"):
            mode = cfg.mode
        else:
            mode = temp.mode
        self.seed_modes[rule] = mode
        self._mode = mode
        self.counters[mode + "_seeds"] += 1
        flag = LEFT_RIGHT if mode == "lr" else RIGHT_LEFT
        table = UTable.from_temp(temp, flag, support, ant_support)
        conf = table.confidence
        if table.tu >= cfg.min_util and conf >= cfg.min_conf:
            self._emit(table, table.tu, None, "seed")
        if temp.sum_eu < cfg.min_util:
            self.counters["sumeu_cuts"] += 1
            return
        self._hold([table])
        self.double_expansion(table)
        if table.ub_part < cfg.min_util:
            self.counters["eurep" if flag == LEFT_RIGHT else "leeup"] += 1
        elif flag == LEFT_RIGHT and cfg.confp and conf < cfg.min_conf:
            self.counters["confp_cuts"] += 1
        else:
            self.single_expansion(table)
        self._release([table])

    # -- expansion ---------------------------------------------------------
    def _thresholds(self, parent_tu):
        cfg = self.config
        rise = rise_threshold(parent_tu, cfg)
        emit = max(cfg.min_util, rise)
        prune = emit if _chain_never_drops(cfg) else cfg.min_util
        return rise, emit, prune

    def double_expansion(self, table: UTable):
        """Grow the side this table's flag expands first; both bounds kept."""
        cfg = self.config
        flag = table.flag
        rule = table.rule
        x, y = rule.antecedent, rule.consequent
        max_x, max_y = x[-1], y[-1]
        rise, emit, prune = self._thresholds(table.tu)
        ipeum = self.ipeum.get if cfg.ipeup else None
        children: dict[int, list] = {}
        antecedent = set(x)
        for el in table.elements:
            if not el.eu.n_total:
                continue
            view = self.views[el.sid]
            ids, pos, util = view.ids, view.pos, view.util
            alpha, beta = el.positions
            top = self.maxis[el.sid]
            if flag == LEFT_RIGHT:
                if not el.eu.il:
                    continue
                for k in range(bisect_right(ids, max_x), len(ids)):
                    p = pos[k]
                    if p >= beta:
                        continue
                    i = ids[k]
                    if ipeum is not None and ipeum(i, max_y) < emit:
                        self.counters["ipeup_skips"] += 1
                        continue
                    a2 = alpha if alpha > p else p
                    if i == top:
                        # nothing can be added to the antecedent any more
                        self.counters["maxis_cuts"] += 1
                        ur, n_r = _right_part(view, max_y, a2, antecedent | {i})
                        eu = ExpansionUtility(0, 0, ur, 0, 0, n_r) if n_r else ExpansionUtility(0, 0, 0, 0, 0, 0)
                    else:
                        antecedent.add(i)
                        eu = expansion_utility(view, i, max_y, a2, beta, antecedent)
                        antecedent.discard(i)
                    children.setdefault(i, []).append(
                        make_uelement(el.sid, el.utility + util[k], eu, (a2, beta), flag))
            else:
                if not el.eu.ir:
                    continue
                for k in range(bisect_right(ids, max_y), len(ids)):
                    p = pos[k]
                    if p <= alpha:
                        continue
                    j = ids[k]
                    if j in antecedent:
                        continue
                    if ipeum is not None and ipeum(max_x, j) < emit:
                        self.counters["ipeup_skips"] += 1
                        continue
                    b2 = beta if beta < p else p
                    if j == top:
                        # nothing can be added to the consequent any more
                        self.counters["maxis_cuts"] += 1
                        ul, n_l = _left_part(view, max_x, b2)
                        eu = ExpansionUtility(ul, 0, 0, n_l, 0, 0)
                    else:
                        eu = expansion_utility(view, max_x, j, alpha, b2, antecedent)
                    children.setdefault(j, []).append(
                        make_uelement(el.sid, el.utility + util[k], eu, (alpha, b2), flag))

        tables = []
        for item in sorted(children):
            elements = children[item]
            support = self._new_idset([el.sid for el in elements])
            if flag == LEFT_RIGHT:
                child_rule = SequentialRule(x + (item,), y)
                ant_support = self._itemset_support(child_rule.antecedent)
            else:
                child_rule = SequentialRule(x, y + (item,))
                ant_support = table.antecedent_support
            tables.append(UTable(child_rule, flag, support, ant_support, table.depth + 1, elements))
        self.counters["candidates"] += len(tables)
        self._hold(tables)
        kind = "l" if flag == LEFT_RIGHT else "r"
        for child in tables:
            tu = child.tu
            conf = child.confidence
            if tu < rise:
                self.counters["ratio_cuts"] += 1
                continue
            if tu >= emit and conf >= cfg.min_conf:
                self._emit(child, tu, table.tu, kind)
            if child.ub_total >= prune:
                self.double_expansion(child)
            else:
                self.counters["eulep" if flag == LEFT_RIGHT else "reeup"] += 1
            if child.ub_part < prune:
                self.counters["eurep" if flag == LEFT_RIGHT else "leeup"] += 1
            elif flag == LEFT_RIGHT and cfg.confp and conf < cfg.min_conf:
                self.counters["confp_cuts"] += 1
            else:
                self.single_expansion(child)
        self._release(tables)

    def single_expansion(self, table):
        """Grow only the side the convention still allows (right for flag 1)."""
        cfg = self.config
        flag = table.flag
        rule = table.rule
        x, y = rule.antecedent, rule.consequent
        max_x, max_y = x[-1], y[-1]
        rise, emit, prune = self._thresholds(table.tu)
        ipeum = self.ipeum.get if cfg.ipeup else None
        antecedent = set(x)
        children: dict[int, list[PUElement]] = {}
        for el in table.to_elements():
            if not el.n_candidates:
                continue
            view = self.views[el.sid]
            ids, pos, util = view.ids, view.pos, view.util
            positions = view.positions
            top = self.maxis[el.sid]
            if flag == LEFT_RIGHT:
                alpha = max(positions[i] for i in x)
                for k in range(bisect_right(ids, max_y), len(ids)):
                    p = pos[k]
                    if p <= alpha:
                        continue
                    j = ids[k]
                    if j in antecedent:
                        continue
                    if ipeum is not None and ipeum(max_x, j) < emit:
                        self.counters["ipeup_skips"] += 1
                        continue
                    if j == top:
                        self.counters["maxis_cuts"] += 1
                        residual = (0, 0)
                    else:
                        residual = _right_part(view, j, alpha, antecedent)
                    children.setdefault(j, []).append(
                        PUElement(el.sid, el.utility + util[k], *residual))
            else:
                beta = min(positions[i] for i in y)
                for k in range(bisect_right(ids, max_x), len(ids)):
                    p = pos[k]
                    if p >= beta:
                        continue
                    i = ids[k]
                    if ipeum is not None and ipeum(i, max_y) < emit:
                        self.counters["ipeup_skips"] += 1
                        continue
                    if i == top:
                        self.counters["maxis_cuts"] += 1
                        residual = (0, 0)
                    else:
                        residual = _left_part(view, i, beta)
                    children.setdefault(i, []).append(
                        PUElement(el.sid, el.utility + util[k], *residual))

        tables = []
        for item in sorted(children):
            elements = children[item]
            support = self._new_idset([el.sid for el in elements])
            if flag == LEFT_RIGHT:
                child_rule = SequentialRule(x, y + (item,))
                ant_support = table.antecedent_support
            else:
                child_rule = SequentialRule(x + (item,), y)
                ant_support = self._itemset_support(child_rule.antecedent)
            tables.append(PUTable(child_rule, flag, support, ant_support, table.depth + 1, elements))
        self.counters["candidates"] += len(tables)
        self._hold(tables)
        kind = "r" if flag == LEFT_RIGHT else "l"
        for child in tables:
            tu = child.tu
            conf = child.confidence
            if tu < rise:
                self.counters["ratio_cuts"] += 1
                continue
            if tu >= emit and conf >= cfg.min_conf:
                self._emit(child, tu, table.tu, kind)
            if child.ub_part < prune:
                self.counters["eurep" if flag == LEFT_RIGHT else "leeup"] += 1
            elif flag == LEFT_RIGHT and cfg.confp and conf < cfg.min_conf:
                self.counters["confp_cuts"] += 1
            else:
                self.single_expansion(child)
        self._release(tables)


def mine(db: SequenceDatabase, config: MiningConfig) -> MiningResult:
    """Mine every rule meeting the thresholds and the rise-ratio chain."""
    start = time.perf_counter()
    counters: Counter = Counter()
    reduced, removed = prune_unpromising(db, config.min_util)
    counters["seup_items"] = len(removed)
    if not len(reduced):
        return MiningResult([], counters, config, seconds=time.perf_counter() - start)

    views = index_sequences(reduced)
    ipeum, pair_support = scan_pairs(reduced)
    ipeum, pruned = ipeum.prune(config.min_util)
    counters["ipeum_pairs_pruned"] = pruned
    maxis = build_maxis(reduced)
    occurrences: dict[int, list[int]] = {}
    for seq in reduced:
        for item in seq.positions:
            occurrences.setdefault(item, []).append(seq.sid)
    item_support = {item: idset_from(sids, config.idset, len(reduced))
                    for item, sids in sorted(occurrences.items())}

    seeds = generate_seed_rules(reduced, config.min_util, views, pair_support)
    counters["seup_rules"] = seeds.discarded

    miner = _Miner(reduced, config, views, ipeum, maxis, item_support)
    miner.counters.update(counters)
    for rule, temp in seeds.seeds:
        miner.run_seed(rule, temp)

    rules = sorted(miner.found.values(), key=lambda m: m.rule.sort_key())
    result = MiningResult(rules, miner.counters, config, miner.seed_modes,
                          seconds=time.perf_counter() - start)
    log.info("mined %d rules in %.3fs (%d candidates)", len(rules), result.seconds,
             miner.counters["candidates"])
    return result
