"""Rule-quality summaries over mining results."""
from __future__ import annotations

import csv
import io
import math
import time
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

from .engine import MinedRule, MiningConfig, MiningResult, mine
from .model import SequenceDatabase


class LineageError(ValueError):
    pass


class LineagePair(NamedTuple):
    parent: MinedRule
    child: MinedRule
    expansion: str


@dataclass(frozen=True)
class QualityReport:
    total_rules: int
    size_histogram: dict[tuple[int, int], int]
    pairs: int
    confidence_rise_ratio: float
    conviction_rise_ratio: float
    average_confidence: float

    def format(self) -> str:
        sizes = ", ".join(f"{a}x{b}:{n}" for (a, b), n in sorted(self.size_histogram.items()))
        return "\n".join([
            f"rules: {self.total_rules}",
            f"sizes: {sizes or '-'}",
            f"lineage pairs: {self.pairs}",
            f"confidence rise ratio: {self.confidence_rise_ratio:.4f}",
            f"conviction rise ratio: {self.conviction_rise_ratio:.4f}",
            f"average confidence: {self.average_confidence:.4f}",
        ])


def _rises(child: float, parent: float) -> bool:
    # inf > inf is False in IEEE arithmetic, which is the tie rule we want
    return child > parent


def lineage_pairs(rules: Iterable[MinedRule]) -> list[LineagePair]:
    """Parent/child pairs where both ends were emitted."""
    rules = list(rules)
    by_rule = {m.rule: m for m in rules}
    pairs = []
    for m in rules:
        if m.expansion not in ("seed", "l", "r"):
            raise LineageError(f"rule {m.rule} carries no lineage")
        parent = m.parent
        if parent is not None and parent in by_rule:
            pairs.append(LineagePair(by_rule[parent], m, m.expansion))
    return pairs


def rise_ratios(result: MiningResult) -> QualityReport:
    rules = getattr(result, "rules", None)
    if rules is None or any(not isinstance(m, MinedRule) for m in rules):
        raise LineageError("rise ratios need engine results with lineage")
    pairs = lineage_pairs(rules)
    conf_up = sum(_rises(p.child.confidence, p.parent.confidence) for p in pairs)
    conv_up = sum(_rises(p.child.conviction, p.parent.conviction) for p in pairs)
    n = len(pairs)
    return QualityReport(
        total_rules=len(rules),
        size_histogram=dict(Counter(m.rule.size for m in rules)),
        pairs=n,
        confidence_rise_ratio=conf_up / n if n else 0.0,
        conviction_rise_ratio=conv_up / n if n else 0.0,
        average_confidence=sum(m.confidence for m in rules) / len(rules) if rules else 0.0,
    )


class SweepRow(NamedTuple):
    min_ratio: float
    rule_count: int
    avg_confidence: float
    runtime_ms: float


class SweepError(ValueError):
    pass


def ratio_sweep(db: SequenceDatabase, config: MiningConfig, ratios: Iterable[float]) -> list[SweepRow]:
    """One mining run per ratio; counts must not increase as the ratio grows."""
    ratios = list(ratios)
    if any(b < a for a, b in zip(ratios, ratios[1:])):
        raise SweepError("ratios must be in ascending order")
    if config.ratio_semantics != "growth":
        raise SweepError("sweeps use growth semantics")
    rows = []
    for ratio in ratios:
        start = time.perf_counter()
        result = mine(db, replace(config, min_ratio=ratio))
        elapsed = (time.perf_counter() - start) * 1000
        avg = sum(m.confidence for m in result.rules) / len(result) if len(result) else 0.0
        rows.append(SweepRow(ratio, len(result), avg, elapsed))
    for prev, row in zip(rows, rows[1:]):
        if row.rule_count > prev.rule_count:
            raise SweepError(f"rule count rose from {prev.rule_count} to {row.rule_count} "
                             f"at min_ratio {row.min_ratio}")
    return rows


SWEEP_HEADER = ("min_ratio", "rule_count", "avg_confidence", "runtime_ms")


def sweep_csv(rows: Iterable[SweepRow], include_runtime: bool = True) -> str:
    """CSV text; runtimes are the only non-deterministic column."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        runtime = f"{r.runtime_ms:.3f}" if include_runtime else ""
        writer.writerow([f"{r.min_ratio:g}", r.rule_count, f"{r.avg_confidence:.6f}", runtime])
    return out.getvalue()


def sweep_text(rows: Iterable[SweepRow]) -> str:
    rows = list(rows)
    lines = [f"{'min_ratio':>10} {'rules':>8} {'avg_conf':>9} {'ms':>10}"]
    lines += [f"{r.min_ratio:>10g} {r.rule_count:>8d} {r.avg_confidence:>9.4f} {r.runtime_ms:>10.1f}"
              for r in rows]
    if len(rows) > 1 and rows[0].rule_count:
        drop = 1 - rows[-1].rule_count / rows[0].rule_count
        lines.append(f"count drop over sweep: {100 * drop:.1f}%")
    return "\n".join(lines)


def format_conviction(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"
