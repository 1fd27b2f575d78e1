"""Synthetic q-sequence databases: tiny fuzz cases and larger benchmark sets."""
from __future__ import annotations

import random
import string
from dataclasses import dataclass

import numpy as np

from .model import ItemTable, QItem, QSequence, SequenceDatabase


def _assemble(rows, eu, labels) -> SequenceDatabase:
    """rows: per sequence, list of itemsets of (item, quantity)."""
    sequences = [QSequence(sid, tuple(tuple(sorted(QItem(i, q) for i, q in itemset))
                                      for itemset in row))
                 for sid, row in enumerate(rows)]
    return SequenceDatabase(sequences, eu, ItemTable(labels))


def random_database(rng: random.Random, max_sequences: int = 8, max_items: int = 7,
                    max_qty: int = 5, max_eu: int = 10, zero_eu_rate: float = 0.0) -> SequenceDatabase:
    """Small random database for differential testing."""
    n_items = rng.randint(1, max_items)
    labels = list(string.ascii_lowercase[:n_items]) if n_items <= 26 else \
        [f"i{k:03d}" for k in range(n_items)]
    eu = [0 if rng.random() < zero_eu_rate else rng.randint(1, max_eu) for _ in range(n_items)]
    rows = []
    for _ in range(rng.randint(1, max_sequences)):
        items = rng.sample(range(n_items), rng.randint(1, n_items))
        row, current = [], []
        for item in items:
            if current and rng.random() < 0.55:
                row.append(current)
                current = []
            current.append((item, rng.randint(1, max_qty)))
        row.append(current)
        rows.append(row)
    return _assemble(rows, eu, labels)


def generate(n_sequences: int, n_items: int, avg_seq_len: float, avg_itemset_size: float,
             max_qty: int = 10, max_eu: int = 10, seed: int = 0) -> SequenceDatabase:
    """Benchmark-style database.

    Itemset counts are ``1 + Poisson(avg_seq_len - 1)`` and itemset sizes
    ``1 + Poisson(avg_itemset_size - 1)``; items are drawn uniformly without
    replacement inside a sequence, so every item occurs in a sequence with
    probability about ``avg_seq_len * avg_itemset_size / n_items``.
    """
    if n_sequences < 1 or n_items < 1:
        raise ValueError("need at least one sequence and one item")
    if avg_seq_len < 1 or avg_itemset_size < 1:
        raise ValueError("average sequence length and itemset size must be >= 1")
    if max_qty < 1 or max_eu < 1:
        raise ValueError("max quantity and max external utility must be >= 1")
    rng = np.random.default_rng(seed)
    width = len(str(n_items - 1))
    labels = [f"i{k:0{width}d}" for k in range(n_items)]
    eu = [int(v) for v in rng.integers(1, max_eu + 1, size=n_items)]
    rows = []
    for _ in range(n_sequences):
        n_sets = 1 + int(rng.poisson(avg_seq_len - 1))
        sizes = 1 + rng.poisson(avg_itemset_size - 1, size=n_sets)
        total = int(min(sizes.sum(), n_items))
        items = rng.choice(n_items, size=total, replace=False)
        qty = rng.integers(1, max_qty + 1, size=total)
        row, start = [], 0
        for size in sizes:
            if start >= total:
                break
            end = min(total, start + int(size))
            row.append([(int(items[k]), int(qty[k])) for k in range(start, end)])
            start = end
        rows.append(row)
    return _assemble(rows, eu, labels)


@dataclass(frozen=True)
class DatasetStats:
    sequences: int
    itemsets: int
    items: int
    avg_seq_len: float
    avg_itemset_size: float
    density: float

    def format(self) -> str:
        return (f"M={self.sequences} itemsets={self.itemsets} |I|={self.items} "
                f"L={self.avg_seq_len:.2f} n={self.avg_itemset_size:.2f} "
                f"density={100 * self.density:.3f}%")


def dataset_stats(db: SequenceDatabase) -> DatasetStats:
    """Counts plus density = mean over items of |seq(item)| / M."""
    m = len(db)
    itemsets = sum(len(seq) for seq in db)
    occurrences: dict[int, int] = {}
    n_entries = 0
    for seq in db:
        n_entries += len(seq.positions)
        for item in seq.positions:
            occurrences[item] = occurrences.get(item, 0) + 1
    n_items = len(occurrences)
    density = sum(c / m for c in occurrences.values()) / n_items if n_items else 0.0
    return DatasetStats(m, itemsets, n_items, itemsets / m if m else 0.0,
                        n_entries / itemsets if itemsets else 0.0, density)
