"""Readers and writers for q-sequence databases.

Native data lines look like ``a:1 b:4 -1 c:4 e:2 -1 f:9 -1 d:5 -2``; the
companion utility file holds one ``label utility`` pair per line.  The
SPMF reader accepts ``id[utility]`` tokens with an optional trailing
``SUtility:<n>``.
"""
from __future__ import annotations

import io
import logging
import re
from typing import Iterable, TextIO

from .model import ItemTable, QItem, QSequence, SequenceDatabase

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%", "@")
_SPMF_TOKEN = re.compile(r"^([^\[\]\s]+)\[([^\]]+)\]$")


class ParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _as_stream(source) -> TextIO:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def _tokens(line: str):
    """Yield (column, token) with 1-based columns."""
    for match in re.finditer(r"\S+", line):
        yield match.start() + 1, match.group()


def _read_raw_sequences(stream: TextIO, parse_token):
    """Split lines into raw sequences of (label, quantity) itemsets."""
    raw = []
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        itemsets, current, seen = [], [], set()
        terminated = False
        trailer = None
        for column, token in _tokens(line):
            if terminated:
                if token.startswith("SUtility:") and trailer is None:
                    trailer = (column, token[len("SUtility:"):])
                    continue
                raise ParseError(f"unexpected token {token!r} after -2", lineno, column)
            if token == "-1":
                if not current:
                    raise ParseError("empty itemset", lineno, column)
                itemsets.append(current)
                current = []
            elif token == "-2":
                if current:
                    itemsets.append(current)
                    current = []
                terminated = True
            else:
                label, quantity = parse_token(token, lineno, column)
                if label in seen:
                    raise ParseError(f"duplicate item in sequence {len(raw) + 1}: {label!r}",
                                     lineno, column)
                seen.add(label)
                current.append((label, quantity))
        if current:
            itemsets.append(current)
        if not itemsets:
            raise ParseError("sequence has no itemsets", lineno)
        raw.append((lineno, itemsets, trailer))
    if not raw:
        raise ParseError("no sequences")
    return raw


def _native_token(token, lineno, column):
    label, sep, qty = token.rpartition(":")
    if not sep or not label:
        raise ParseError(f"malformed item token {token!r} (expected label:quantity)", lineno, column)
    try:
        quantity = int(qty)
    except ValueError:
        raise ParseError(f"malformed quantity in {token!r}", lineno, column) from None
    if quantity < 1:
        raise ParseError(f"quantity must be >= 1 in {token!r}", lineno, column)
    return label, quantity


def _spmf_token(token, lineno, column):
    match = _SPMF_TOKEN.match(token)
    if not match:
        raise ParseError(f"malformed item token {token!r} (expected id[utility])", lineno, column)
    label, value = match.groups()
    try:
        int(label)
        quantity = int(value)
    except ValueError:
        raise ParseError(f"malformed item token {token!r}", lineno, column) from None
    if quantity < 1:
        raise ParseError(f"utility must be >= 1 in {token!r}", lineno, column)
    return label, quantity


def parse_utilities(stream) -> dict[str, float]:
    utilities = {}
    for lineno, line in enumerate(_as_stream(stream), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError("expected 'label utility'", lineno, 1)
        label, value = parts
        try:
            utility = _number(value)
        except ValueError:
            raise ParseError(f"malformed utility {value!r}", lineno, line.index(value) + 1) from None
        if utility < 0:
            raise ParseError(f"negative utility for {label!r}", lineno)
        if label in utilities:
            raise ParseError(f"duplicate utility entry for {label!r}", lineno)
        utilities[label] = utility
    return utilities


def _build(raw, utilities: dict[str, float], sort_key) -> SequenceDatabase:
    labels = set()
    for _, itemsets, _ in raw:
        for itemset in itemsets:
            labels.update(label for label, _ in itemset)
    missing = sorted(labels - set(utilities), key=sort_key)
    if missing:
        raise ParseError(f"item {missing[0]!r} has no external utility")
    table = ItemTable(sorted(labels, key=sort_key))
    sequences = []
    for sid, (_, itemsets, _) in enumerate(raw):
        converted = tuple(
            tuple(sorted(QItem(table.id_of(label), q) for label, q in itemset))
            for itemset in itemsets)
        sequences.append(QSequence(sid, converted))
    eu = [utilities[label] for label in table.labels]
    return SequenceDatabase(sequences, eu, table)


def parse_database(data, utilities) -> SequenceDatabase:
    """Parse native data plus utility text (strings or text streams)."""
    raw = _read_raw_sequences(_as_stream(data), _native_token)
    if isinstance(utilities, dict):
        table = dict(utilities)
    else:
        table = parse_utilities(utilities)
    return _build(raw, table, sort_key=lambda label: label)


def parse_spmf(data) -> SequenceDatabase:
    """Parse the SPMF utility format; eu is 1 and the bracketed value is q."""
    raw = _read_raw_sequences(_as_stream(data), _spmf_token)
    labels = {label for _, itemsets, _ in raw for itemset in itemsets for label, _ in itemset}
    db = _build(raw, {label: 1 for label in labels}, sort_key=int)
    for sid, (lineno, _, trailer) in enumerate(raw):
        if trailer is None:
            continue
        try:
            declared = _number(trailer[1])
        except ValueError:
            raise ParseError(f"malformed SUtility {trailer[1]!r}", lineno, trailer[0]) from None
        if declared != db.sequence_utilities[sid]:
            log.warning("line %d: SUtility %s does not match computed %s",
                        lineno, declared, db.sequence_utilities[sid])
    return db


def load_database(data_path, utility_path) -> SequenceDatabase:
    with open(data_path) as data, open(utility_path) as utils:
        return parse_database(data, utils)


def load_spmf(path) -> SequenceDatabase:
    with open(path) as data:
        return parse_spmf(data)


def _fmt_number(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def format_sequence(seq: QSequence, db: SequenceDatabase) -> str:
    parts = []
    for itemset in seq.itemsets:
        parts.append(" ".join(f"{db.label(q.item)}:{q.quantity}" for q in itemset))
    return " -1 ".join(parts) + " -2"


def serialize_database(db: SequenceDatabase) -> str:
    return "".join(format_sequence(seq, db) + "\n" for seq in db)


def serialize_utilities(db: SequenceDatabase, items: Iterable[int] | None = None) -> str:
    items = range(len(db.item_table)) if items is None else items
    return "".join(f"{db.label(i)} {_fmt_number(db.external_utility[i])}\n" for i in items)


def write_database(db: SequenceDatabase, data_path, utility_path):
    with open(data_path, "w") as out:
        out.write(serialize_database(db))
    with open(utility_path, "w") as out:
        out.write(serialize_utilities(db))
