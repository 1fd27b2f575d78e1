"""Immutable sets of sequence ids.

Two backends share one interface:

* ``compressed``: values are split on their high 16 bits into chunks; each
  chunk is an array container (sorted uint16 values, at most 4096 of them)
  or a bitset container (65536 bits) once it grows past that threshold.
* ``flat``: one bit per sequence of the universe.

Run containers are not implemented.  Bitsets are stored as Python ints,
which gives constant-time-ish AND/OR and a native popcount.
"""
from __future__ import annotations

from array import array
from typing import Iterable, Iterator

ARRAY_LIMIT = 4096
CHUNK_BITS = 16
CHUNK_SIZE = 1 << CHUNK_BITS
LOW_MASK = CHUNK_SIZE - 1
BITSET_CONTAINER_BYTES = CHUNK_SIZE // 8
CHUNK_HEADER_BYTES = 4  # 16-bit key + 16-bit cardinality

BACKENDS = ("compressed", "flat")


def _iter_bits(bits: int, offset: int = 0) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield offset + low.bit_length() - 1
        bits ^= low


class ArrayContainer:
    __slots__ = ("values",)
    kind = "array"

    def __init__(self, values: array):
        self.values = values

    def __len__(self):
        return len(self.values)

    def __contains__(self, low):
        values = self.values
        lo, hi = 0, len(values)
        while lo < hi:
            mid = (lo + hi) // 2
            if values[mid] < low:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(values) and values[lo] == low

    def __iter__(self):
        return iter(self.values)

    @property
    def nbytes(self):
        return 2 * len(self.values)

    def to_bits(self) -> int:
        bits = 0
        for v in self.values:
            bits |= 1 << v
        return bits


class BitsetContainer:
    __slots__ = ("bits", "cardinality")
    kind = "bitset"

    def __init__(self, bits: int, cardinality: int | None = None):
        self.bits = bits
        self.cardinality = bits.bit_count() if cardinality is None else cardinality

    def __len__(self):
        return self.cardinality

    def __contains__(self, low):
        return (self.bits >> low) & 1 == 1

    def __iter__(self):
        return _iter_bits(self.bits)

    @property
    def nbytes(self):
        return BITSET_CONTAINER_BYTES

    def to_bits(self) -> int:
        return self.bits


def _container_from_sorted(values: list[int]):
    if len(values) > ARRAY_LIMIT:
        bits = 0
        for v in values:
            bits |= 1 << v
        return BitsetContainer(bits, len(values))
    return ArrayContainer(array("H", values))


def _container_from_bits(bits: int):
    card = bits.bit_count()
    if card == 0:
        return None
    if card > ARRAY_LIMIT:
        return BitsetContainer(bits, card)
    return ArrayContainer(array("H", _iter_bits(bits)))


def _intersect_containers(a, b):
    if a.kind == "array" and b.kind == "array":
        if len(a) > len(b):
            a, b = b, a
        other = set(b.values)
        kept = [v for v in a.values if v in other]
        return ArrayContainer(array("H", kept)) if kept else None
    if a.kind == "array" or b.kind == "array":
        arr, bitset = (a, b) if a.kind == "array" else (b, a)
        bits = bitset.bits
        kept = [v for v in arr.values if (bits >> v) & 1]
        return ArrayContainer(array("H", kept)) if kept else None
    return _container_from_bits(a.bits & b.bits)


def _union_containers(a, b):
    if a.kind == "array" and b.kind == "array":
        merged = sorted(set(a.values).union(b.values))
        return _container_from_sorted(merged)
    return _container_from_bits(a.to_bits() | b.to_bits())


class IdSet:
    """Common surface of both backends."""

    backend: str = ""
    __slots__ = ("universe",)

    def __len__(self):
        return self.cardinality()

    def __iter__(self):
        return self.iterate()

    def __bool__(self):
        return self.cardinality() > 0

    def __eq__(self, other):
        if not isinstance(other, IdSet):
            return NotImplemented
        return self.universe == other.universe and list(self) == list(other)

    def __hash__(self):
        return hash((self.universe, tuple(self)))

    def __repr__(self):
        return f"{type(self).__name__}({list(self)!r}, universe={self.universe})"

    def __and__(self, other):
        return self.intersect(other)

    def __or__(self, other):
        return self.union(other)

    def _check(self, other: IdSet):
        if not isinstance(other, IdSet) or other.backend != self.backend:
            raise ValueError("cannot combine id-sets of different backends")
        if other.universe != self.universe:
            raise ValueError(f"mixed universes: {self.universe} vs {other.universe}")

    def intersect(self, other: IdSet) -> IdSet:
        raise NotImplementedError

    def union(self, other: IdSet) -> IdSet:
        raise NotImplementedError

    def cardinality(self) -> int:
        raise NotImplementedError

    def contains(self, sid: int) -> bool:
        raise NotImplementedError

    def iterate(self) -> Iterator[int]:
        raise NotImplementedError

    def add(self, sid: int) -> IdSet:
        """A new set with ``sid`` included."""
        raise NotImplementedError

    @property
    def nbytes(self) -> int:
        raise NotImplementedError


class CompressedIdSet(IdSet):
    backend = "compressed"
    __slots__ = ("chunks", "_card")

    def __init__(self, chunks: dict, universe: int):
        self.chunks = chunks
        self.universe = universe
        self._card = sum(len(c) for c in chunks.values())

    @classmethod
    def from_sorted(cls, sids: list[int], universe: int) -> CompressedIdSet:
        chunks = {}
        start = 0
        n = len(sids)
        while start < n:
            high = sids[start] >> CHUNK_BITS
            end = start
            lows = []
            while end < n and sids[end] >> CHUNK_BITS == high:
                lows.append(sids[end] & LOW_MASK)
                end += 1
            chunks[high] = _container_from_sorted(lows)
            start = end
        return cls(chunks, universe)

    def intersect(self, other):
        self._check(other)
        small, large = (self, other) if len(self.chunks) <= len(other.chunks) else (other, self)
        chunks = {}
        for high, container in small.chunks.items():
            peer = large.chunks.get(high)
            if peer is None:
                continue
            merged = _intersect_containers(container, peer)
            if merged is not None:
                chunks[high] = merged
        return CompressedIdSet(dict(sorted(chunks.items())), self.universe)

    def union(self, other):
        self._check(other)
        chunks = dict(self.chunks)
        for high, container in other.chunks.items():
            mine = chunks.get(high)
            chunks[high] = container if mine is None else _union_containers(mine, container)
        return CompressedIdSet(dict(sorted(chunks.items())), self.universe)

    def cardinality(self):
        return self._card

    def contains(self, sid):
        container = self.chunks.get(sid >> CHUNK_BITS)
        return container is not None and (sid & LOW_MASK) in container

    def iterate(self):
        for high, container in self.chunks.items():
            base = high << CHUNK_BITS
            for low in container:
                yield base + low

    def add(self, sid):
        if not 0 <= sid < self.universe:
            raise ValueError(f"sid {sid} outside universe {self.universe}")
        if self.contains(sid):
            return self
        high, low = sid >> CHUNK_BITS, sid & LOW_MASK
        chunks = dict(self.chunks)
        container = chunks.get(high)
        if container is None:
            chunks[high] = ArrayContainer(array("H", [low]))
        elif container.kind == "bitset":
            chunks[high] = BitsetContainer(container.bits | (1 << low), len(container) + 1)
        else:
            chunks[high] = _container_from_sorted(sorted(list(container.values) + [low]))
        return CompressedIdSet(dict(sorted(chunks.items())), self.universe)

    def container_kinds(self) -> dict[int, str]:
        return {high: c.kind for high, c in self.chunks.items()}

    @property
    def nbytes(self):
        return sum(CHUNK_HEADER_BYTES + c.nbytes for c in self.chunks.values())


class FlatIdSet(IdSet):
    backend = "flat"
    __slots__ = ("bits", "_card")

    def __init__(self, bits: int, universe: int):
        self.bits = bits
        self.universe = universe
        self._card = bits.bit_count()

    @classmethod
    def from_sorted(cls, sids: list[int], universe: int) -> FlatIdSet:
        bits = 0
        for sid in sids:
            bits |= 1 << sid
        return cls(bits, universe)

    def intersect(self, other):
        self._check(other)
        return FlatIdSet(self.bits & other.bits, self.universe)

    def union(self, other):
        self._check(other)
        return FlatIdSet(self.bits | other.bits, self.universe)

    def cardinality(self):
        return self._card

    def contains(self, sid):
        return 0 <= sid < self.universe and (self.bits >> sid) & 1 == 1

    def iterate(self):
        return _iter_bits(self.bits)

    def add(self, sid):
        if not 0 <= sid < self.universe:
            raise ValueError(f"sid {sid} outside universe {self.universe}")
        return FlatIdSet(self.bits | (1 << sid), self.universe)

    @property
    def nbytes(self):
        return (self.universe + 7) // 8


_CLASSES = {"compressed": CompressedIdSet, "flat": FlatIdSet}


def idset_from(sids: Iterable[int], backend: str = "compressed", universe: int | None = None) -> IdSet:
    """Build an id-set from strictly increasing sids, all below ``universe``."""
    sids = list(sids)
    if universe is None:
        universe = sids[-1] + 1 if sids else 0
    if backend not in _CLASSES:
        raise ValueError(f"unknown id-set backend {backend!r}; expected one of {BACKENDS}")
    previous = -1
    for sid in sids:
        if sid <= previous:
            raise ValueError("sids must be strictly increasing")
        previous = sid
    if sids and (sids[0] < 0 or sids[-1] >= universe):
        raise ValueError(f"sid out of range for universe {universe}")
    return _CLASSES[backend].from_sorted(sids, universe)


def intersect(a: IdSet, b: IdSet) -> IdSet:
    return a.intersect(b)


def union(a: IdSet, b: IdSet) -> IdSet:
    return a.union(b)


def cardinality(a: IdSet) -> int:
    return a.cardinality()


def contains(a: IdSet, sid: int) -> bool:
    return a.contains(sid)


def iterate(a: IdSet) -> Iterator[int]:
    return a.iterate()
