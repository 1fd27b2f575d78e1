"""Upper bounds and the per-rule utility tables used during expansion.

Every bound is summed per sequence and falls to zero in a sequence where
the rule has no candidate item on the relevant side.  The zero branch is
keyed on the candidate count rather than the candidate utility, which is the
same thing unless an item has external utility 0 (where keying on the
utility would undercut the descendants it is supposed to bound).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .idset import IdSet
from .model import SequentialRule
from .preprocess import ExpansionUtility, TempTable

LEFT_RIGHT = 1
RIGHT_LEFT = 0


def eure(utility: float, eu: ExpansionUtility) -> float:
    """u(r,s) + AllUR(r,s), or 0 without right candidates."""
    return utility + eu.ur + eu.ulr if eu.ir else 0


def eule(utility: float, eu: ExpansionUtility) -> float:
    """u(r,s) + UExtend(r,s), or 0 without candidates."""
    return utility + eu.extend if eu.n_total else 0


def leeu(utility: float, eu: ExpansionUtility) -> float:
    """u(r,s) + AllUL(r,s), or 0 without left candidates."""
    return utility + eu.ul + eu.ulr if eu.il else 0


reeu = eule


def _total(bound, elements) -> float:
    return sum(bound(el.utility, el.eu) for el in elements)


def bound_eure(rule: SequentialRule, elements: Iterable) -> float:
    return _total(eure, elements)


def bound_eule(rule: SequentialRule, elements: Iterable) -> float:
    return _total(eule, elements)


def bound_leeu(rule: SequentialRule, elements: Iterable) -> float:
    return _total(leeu, elements)


def bound_reeu(rule: SequentialRule, elements: Iterable) -> float:
    return _total(reeu, elements)


def element_bounds(utility: float, eu: ExpansionUtility, flag: int) -> tuple[float, float]:
    """(UBTotal, UBPart): EULE/EURE when flag=1, REEU/LEEU when flag=0."""
    total = eule(utility, eu)
    part = eure(utility, eu) if flag == LEFT_RIGHT else leeu(utility, eu)
    return total, part


class UElement(NamedTuple):
    sid: int
    utility: float
    eu: ExpansionUtility
    positions: tuple[int, int]
    ubs: tuple[float, float]
    flag: int

    @property
    def residual(self) -> tuple[float, int]:
        """Utility and count of candidates for the single-direction phase."""
        if self.flag == LEFT_RIGHT:
            return self.eu.ur + self.eu.ulr, self.eu.ir
        return self.eu.ul + self.eu.ulr, self.eu.il


def make_uelement(sid, utility, eu, positions, flag) -> UElement:
    return UElement(sid, utility, eu, positions, element_bounds(utility, eu, flag), flag)


class PUElement(NamedTuple):
    sid: int
    utility: float
    residual: float
    n_candidates: int

    @property
    def ub_part(self) -> float:
        return self.utility + self.residual if self.n_candidates else 0


@dataclass
class RuleTable:
    rule: SequentialRule
    flag: int
    support: IdSet
    antecedent_support: IdSet
    depth: int = 0

    @property
    def confidence(self) -> float:
        ant = self.antecedent_support.cardinality()
        return self.support.cardinality() / ant if ant else 0.0


@dataclass
class UTable(RuleTable):
    elements: list[UElement] = field(default_factory=list)
    tu: float = 0
    ub_total: float = 0
    ub_part: float = 0

    def __post_init__(self):
        self.tu = sum(el.utility for el in self.elements)
        self.ub_total = sum(el.ubs[0] for el in self.elements)
        self.ub_part = sum(el.ubs[1] for el in self.elements)

    @classmethod
    def from_temp(cls, temp: TempTable, flag: int, support: IdSet, antecedent_support: IdSet):
        elements = [make_uelement(el.sid, el.utility, el.eu, el.positions, flag)
                    for el in temp.elements]
        return cls(temp.rule, flag, support, antecedent_support, 0, elements)

    def to_elements(self) -> list[PUElement]:
        return [PUElement(el.sid, el.utility, *el.residual) for el in self.elements]


@dataclass
class PUTable(RuleTable):
    elements: list[PUElement] = field(default_factory=list)
    tu: float = 0
    ub_part: float = 0

    def __post_init__(self):
        self.tu = sum(el.utility for el in self.elements)
        self.ub_part = sum(el.ub_part for el in self.elements)

    def to_elements(self) -> list[PUElement]:
        return self.elements
