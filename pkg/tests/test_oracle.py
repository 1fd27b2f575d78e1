import random

import pytest

from sriu import oracle
from sriu.formats import parse_database
from sriu.oracle import (OracleLimitError, OracleLimits, brute_force_husr, brute_force_ratio_set,
                         certify_bounds, enumerate_all_rules, enumerate_rules_by_split)
from sriu.synth import random_database

from conftest import fuzz_databases


def test_sample_enumeration(sample):
    stats = {s.rule: s for s in enumerate_all_rules(sample)}
    ae = stats[sample.rule("a", "e")]
    assert (ae.utility, ae.confidence, ae.support) == (63, 1.0, 3)
    # frozen regression constant
    assert len(stats) == 238


def test_single_pair():
    db = parse_database("x:1 -1 y:1 -2\n", "x 1\ny 1\n")
    (only,) = enumerate_all_rules(db)
    assert only.rule.format(db) == "{x} -> {y}"


def test_enumerators_agree():
    for _, db in fuzz_databases(120, seed=2):
        assert {s.rule for s in enumerate_all_rules(db)} == enumerate_rules_by_split(db)


def test_limits():
    db = random_database(random.Random(0), max_sequences=8, max_items=7)
    with pytest.raises(OracleLimitError):
        enumerate_all_rules(db, OracleLimits(max_sequences=len(db) - 1 if len(db) > 1 else 0))
    with pytest.raises(OracleLimitError):
        enumerate_all_rules(db, OracleLimits(max_distinct_items=0))
    capped = enumerate_all_rules(db, OracleLimits(max_items_per_side=1))
    assert all(s.rule.size == (1, 1) for s in capped)


def test_husr_filter(sample):
    assert sample.rule("a", "e") in brute_force_husr(sample, 63, 1.0)
    assert len(brute_force_husr(sample, 0, 1e-9)) == 238
    assert brute_force_husr(sample, 379, 0.5) == set()


def test_ratio_set_without_ratio_is_husr():
    for _, db in fuzz_databases(40, seed=3):
        total = db.total_utility()
        for mode in ("lr", "rl"):
            assert brute_force_ratio_set(db, 0.2 * total, 0.3, 0.7, mode, "none") == \
                brute_force_husr(db, 0.2 * total, 0.3)


def test_ratio_set_single_sequence():
    db = parse_database("a:5 -1 b:1 -1 c:1 -2\n", "a 1\nb 1\nc 1\n")
    got = {r.format(db) for r in brute_force_ratio_set(db, 0, 0.1, 0.0, "lr")}
    # every child adds utility, so the whole forest is kept
    assert got == {r.format(db) for r in brute_force_husr(db, 0, 0.1)}
    # requiring 50% growth cuts {a}->{c} to {a,b}->{c} (6 -> 7)
    strict = {r.format(db) for r in brute_force_ratio_set(db, 0, 0.1, 0.5, "lr")}
    assert "{a,b} -> {c}" not in strict and "{a} -> {b}" in strict


def test_certify_clean():
    report = certify_bounds(lambda rng: random_database(rng, max_sequences=5), 300, seed=5)
    assert report.ok, report.format()
    assert report.checks > 300


def test_certify_replay():
    gen = lambda rng: random_database(rng, zero_eu_rate=0.3)
    a = certify_bounds(gen, 50, seed=3)
    b = certify_bounds(gen, 50, seed=3)
    assert (a.checks, a.violations) == (b.checks, b.violations)


def test_certify_detects_broken_bound(monkeypatch):
    monkeypatch.setattr(oracle, "eure", lambda utility, eu: utility)
    report = certify_bounds(lambda rng: random_database(rng), 200, seed=1)
    assert not report.ok
    line = report.violations[0]
    assert line.startswith("seed=") and "db=[" in line and "expected" in line


def test_utility_keyed_zero_branch_would_be_unsound(monkeypatch):
    # zero-utility items are still valid candidates and must keep the bound alive
    monkeypatch.setattr(oracle, "eule",
                        lambda utility, eu: utility + eu.extend if eu.extend else 0)
    monkeypatch.setattr(oracle, "reeu", oracle.eule)
    report = certify_bounds(lambda rng: random_database(rng, zero_eu_rate=0.5), 400, seed=7)
    assert not report.ok


def test_certify_zero_trials():
    assert certify_bounds(lambda rng: random_database(rng), 0).format().startswith("0 trials")
