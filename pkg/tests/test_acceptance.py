"""Acceptance gate: one PASS/FAIL line per criterion in the terminal summary."""
import subprocess
import sys
import time

import pytest

from sriu.analysis import ratio_sweep
from sriu.cli import format_rules, main
from sriu.engine import MiningConfig, mine, variant_config
from sriu.model import rule_confidence, rule_utility, itemset_utility, total_item_utility
from sriu.oracle import brute_force_ratio_set, certify_bounds, enumerate_all_rules
from sriu.preprocess import build_ipeum, compute_seu, generate_seed_rules, rule_seu
from sriu.synth import generate, random_database
from sriu.tables import LEFT_RIGHT, UTable, eule, eure
from sriu.idset import idset_from

from conftest import ACCEPTANCE, DATA, fuzz_databases


def record(number, ok, detail):
    ACCEPTANCE.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="module")
def fuzz_corpus():
    return [db for _, db in fuzz_databases(200, seed=2024)]


@pytest.fixture(scope="module")
def big10k():
    return generate(10_000, 20, 3, 1.3, seed=7)


@pytest.fixture(scope="module")
def sparse20k():
    return generate(20_000, 400, 3, 1.2, seed=11)


def test_criterion_1_worked_examples(sample):
    start = time.perf_counter()
    db = sample
    ids = db.ids
    seeds = dict(generate_seed_rules(db, 0).seeds)
    ad = seeds[db.rule("a", "d")]
    (el,) = ad.elements
    ad_table = UTable.from_temp(ad, LEFT_RIGHT, idset_from(ad.sids, "compressed", len(db)),
                                idset_from([0, 1, 2], "compressed", len(db)))
    bc = {e.sid: e for e in seeds[db.rule("b", "c")].elements}
    checks = {
        "u(a)": (total_item_utility(ids("a")[0], db), 54),
        "u({a,b})": (itemset_utility(ids("ab"), db), 29),
        "u({a}->{e})": (rule_utility(db.rule("a", "e"), db), 63),
        "conf({a}->{e})": (rule_confidence(db.rule("a", "e"), db), 1.0),
        "SU": (list(db.sequence_utilities), [113, 83, 59, 110, 13]),
        "SEU(g)": (compute_seu(db)[ids("g")[0]], 72),
        "SEU({b}->{f})": (rule_seu(db.rule("b", "f"), db), 196),
        "IPEUM(a,c)": (build_ipeum(db).get(*ids("ac")), 172),
        "TempTable({a}->{d})": (
            (ad.tu, ad.sum_eu, el.eu.ul, el.eu.ulr, el.eu.ur, el.eu.il, el.eu.ir, el.e),
            (19, 120, 36, 65, 0, 4, 2, -1)),
        "UBPart({a}->{d})": (ad_table.ub_part, 84),
        "EURE({b}->{c},s1)": (eure(bc[0].utility, bc[0].eu), 111),
        "EURE({b}->{c},s4)": (eure(bc[3].utility, bc[3].eu), 90),
        "EULE({b}->{c},s1)": (eule(bc[0].utility, bc[0].eu), 111),
        "EULE({b}->{c},s4)": (eule(bc[3].utility, bc[3].eu), 110),
    }
    elapsed = time.perf_counter() - start
    wrong = {k: v for k, v in checks.items() if v[0] != v[1]}
    ok = not wrong and elapsed < 1.0
    detail = f"{len(checks) - len(wrong)}/{len(checks)} values exact, {elapsed:.3f}s"
    if wrong:
        detail += "; mismatches (got, stated): " + "; ".join(f"{k} {v[0]} vs {v[1]}"
                                                           for k, v in wrong.items())
    record(1, ok, detail)
    assert ok, detail


def test_criterion_2_oracle_equivalence(fuzz_corpus):
    start = time.perf_counter()
    cases = mismatches = 0
    for db in fuzz_corpus:
        stats = {s.rule: s for s in enumerate_all_rules(db)}
        total = db.total_utility()
        for frac in (0, 0.25, 0.5, 0.75):
            for conf in (0.2, 0.6, 1.0):
                for ratio in (0, 0.1):
                    for mode in ("auto", "lr", "rl", "no-ratio"):
                        result = mine(db, MiningConfig(frac * total, conf, ratio, mode=mode))
                        expected = brute_force_ratio_set(
                            db, frac * total, conf, ratio,
                            "lr" if mode == "no-ratio" else mode,
                            "none" if mode == "no-ratio" else "growth",
                            result.seed_modes, stats=stats)
                        cases += 1
                        mismatches += result.rule_set() != expected
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    record(2, ok, f"{len(fuzz_corpus)} databases, {cases} configs, {mismatches} mismatches, "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_3_pruning_lossless(fuzz_corpus, big10k):
    start = time.perf_counter()
    differ = runs = 0
    for db in fuzz_corpus:
        total = db.total_utility()
        for frac, conf, ratio, mode in ((0.1, 0.6, 0.1, "auto"), (0.25, 0.2, 0, "lr"),
                                        (0.05, 1.0, 0.1, "rl"), (0.25, 0.6, 0, "no-ratio")):
            on = mine(db, MiningConfig(frac * total, conf, ratio, mode=mode))
            off = mine(db, MiningConfig(frac * total, conf, ratio, mode=mode,
                                        confp=False, ipeup=False))
            runs += 1
            differ += on.rule_set() != off.rule_set()
    total = big10k.total_utility()
    big_sizes, cuts = [], 0
    for frac, conf, ratio in ((0.008, 0.1, 0.0), (0.012, 0.05, 0.05), (0.02, 0.05, 0.0)):
        on = mine(big10k, MiningConfig(frac * total, conf, ratio))
        off = mine(big10k, MiningConfig(frac * total, conf, ratio, confp=False, ipeup=False))
        runs += 1
        differ += on.rule_set() != off.rule_set()
        big_sizes.append(len(on))
        cuts += on.counters["confp_cuts"] + on.counters["ipeup_skips"]
    elapsed = time.perf_counter() - start
    ok = differ == 0 and elapsed < 120 and any(big_sizes) and cuts > 0
    record(3, ok, f"{runs} on/off pairs, {differ} differ, 10k rules {big_sizes} "
                  f"with {cuts} CONFP/IPEUP cuts, {elapsed:.1f}s")
    assert ok


def test_criterion_4_bounds():
    start = time.perf_counter()
    report = certify_bounds(lambda rng: random_database(rng, max_sequences=5), 1000, seed=4)
    elapsed = time.perf_counter() - start
    ok = report.ok and elapsed < 30
    record(4, ok, f"{report.trials} trials, {report.checks} checks, "
                  f"{len(report.violations)} violations, {elapsed:.1f}s")
    assert ok, report.format()


def test_criterion_5_ratio_chain(fuzz_corpus, sparse20k):
    bad = checked = 0
    for db in fuzz_corpus:
        total = db.total_utility()
        for ratio in (0, 0.1, 0.5):
            cfg = MiningConfig(0.1 * total, 0.2, ratio)
            for m in mine(db, cfg).rules:
                if m.expansion == "seed":
                    continue
                checked += 1
                bad += m.utility < max(cfg.min_util, (1 + ratio) * m.parent_utility)
    ratios = [0.01, 0.05, 0.09, 0.13, 0.17]
    rows = ratio_sweep(sparse20k, MiningConfig(0.0002 * sparse20k.total_utility(), 0.05), ratios)
    counts = [r.rule_count for r in rows]
    monotone = all(b <= a for a, b in zip(counts, counts[1:]))
    drop = 1 - counts[-1] / counts[0] if counts[0] else 0.0
    ok = bad == 0 and monotone
    record(5, ok, f"{checked} lineage steps, {bad} below threshold; sweep counts {counts} "
                  f"(drop {100 * drop:.1f}%, avg conf {rows[0].avg_confidence:.3f}"
                  f" -> {rows[-1].avg_confidence:.3f})")
    assert ok


def test_criterion_6_backends(sample, fuzz_corpus, sparse20k):
    fixtures = [(sample, MiningConfig(20, 0.3, 0.05))]
    fixtures += [(db, MiningConfig(0.1 * db.total_utility(), 0.2, 0.1)) for db in fuzz_corpus]
    differ = 0
    for db, cfg in fixtures:
        a = format_rules(mine(db, cfg), db)
        b = format_rules(mine(db, variant_config("V2", cfg.min_util, cfg.min_conf,
                                                 min_ratio=cfg.min_ratio)), db)
        differ += a != b
    cfg = MiningConfig(0.0002 * sparse20k.total_utility(), 0.05)
    comp = mine(sparse20k, cfg)
    flat = mine(sparse20k, variant_config("V2", cfg.min_util, cfg.min_conf))
    differ += format_rules(comp, sparse20k) != format_rules(flat, sparse20k)
    cb, fb = comp.telemetry()["peak_idset_bytes"], flat.telemetry()["peak_idset_bytes"]
    ok = differ == 0 and cb < fb and len(comp) > 0
    record(6, ok, f"{len(fixtures) + 1} fixtures, {differ} differ; 20k peak id-set bytes "
                  f"compressed {cb} < flat {fb}")
    assert ok


def test_criterion_7_determinism(tmp_path, sample, fuzz_corpus):
    outputs = []
    for k in range(3):
        out = tmp_path / f"r{k}.tsv"
        main(["mine", "--data", str(DATA / "sample.txt"), "--utils", str(DATA / "sample.utils"),
              "--min-util", "20", "--min-conf", "0.3", "--min-ratio", "0.05", "--out", str(out)])
        outputs.append(out.read_bytes())
    proc = subprocess.run(
        [sys.executable, "-m", "sriu", "mine", "--data", str(DATA / "sample.txt"),
         "--utils", str(DATA / "sample.utils"), "--min-util", "20", "--min-conf", "0.3",
         "--min-ratio", "0.05"], capture_output=True)
    outputs.append(proc.stdout)
    identical = len(set(outputs)) == 1 and outputs[0]
    not_superset = 0
    fixtures = [sample] + fuzz_corpus
    for db in fixtures:
        total = db.total_utility()
        for frac, conf in ((0.05, 0.2), (0.25, 0.6)):
            husr = mine(db, variant_config("V7", frac * total, conf)).rule_set()
            for v in ("V1", "V5", "V6"):
                sub = mine(db, variant_config(v, frac * total, conf, min_ratio=0.1)).rule_set()
                not_superset += not sub <= husr
    ok = bool(identical) and not_superset == 0
    record(7, ok, f"4 mine runs byte-identical: {bool(identical)}; V7 superset violations "
                  f"{not_superset} over {len(fixtures)} fixtures")
    assert ok
