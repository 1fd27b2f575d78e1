"""Command-line entry point: ``sriu mine|gen|verify|sweep``.

Exit codes: 0 success, 1 data error, 2 usage error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import random
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .analysis import SweepError, format_conviction, ratio_sweep, sweep_csv, sweep_text
from .engine import ConfigError, MiningConfig, MiningResult, mine
from .formats import ParseError, load_database, load_spmf, write_database
from .model import SequenceDatabase
from .oracle import brute_force_ratio_set, certify_bounds, enumerate_all_rules, OracleLimits
from .synth import dataset_stats, generate, random_database

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("sriu")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict[str, str]
    version: str = __version__
    duration_s: float = 0.0
    telemetry: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


# -- shared flags --------------------------------------------------------------

def _add_input_flags(p):
    p.add_argument("--data", help="native q-sequence file")
    p.add_argument("--utils", help="external utility file for --data")
    p.add_argument("--spmf", help="SPMF utility-format file (instead of --data/--utils)")


def _add_mining_flags(p, ratio=True):
    p.add_argument("--min-util", type=float, required=True)
    p.add_argument("--min-conf", type=float, required=True)
    if ratio:
        p.add_argument("--min-ratio", type=float, default=0.0)
    p.add_argument("--ratio-semantics", choices=("growth", "literal"), default="growth")
    p.add_argument("--mode", choices=("auto", "lr", "rl", "no-ratio"), default="auto")
    p.add_argument("--no-confp", action="store_true", help="disable confidence pruning")
    p.add_argument("--no-ipeup", action="store_true", help="disable pair-index pruning")
    p.add_argument("--idset", choices=("compressed", "flat"), default="compressed")


def _load(args) -> tuple[SequenceDatabase, dict[str, str]]:
    if args.spmf and (args.data or args.utils):
        raise UsageError("use either --spmf or --data/--utils")
    if args.spmf:
        return load_spmf(args.spmf), {"spmf": _sha256(args.spmf)}
    if not (args.data and args.utils):
        raise UsageError("--data and --utils are both required (or use --spmf)")
    return load_database(args.data, args.utils), {"data": _sha256(args.data),
                                                   "utils": _sha256(args.utils)}


def _config(args, min_ratio=None) -> MiningConfig:
    try:
        return MiningConfig(
            min_util=args.min_util, min_conf=args.min_conf,
            min_ratio=args.min_ratio if min_ratio is None else min_ratio,
            ratio_semantics=args.ratio_semantics, mode=args.mode,
            confp=not args.no_confp, ipeup=not args.no_ipeup, idset=args.idset)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _number(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if value.is_integer():
            return str(int(value))
        return f"{value:.6f}".rstrip("0")
    return str(value)


def format_rules(result: MiningResult, db: SequenceDatabase, fmt: str = "tsv") -> str:
    lines = []
    for m in result.rules:
        ant = ",".join(db.labels(m.rule.antecedent))
        cons = ",".join(db.labels(m.rule.consequent))
        if fmt == "jsonl":
            lines.append(json.dumps({
                "antecedent": ant.split(","), "consequent": cons.split(","),
                "utility": m.utility, "confidence": round(m.confidence, 6),
                "conviction": format_conviction(m.conviction), "support": m.support,
                "parent_utility": m.parent_utility, "expansion": m.expansion,
            }, sort_keys=True))
        else:
            lines.append("\t".join([
                ant, "==>", cons, f"#UTIL: {_number(m.utility)}",
                f"#CONF: {m.confidence:.6f}", f"#CONV: {format_conviction(m.conviction)}",
                f"#SUP: {m.support}", f"#PARENT_UTIL: {_number(m.parent_utility)}",
                f"#EXP: {m.expansion}"]))
    return "".join(line + "\n" for line in lines)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as out:
            out.write(text)


# -- commands ------------------------------------------------------------------

def cmd_mine(args) -> int:
    config = _config(args)
    db, digests = _load(args)
    start = time.perf_counter()
    result = mine(db, config)
    duration = time.perf_counter() - start
    _write(args.out, format_rules(result, db, args.format))
    if args.manifest:
        manifest = RunManifest("mine", config.to_dict(), digests, duration_s=round(duration, 6),
                               telemetry=result.telemetry())
        _write(args.manifest, manifest.to_json())
    if args.report:
        from .analysis import rise_ratios
        _write(args.report, rise_ratios(result).format() + "\n")
    print(f"{len(result)} rules in {duration:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        db = generate(args.sequences, args.items, args.avg_seq_len, args.avg_itemset_size,
                      args.max_qty, args.max_eu, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_database(db, args.out_data, args.out_utils)
    print(dataset_stats(db).format())
    return EXIT_OK


def _equivalence_trial(rng: random.Random, max_seq: int, max_items: int) -> list[str]:
    """Compare the engine with the brute-force forest walk on one random database."""
    db = random_database(rng, max_sequences=max_seq, max_items=max_items)
    stats = {s.rule: s for s in enumerate_all_rules(db)}
    total = db.total_utility()
    failures = []
    for frac in (0, 0.25, 0.5, 0.75):
        for conf in (0.2, 0.6, 1.0):
            for ratio in (0, 0.1):
                for mode in ("auto", "lr", "rl", "no-ratio"):
                    cfg = MiningConfig(frac * total, conf, ratio, mode=mode)
                    result = mine(db, cfg)
                    expected = brute_force_ratio_set(
                        db, cfg.min_util, conf, ratio,
                        mode="lr" if mode == "no-ratio" else mode,
                        ratio_semantics="none" if mode == "no-ratio" else "growth",
                        seed_modes=result.seed_modes, stats=stats)
                    got = result.rule_set()
                    if got != expected:
                        missing = sorted(r.format(db) for r in expected - got)
                        extra = sorted(r.format(db) for r in got - expected)
                        failures.append(f"config={cfg.to_dict()} missing={missing} extra={extra}")
    return failures


def cmd_verify(args) -> int:
    if args.trials == 0:
        print("no trials requested; nothing to verify")
        return EXIT_OK
    if args.max_seq > 8 or args.max_items > 7:
        raise UsageError("oracle limits are 8 sequences and 7 items")
    bad = 0
    for trial in range(args.trials):
        trial_seed = args.seed * 1_000_003 + trial
        for failure in _equivalence_trial(random.Random(trial_seed), args.max_seq, args.max_items):
            bad += 1
            print(f"equivalence seed={trial_seed} {failure}")
    limits = OracleLimits(args.max_seq, args.max_items)
    report = certify_bounds(
        lambda rng: random_database(rng, max_sequences=args.max_seq, max_items=args.max_items),
        args.trials, seed=args.seed, limits=limits)
    print(f"equivalence: {args.trials} databases, {bad} mismatches")
    print("bounds: " + report.format())
    return EXIT_OK if bad == 0 and report.ok else EXIT_VERIFY


def _parse_ratios(text: str) -> list[float]:
    try:
        ratios = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"bad ratio list {text!r}") from None
    if not ratios:
        raise UsageError("empty ratio list")
    if any(b < a for a, b in zip(ratios, ratios[1:])):
        raise UsageError("ratios must be listed in ascending order")
    return ratios


def cmd_sweep(args) -> int:
    ratios = _parse_ratios(args.ratios)
    config = _config(args, min_ratio=ratios[0])
    if config.ratio_semantics != "growth":
        raise UsageError("sweep requires growth semantics")
    db, _ = _load(args)
    try:
        rows = ratio_sweep(db, config, ratios)
    except SweepError as exc:
        print(f"sweep check failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    _write(args.out, sweep_csv(rows, include_runtime=not args.no_timing))
    print(sweep_text(rows), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sriu", description="High-utility sequential rules with rising utility.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", help="mine rules from a database")
    _add_input_flags(p)
    _add_mining_flags(p)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--manifest", help="write a JSON run manifest here")
    p.add_argument("--report", help="write a rule-quality report here")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("gen", help="generate a synthetic database")
    p.add_argument("--sequences", type=int, required=True)
    p.add_argument("--items", type=int, required=True)
    p.add_argument("--avg-seq-len", type=float, required=True)
    p.add_argument("--avg-itemset-size", type=float, required=True)
    p.add_argument("--max-qty", type=int, default=10)
    p.add_argument("--max-eu", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-utils", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check the engine against the brute-force oracle")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-seq", type=int, default=8)
    p.add_argument("--max-items", type=int, default=7)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="rule counts across rising minimum ratios")
    p.add_argument("--ratios", required=True, help="ascending comma-separated list")
    _add_input_flags(p)
    _add_mining_flags(p, ratio=False)
    p.add_argument("--out", default="-")
    p.add_argument("--no-timing", action="store_true",
                   help="leave runtime_ms empty so the CSV is reproducible byte for byte")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sriu: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"sriu: parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"sriu: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
