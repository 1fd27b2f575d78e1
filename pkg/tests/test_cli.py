import json
import subprocess
import sys

import pytest

from sriu.cli import main
from sriu.formats import load_database
from sriu.oracle import brute_force_husr
from sriu.synth import dataset_stats

from conftest import DATA


def mine_args(tmp_path, *extra, name="rules.tsv"):
    out = tmp_path / name
    argv = ["mine", "--data", str(DATA / "sample.txt"), "--utils", str(DATA / "sample.utils"),
            "--out", str(out), *extra]
    return argv, out


def test_mine_matches_frozen_file(tmp_path, sample):
    argv, out = mine_args(tmp_path, "--min-util", "40", "--min-conf", "0.5", "--min-ratio", "0",
                          "--mode", "no-ratio")
    assert main(argv) == 0
    frozen = (DATA / "sample_noratio_40_05.tsv").read_text()
    assert out.read_text() == frozen
    # the frozen file itself is the oracle's set
    rules = {(line.split("\t")[0], line.split("\t")[2]) for line in frozen.splitlines()}
    expected = {(",".join(sample.labels(r.antecedent)), ",".join(sample.labels(r.consequent)))
                for r in brute_force_husr(sample, 40, 0.5)}
    assert rules == expected


def test_line_format(tmp_path):
    argv, out = mine_args(tmp_path, "--min-util", "60", "--min-conf", "1.0", "--mode", "lr")
    assert main(argv) == 0
    fields = out.read_text().splitlines()[0].split("\t")
    assert fields[1] == "==>"
    assert [f.split(":")[0] for f in fields[3:]] == \
        ["#UTIL", "#CONF", "#CONV", "#SUP", "#PARENT_UTIL", "#EXP"]


def test_empty_output(tmp_path):
    argv, out = mine_args(tmp_path, "--min-util", "379", "--min-conf", "0.5")
    assert main(argv) == 0
    assert out.read_text() == ""


def test_jsonl_and_manifest(tmp_path):
    manifest = tmp_path / "run.json"
    argv, out = mine_args(tmp_path, "--min-util", "40", "--min-conf", "0.5", "--format", "jsonl",
                          "--manifest", str(manifest), "--report", str(tmp_path / "q.txt"))
    assert main(argv) == 0
    first = json.loads(out.read_text().splitlines()[0])
    assert set(first) >= {"antecedent", "consequent", "utility", "expansion"}
    data = json.loads(manifest.read_text())
    assert data["config"]["min_util"] == 40
    assert len(data["inputs"]["data"]) == 64
    assert "peak_idset_bytes" in data["telemetry"]
    assert "lineage pairs" in (tmp_path / "q.txt").read_text()


@pytest.mark.parametrize("extra", [
    ["--min-util", "40", "--min-conf", "0"],
    ["--min-util", "40", "--min-conf", "0.5", "--mode", "sideways"],
    ["--min-util", "40"],
])
def test_usage_errors(tmp_path, extra, capsys):
    argv, _ = mine_args(tmp_path, *extra)
    assert main(argv) == 2


def test_missing_inputs_is_usage_error(capsys):
    assert main(["mine", "--min-util", "1", "--min-conf", "0.5"]) == 2
    assert main([]) == 2


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("a:1 -1 a:2 -2\n")
    code = main(["mine", "--data", str(bad), "--utils", str(DATA / "sample.utils"),
                 "--min-util", "1", "--min-conf", "0.5"])
    assert code == 1
    assert "line 1" in capsys.readouterr().err


def test_missing_file_exit(tmp_path, capsys):
    code = main(["mine", "--data", str(tmp_path / "nope"), "--utils", str(tmp_path / "nope"),
                 "--min-util", "1", "--min-conf", "0.5"])
    assert code == 1


def test_spmf_input(tmp_path):
    path = tmp_path / "d.spmf"
    path.write_text("1[2] -1 2[3] -1 -2 SUtility:5\n1[1] -1 2[1] -2 SUtility:2\n")
    out = tmp_path / "r.tsv"
    assert main(["mine", "--spmf", str(path), "--min-util", "1", "--min-conf", "0.5",
                 "--out", str(out)]) == 0
    assert out.read_text().startswith("1\t==>\t2\t#UTIL: 7")


def test_gen(tmp_path, capsys):
    data, utils = tmp_path / "g.txt", tmp_path / "g.utils"
    argv = ["gen", "--sequences", "2000", "--items", "50", "--avg-seq-len", "4",
            "--avg-itemset-size", "2", "--seed", "5", "--out-data", str(data),
            "--out-utils", str(utils)]
    assert main(argv) == 0
    first = data.read_bytes()
    assert "density=" in capsys.readouterr().out
    assert main(argv) == 0
    assert data.read_bytes() == first
    stats = dataset_stats(load_database(data, utils))
    # each item appears in a sequence with probability about L * n / |I|
    assert stats.density == pytest.approx(4 * 2 / 50, rel=0.2)


@pytest.mark.parametrize("bad", [["--sequences", "0"], ["--avg-seq-len", "0.5"]])
def test_gen_usage(tmp_path, bad):
    argv = ["gen", "--sequences", "10", "--items", "5", "--avg-seq-len", "2",
            "--avg-itemset-size", "1", "--out-data", str(tmp_path / "a"),
            "--out-utils", str(tmp_path / "b")]
    for flag, value in zip(bad[::2], bad[1::2]):
        argv[argv.index(flag) + 1] = value
    assert main(argv) == 2


def test_verify(capsys):
    assert main(["verify", "--trials", "0"]) == 0
    assert "no trials" in capsys.readouterr().out
    assert main(["verify", "--trials", "5", "--seed", "9"]) == 0
    first = capsys.readouterr().out
    assert "0 mismatches" in first and "0 violations" in first
    main(["verify", "--trials", "5", "--seed", "9"])
    assert capsys.readouterr().out == first
    assert main(["verify", "--trials", "1", "--max-items", "9"]) == 2


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    base = ["sweep", "--data", str(DATA / "sample.txt"), "--utils", str(DATA / "sample.utils"),
            "--min-util", "20", "--min-conf", "0.3", "--out", str(out), "--no-timing"]
    assert main(base + ["--ratios", "0.01,0.05,0.17"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "min_ratio,rule_count,avg_confidence,runtime_ms" and len(lines) == 4
    counts = [int(line.split(",")[1]) for line in lines[1:]]
    assert counts == sorted(counts, reverse=True)
    first = out.read_text()
    assert main(base + ["--ratios", "0.01,0.05,0.17"]) == 0
    assert out.read_text() == first
    assert main(base + ["--ratios", "0.1"]) == 0
    assert len(out.read_text().splitlines()) == 2
    assert main(base + ["--ratios", "0.1,0.1"]) == 0
    a, b = out.read_text().splitlines()[1:]
    assert a == b
    assert main(base + ["--ratios", "0.2,0.1"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sriu", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.1.0"
