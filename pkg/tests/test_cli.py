import io
import json
import subprocess
import sys

import pytest

from bitextkit.cli import COMMANDS, dispatch
from conftest import FIXTURE
from synth import synthetic_stream
from bitextkit.filtering import format_record


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    return dispatch(argv)


def make_profiles(root):
    d = root / "profiles"
    d.mkdir()
    vocab = {"a1": "x y z w", "a2": "x y z v", "b1": "p q r s", "b2": "p q r t", "big": "m n o"}
    for iso, toks in vocab.items():
        write(d / f"{iso}.tsv", "".join(f"{t}\t{i + 1}\n" for i, t in enumerate(toks.split())))
    sizes = write(root / "sizes.tsv", "iso\tsentences\na1\t10\na2\t12\nb1\t9\nb2\t11\nbig\t500\n")
    return str(d), sizes


class TestExitCodes:
    def test_plan_build_happy_path(self, workdir):
        assert dispatch(["plan", "build", "--strategy", "bridge", "--catalog", str(FIXTURE)]) == 0
        plan = workdir / "m2m100.bridge.plan.tsv"
        assert plan.exists()
        meta = json.loads((workdir / "m2m100.bridge.plan.json").read_text())
        assert meta["strategy"] == "bridge" and meta["pairs"] == 820
        manifest = json.loads((workdir / "m2m100.bridge.plan.tsv.manifest.json").read_text())
        assert manifest["subcommand"] == "plan build"
        assert str(FIXTURE) in manifest["inputs"]

    def test_infeasible_sinkhorn_names_language(self, workdir, capsys):
        pairs = write(workdir / "pairs.tsv", "src\ttgt\tsentence_pairs\naa\tbb\t10\naa\tcc\t0\n")
        marg = write(workdir / "p.tsv", "aa\t1\nbb\t1\ncc\t1\n")
        code = dispatch(["sinkhorn", "solve", "--pairs", pairs, "--marginals", marg, "--out", "P.tsv"])
        assert code == 1
        assert "cc" in capsys.readouterr().err

    def test_rate_out_of_range_is_usage_error(self, workdir, capsys):
        assert dispatch(["route", "simulate", "--grouping", "g.json", "--rate", "1.5", "--n", "3", "--seed", "1"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert dispatch(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_seed_required(self, workdir):
        assert dispatch(["sinkhorn", "sample", "--matrix", "P.tsv", "--n", "3"]) == 2
        assert dispatch(["plan", "build", "--strategy", "random", "--sparsity", "0.5",
                         "--catalog", str(FIXTURE)]) == 2

    def test_bad_catalog(self, workdir, capsys):
        bad = write(workdir / "bad.tsv", "iso\tname\n")
        assert dispatch(["catalog", "validate", "--catalog", bad]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_file(self, workdir):
        assert dispatch(["bt", "select", "--scores", "nope.tsv"]) == 1

    def test_unconverged_reports_diagnostics(self, workdir):
        pairs = write(workdir / "star.tsv", "a\tb\t1\na\tc\t1\n")
        marg = write(workdir / "m.tsv", "a\t1\nb\t1\nc\t1\n")
        code = dispatch(["sinkhorn", "solve", "--pairs", pairs, "--marginals", marg, "--max-iter", "50",
                         "--out", "P.tsv"])
        assert code == 1
        diag = json.loads((workdir / "P.tsv.diagnostics.json").read_text())
        assert diag["converged"] is False and diag["iterations"] == 50


class TestManifests:
    def test_every_command_writes_manifest(self, workdir, monkeypatch):
        prof, sizes = make_profiles(workdir)
        write(workdir / "scores.tsv", "a\tb\t3.0\n")
        write(workdir / "counts.tsv", "a\t16\nb\t1\n")
        write(workdir / "dict.txt", "x\n")
        records = "".join(format_record(r) for r in synthetic_stream(50))
        write(workdir / "recs.tsv", records)
        write(workdir / "lp.jsonl", "[[0.0, -1e9]]\n")
        write(workdir / "lang_sizes.tsv", "en\t90\nru\t40\nel\t10\nhi\t20\n")
        steps = [
            ["catalog", "validate", "--catalog", str(FIXTURE), "--out", "cat.json"],
            ["plan", "build", "--strategy", "full", "--catalog", str(FIXTURE), "--out", "full.tsv"],
            ["plan", "sparsity", "--catalog", str(FIXTURE), "--plan", "full.tsv", "--out", "s.json"],
            ["bt", "select", "--scores", "scores.tsv", "--out", "bt.tsv"],
            ["sinkhorn", "solve", "--catalog", str(FIXTURE), "--out", "P.tsv"],
            ["sinkhorn", "sample", "--matrix", "P.tsv", "--n", "10", "--seed", "1", "--out", "draws.tsv"],
            ["rescale", "--counts", "counts.tsv", "--out", "q.tsv"],
            ["coverage", "--dictionary", "dict.txt", "--corpus", prof, "--out", "cov.tsv"],
            ["filter", "run", "--input", "recs.tsv", "--output", "kept.tsv", "--report", "rep.json"],
            ["shard", "plan", "--sizes", "lang_sizes.tsv", "--target-shard-size", "5", "--out", "shards.json"],
            ["shard", "assign", "--plan", "shards.json", "--input", "kept.tsv", "--output", "sharded.tsv"],
            ["groups", "build", "--profiles", prof, "--sizes", sizes, "--threshold", "100", "--clusters", "2",
             "--out", "g.json"],
            ["route", "simulate", "--grouping", "g.json", "--rate", "0.2", "--n", "20", "--seed", "3",
             "--out", "routes.jsonl"],
            ["ensemble", "combine", "--input", "lp.jsonl", "--weights", "1", "--out", "ens.jsonl"],
        ]
        covered = set()
        for argv in steps:
            assert dispatch(argv) == 0, argv
            out = argv[argv.index("--out") + 1] if "--out" in argv else argv[argv.index("--output") + 1]
            manifest = json.loads((workdir / f"{out}.manifest.json").read_text())
            assert manifest["argv"] == argv
            assert "time" not in json.dumps(manifest)
            covered.add((argv[0], argv[1] if argv[0] in ("catalog", "plan", "bt", "sinkhorn", "filter", "shard",
                                                         "groups", "route", "ensemble") else None))
        listed = {(g, c) for g, cmds in COMMANDS.items() if g != "manifest" for c in (cmds or (None,))}
        assert covered == listed

    def test_manifest_location_flag(self, workdir):
        write(workdir / "c.tsv", "a\t1\nb\t3\n")
        assert dispatch(["--manifest", "run.json", "rescale", "--counts", "c.tsv"]) == 0
        assert json.loads((workdir / "run.json").read_text())["subcommand"] == "rescale"

    @pytest.mark.parametrize("argv, outputs", [
        (["plan", "build", "--strategy", "random_with_en", "--sparsity", "0.9", "--seed", "4",
          "--catalog", str(FIXTURE), "--out", "r.tsv"], ["r.tsv", "r.json"]),
        (["route", "simulate", "--grouping", "g.json", "--rate", "0.5", "--n", "500", "--seed", "9",
          "--out", "d.jsonl"], ["d.jsonl", "d.jsonl.summary.json"]),
        (["sinkhorn", "sample", "--matrix", "P.tsv", "--n", "1000", "--seed", "2", "--out", "s.tsv"], ["s.tsv"]),
    ])
    def test_replay_is_byte_identical(self, workdir, argv, outputs):
        prof, sizes = make_profiles(workdir)
        assert dispatch(["groups", "build", "--profiles", prof, "--sizes", sizes, "--threshold", "100",
                         "--clusters", "2", "--out", "g.json"]) == 0
        assert dispatch(["sinkhorn", "solve", "--catalog", str(FIXTURE), "--out", "P.tsv"]) == 0
        assert dispatch(argv) == 0
        first = {o: (workdir / o).read_bytes() for o in outputs}
        manifest_path = workdir / f"{outputs[0]}.manifest.json"
        manifest = manifest_path.read_bytes()
        for o in outputs:
            (workdir / o).unlink()
        assert dispatch(["manifest", "replay", str(manifest_path)]) == 0
        assert {o: (workdir / o).read_bytes() for o in outputs} == first
        assert manifest_path.read_bytes() == manifest


class TestStreaming:
    def test_filter_then_assign_via_stdio(self, workdir, monkeypatch, capsys):
        sizes = write(workdir / "sizes.tsv", "en\t9000\nru\t9000\nel\t10\nhi\t4000\n")
        assert dispatch(["shard", "plan", "--sizes", sizes, "--target-shard-size", "1000", "--out", "sh.json"]) == 0
        records = "".join(format_record(r) for r in synthetic_stream(400, seed=5))
        assert run(["filter", "run", "--report", "rep.json"], records, monkeypatch) == 0
        kept = capsys.readouterr().out
        assert run(["shard", "assign", "--plan", "sh.json"], kept, monkeypatch) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == len(kept.splitlines())
        assert all(line.split("\t")[:5] == k.split("\t")[:5] for line, k in zip(lines, kept.splitlines()))
        report = json.loads((workdir / "rep.json").read_text())
        assert report["input_count"] == 400
        assert report["input_count"] == report["kept_count"] + sum(report["drops"].values())

    def test_workers_same_bytes(self, workdir):
        records = "".join(format_record(r) for r in synthetic_stream(3000, seed=6))
        write(workdir / "in.tsv", records)
        for w in ("1", "3"):
            assert dispatch(["filter", "run", "--input", "in.tsv", "--output", f"k{w}.tsv",
                             "--report", f"r{w}.json", "--workers", w]) == 0
        assert (workdir / "k1.tsv").read_bytes() == (workdir / "k3.tsv").read_bytes()
        write(workdir / "sizes.tsv", "en\t9000\nru\t9000\nel\t8000\nhi\t4000\n")
        assert dispatch(["shard", "plan", "--sizes", "sizes.tsv", "--target-shard-size", "1000",
                         "--out", "sh.json"]) == 0
        for w in ("1", "4"):
            assert dispatch(["shard", "assign", "--plan", "sh.json", "--input", "k1.tsv", "--output", f"a{w}.tsv",
                             "--workers", w]) == 0
        assert (workdir / "a1.tsv").read_bytes() == (workdir / "a4.tsv").read_bytes()

    def test_jsonl_assign_adds_shard_field(self, workdir, monkeypatch, capsys):
        write(workdir / "sizes.tsv", "en\t9000\nfr\t9000\n")
        dispatch(["shard", "plan", "--sizes", "sizes.tsv", "--target-shard-size", "1000", "--out", "sh.json"])
        line = json.dumps({"src_lang": "en", "tgt_lang": "fr", "src_text": "a b", "tgt_text": "c d"}) + "\n"
        assert run(["shard", "assign", "--plan", "sh.json", "--format", "jsonl"], line, monkeypatch) == 0
        obj = json.loads(capsys.readouterr().out)
        assert 0 <= obj["shard"] < 8


def test_ensemble_combine(workdir, monkeypatch, capsys):
    import math
    a = [math.log(0.9), math.log(0.1)]
    b = [math.log(0.2), math.log(0.8)]
    assert run(["ensemble", "combine", "--weights", "0.5,0.5"], json.dumps([a, b]) + "\n", monkeypatch) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["argmax"] == 0
    assert out["scores"][0] == pytest.approx(0.5 * (a[0] + b[0]))
    assert run(["ensemble", "combine", "--weights", "0.7,0.7"], json.dumps([a, b]) + "\n", monkeypatch) == 1


def test_route_summary(workdir):
    prof, sizes = make_profiles(workdir)
    dispatch(["groups", "build", "--profiles", prof, "--sizes", sizes, "--threshold", "100", "--clusters", "2",
              "--out", "g.json"])
    assert dispatch(["route", "simulate", "--grouping", "g.json", "--rate", "0.2", "--n", "20000", "--seed", "1",
                     "--side", "decoder", "--out", "d.jsonl", "--profiles", prof]) == 0
    summary = json.loads((workdir / "d.jsonl.summary.json").read_text())
    assert abs(summary["empirical_rate"] - 0.2) < 0.01
    assert sum(summary["per_group"]) == 20000


def test_console_script_entry_point(workdir):
    out = subprocess.run([sys.executable, "-m", "bitextkit", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "bitextkit" in out.stdout
