"""``bitextkit`` command line.

Every subcommand writes a JSON run manifest (``--manifest``, default next to
the primary output) recording argv, a config snapshot, the seed, input
hashes and output paths. ``bitextkit manifest replay <file>`` re-runs it.

Exit status: 0 on success, 1 on a validation error (message on stderr),
2 on a usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import multiprocessing
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from bitextkit import __version__, catalog as cat, filtering, grouping, mining, routing, sampling, sharding

log = logging.getLogger("bitextkit")

COMMANDS = {
    "catalog": ("validate",),
    "plan": ("build", "sparsity"),
    "bt": ("select",),
    "sinkhorn": ("solve", "sample"),
    "rescale": (),
    "coverage": (),
    "filter": ("run",),
    "shard": ("plan", "assign"),
    "groups": ("build",),
    "route": ("simulate",),
    "ensemble": ("combine",),
    "manifest": ("replay",),
}


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------

def _fraction(lo_open=False, hi_open=False):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if (v < 0 or v > 1) or (lo_open and v == 0) or (hi_open and v == 1):
            lo = "(0" if lo_open else "[0"
            hi = "1)" if hi_open else "1]"
            raise argparse.ArgumentTypeError(f"{v} is outside {lo}, {hi}")
        return v
    return parse


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _non_negative_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _weights(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bitextkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"bitextkit {__version__}")
    p.add_argument("--manifest", help="where to write the run manifest")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="group", metavar="COMMAND")
    sub.required = True

    # catalog
    g = sub.add_parser("catalog", help="language catalog").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("validate", help="load a catalog and print a summary")
    _catalog_args(s, required=True)
    s.add_argument("--tiers", default="1000000,10000000", help="low/mid and mid/high bitext thresholds")
    s.add_argument("--out", help="summary JSON (default: stdout)")

    # plan
    g = sub.add_parser("plan", help="mining plans").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("build", help="build a mining plan")
    _catalog_args(s, required=True)
    s.add_argument("--strategy", required=True, choices=mining.STRATEGIES)
    s.add_argument("--sparsity", type=_fraction(), help="target sparsity for random strategies")
    s.add_argument("--seed", type=int, help="required for random strategies")
    s.add_argument("--out", help="plan TSV (default: <catalog stem>.<strategy>.plan.tsv)")
    s = g.add_parser("sparsity", help="sparsity of an existing plan")
    _catalog_args(s, required=True)
    s.add_argument("--plan", required=True)
    s.add_argument("--out", help="JSON (default: stdout)")

    # bt
    g = sub.add_parser("bt", help="backtranslation direction selection").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("select", help="pick directions in a BLEU window")
    s.add_argument("--scores", required=True, help="TSV src, tgt, bleu")
    s.add_argument("--lo", type=float, default=2.0)
    s.add_argument("--hi", type=float, default=10.0)
    s.add_argument("--limit", type=_non_negative_int, default=100)
    s.add_argument("--out", help="TSV (default: stdout)")

    # sinkhorn
    g = sub.add_parser("sinkhorn", help="Sinkhorn temperature sampling").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("solve", help="balance the pair matrix")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--pairs", help="pair-count TSV src, tgt, sentence_pairs")
    src.add_argument("--catalog", help="catalog TSV (its bitext companion supplies the counts)")
    s.add_argument("--marginals", help="TSV iso, value: language distribution to rescale instead of pair mass")
    s.add_argument("--temperature", type=_positive_float, default=sampling.DEFAULT_TEMPERATURE)
    s.add_argument("--tol", type=_positive_float, default=sampling.DEFAULT_TOL)
    s.add_argument("--max-iter", type=_non_negative_int, default=sampling.DEFAULT_MAX_ITER)
    s.add_argument("--seed", type=int, help="recorded only; solving is deterministic")
    s.add_argument("--out", required=True, help="balanced matrix TSV")
    s.add_argument("--diagnostics", help="diagnostics JSON (default: <out>.diagnostics.json)")
    s = g.add_parser("sample", help="draw language pairs from a balanced matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--diagnostics", help="diagnostics JSON from 'sinkhorn solve'")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", help="TSV src, tgt (default: stdout)")

    # rescale / coverage
    s = sub.add_parser("rescale", help="temperature-rescale a language distribution")
    s.add_argument("--counts", required=True, help="TSV iso, count")
    s.add_argument("--temperature", type=_positive_float, default=sampling.DEFAULT_TEMPERATURE)
    s.add_argument("--out", help="TSV iso, probability (default: stdout)")
    s = sub.add_parser("coverage", help="dictionary coverage per language")
    s.add_argument("--dictionary", required=True, help="one token per line (a TSV first column is accepted)")
    s.add_argument("--corpus", required=True, nargs="+",
                   help="iso=token-count TSV pairs, or a directory of <iso>.tsv files")
    s.add_argument("--out", help="TSV iso, coverage (default: stdout)")

    # filter
    g = sub.add_parser("filter", help="bitext filtering").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("run", help="stream records through the filter chain")
    s.add_argument("--config", help="filter config JSON (defaults if omitted)")
    s.add_argument("--report", required=True, help="report JSON")
    _catalog_args(s, required=False)
    s.add_argument("--input", help="record stream (default: stdin)")
    s.add_argument("--output", help="kept records (default: stdout)")
    s.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    s.add_argument("--workers", type=_positive_int, default=1)

    # shard
    g = sub.add_parser("shard", help="training shards").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("plan", help="plan per-language shard counts")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--sizes", help="TSV iso, sentences")
    src.add_argument("--catalog", help="catalog TSV; total bitext per language is the size")
    s.add_argument("--total-shards", type=_positive_int, default=sharding.DEFAULT_TOTAL_SHARDS)
    s.add_argument("--target-shard-size", type=_positive_int, default=1_000_000)
    s.add_argument("--out", required=True, help="plan JSON")
    s = g.add_parser("assign", help="annotate records with a shard column")
    s.add_argument("--plan", required=True)
    s.add_argument("--hash-seed", type=_non_negative_int, default=0)
    s.add_argument("--input", help="record stream (default: stdin)")
    s.add_argument("--output", help="annotated stream (default: stdout)")
    s.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    s.add_argument("--workers", type=_positive_int, default=1)

    # groups
    g = sub.add_parser("groups", help="language groups for sublayers").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("build", help="singletons plus balanced overlap clusters")
    s.add_argument("--profiles", required=True, help="directory of <iso>.tsv token-count files")
    s.add_argument("--sizes", required=True, help="TSV iso, sentences")
    s.add_argument("--threshold", type=float, default=grouping.DEFAULT_SINGLETON_THRESHOLD)
    s.add_argument("--clusters", type=_positive_int, default=grouping.DEFAULT_CLUSTER_COUNT)
    s.add_argument("--slack", type=_positive_float, default=grouping.DEFAULT_BALANCE_SLACK)
    s.add_argument("--top-n", type=_positive_int, default=grouping.DEFAULT_TOP_N)
    s.add_argument("--out", required=True, help="grouping JSON")

    # route
    g = sub.add_parser("route", help="sublayer routing").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("simulate", help="simulate routing decisions")
    s.add_argument("--grouping", required=True)
    s.add_argument("--rate", type=_fraction(hi_open=True), default=routing.DEFAULT_REROUTE_RATE)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--side", choices=routing.SIDES, default="encoder")
    s.add_argument("--pairs", help="TSV src, tgt directions to cycle through (default: all directions)")
    s.add_argument("--profiles", help="profile directory; enables similarity-weighted re-routing")
    s.add_argument("--out", help="decision JSONL (default: stdout)")
    s.add_argument("--summary", help="summary JSON (default: <out>.summary.json, or stderr)")

    # ensemble
    g = sub.add_parser("ensemble", help="multi-source self-ensemble").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("combine", help="weighted log-probability average")
    s.add_argument("--input", help="JSONL; each line is a list of log-prob vectors (default: stdin)")
    s.add_argument("--weights", type=_weights, required=True, help="comma-separated, summing to 1")
    s.add_argument("--out", help="JSONL scores (default: stdout)")

    # manifest
    g = sub.add_parser("manifest", help="run manifests").add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    g.required = True
    s = g.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("path")
    return p


def _catalog_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--catalog", required=required, help="catalog TSV")
    p.add_argument("--bitext", help="companion bitext TSV (default: <stem>_bitext.tsv)")
    p.add_argument("--english", default="en", help="pivot language code")


# -- helpers --------------------------------------------------------------------------

def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


@contextlib.contextmanager
def _open_in(path: str | None):
    if path is None or path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            yield fh


def _dump_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    with _open_out(path) as fh:
        fh.write(text)


def _load_catalog(args) -> cat.LanguageCatalog:
    return cat.load_catalog(args.catalog, args.bitext, english_iso=args.english)


class Run:
    """Collects inputs and outputs for the manifest."""

    def __init__(self, args, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.inputs: dict[str, str | None] = {}
        self.outputs: list[str] = []

    def input(self, path: str | None) -> str | None:
        if path is None or path == "-":
            self.inputs["<stdin>"] = None
        elif os.path.isdir(path):
            for f in sorted(Path(path).iterdir()):
                if f.is_file():
                    self.inputs[str(f)] = _sha256(f)
        else:
            self.inputs[str(path)] = _sha256(path)
        return path

    def output(self, path: str | None) -> str | None:
        if path is not None and path != "-":
            self.outputs.append(str(path))
        return path

    def manifest(self) -> dict:
        config = {k: v for k, v in sorted(vars(self.args).items())
                  if k not in ("manifest", "verbose", "group", "cmd")}
        return {
            "tool": "bitextkit",
            "version": __version__,
            "subcommand": " ".join(x for x in (self.args.group, getattr(self.args, "cmd", None)) if x),
            "argv": self.argv,
            "config": config,
            "seed": getattr(self.args, "seed", None),
            "inputs": self.inputs,
            "outputs": self.outputs,
        }

    def manifest_path(self) -> str:
        if self.args.manifest:
            return self.args.manifest
        if self.outputs:
            return self.outputs[0] + ".manifest.json"
        name = "-".join(x for x in (self.args.group, getattr(self.args, "cmd", None)) if x)
        return f"bitextkit-{name}.manifest.json"


# -- subcommands --------------------------------------------------------------------

def cmd_catalog_validate(run: Run) -> None:
    a = run.args
    run.input(a.catalog)
    bitext = a.bitext or str(cat.default_bitext_path(a.catalog))
    if Path(bitext).exists():
        run.input(bitext)
    c = _load_catalog(a)
    try:
        lo, hi = (int(float(x)) for x in a.tiers.split(","))
    except ValueError:
        raise UsageError(f"--tiers expects two comma-separated counts, got {a.tiers!r}") from None
    tiers = {"low": 0, "mid": 0, "high": 0}
    for lang in c.languages:
        tiers[cat.resource_tier(lang, (lo, hi))] += 1
    summary = {
        "languages": len(c),
        "groupings": len(c.groupings),
        "bridges": len(c.bridges),
        "bitext_pairs": len(c.bitext_pairs()),
        "english": c.english_iso,
        "tiers": tiers,
        "fingerprint": c.fingerprint(),
        "groupings_without_bridge": sorted(
            g for g, m in c.groupings.items() if not any(c[i].is_bridge for i in m)),
    }
    _dump_json(summary, run.output(a.out))


def cmd_plan_build(run: Run) -> None:
    a = run.args
    run.input(a.catalog)
    c = _load_catalog(a)
    if a.strategy.startswith("random"):
        if a.sparsity is None or a.seed is None:
            raise UsageError(f"--strategy {a.strategy} requires --sparsity and --seed")
    plan = mining.build_plan(c, a.strategy, a.sparsity, a.seed)
    out = a.out or f"{Path(a.catalog).stem}.{a.strategy}.plan.tsv"
    sidecar = mining.write_plan(plan, c, run.output(out))
    run.output(str(sidecar))


def cmd_plan_sparsity(run: Run) -> None:
    a = run.args
    run.input(a.catalog)
    run.input(a.plan)
    c = _load_catalog(a)
    plan = mining.read_plan(a.plan, c)
    _dump_json({"pairs": len(plan), "directions": 2 * len(plan), "languages": len(c),
                "sparsity": mining.sparsity(plan, c)}, run.output(a.out))


def cmd_bt_select(run: Run) -> None:
    a = run.args
    scores = mining.read_scores(run.input(a.scores))
    sel = mining.select_bt_directions(scores, a.lo, a.hi, a.limit)
    with _open_out(run.output(a.out)) as fh:
        fh.write("src\ttgt\tbleu\n")
        for src, tgt in sel.directions:
            fh.write(f"{src}\t{tgt}\t{scores[(src, tgt)]!r}\n")


def cmd_sinkhorn_solve(run: Run) -> None:
    a = run.args
    if a.pairs:
        Q = sampling.pair_matrix_from_counts(sampling.read_pair_counts(run.input(a.pairs)))
    else:
        run.input(a.catalog)
        Q = sampling.pair_matrix_from_catalog(cat.load_catalog(a.catalog))
    if a.marginals:
        given = sampling.read_marginals(run.input(a.marginals))
        unknown = sorted(set(given) - set(Q.languages))
        if unknown:
            raise sampling.InfeasibleError(
                f"languages with positive target probability but no bitext pairs: {', '.join(unknown)}", unknown)
        target = sampling.temperature_rescale([given.get(iso, 0.0) for iso in Q.languages],
                                              a.temperature, Q.languages)
    else:
        target = sampling.default_target(Q, a.temperature)
    result = sampling.sinkhorn_balance(Q, target, a.tol, a.max_iter)
    sampling.write_matrix(result, run.output(a.out))
    diag = a.diagnostics or a.out + ".diagnostics.json"
    sampling.write_diagnostics(result, run.output(diag), {"temperature": a.temperature})
    if not result.converged:
        raise sampling.NotConvergedError(
            f"not converged after {result.iterations} iterations "
            f"(max marginal error {result.max_marginal_error:.3g} >= tol {a.tol:g}); diagnostics in {diag}")


def cmd_sinkhorn_sample(run: Run) -> None:
    a = run.args
    diag = None
    if a.diagnostics:
        diag = json.loads(Path(run.input(a.diagnostics)).read_text(encoding="utf-8"))
    result = sampling.read_matrix(run.input(a.matrix), diag)
    sampler = sampling.PairSampler(result, a.seed)
    with _open_out(run.output(a.out)) as fh:
        remaining = a.n
        while remaining:
            batch = min(remaining, 100_000)
            for src, tgt in sampler.draw(batch):
                fh.write(f"{src}\t{tgt}\n")
            remaining -= batch


def _read_two_column(path: str) -> dict[str, float]:
    return sampling.read_marginals(path)


def cmd_rescale(run: Run) -> None:
    a = run.args
    counts = _read_two_column(run.input(a.counts))
    langs = list(counts)
    target = sampling.temperature_rescale([counts[x] for x in langs], a.temperature, langs)
    with _open_out(run.output(a.out)) as fh:
        fh.write("iso\tprobability\n")
        for iso, q in zip(langs, target.probabilities):
            fh.write(f"{iso}\t{float(q)!r}\n")


def _read_token_counts(path: Path) -> dict[str, int]:
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'token<TAB>count'")
            if lineno == 1 and fields == ["token", "count"]:
                continue
            counts[fields[0]] = counts.get(fields[0], 0) + int(fields[1])
    return counts


def cmd_coverage(run: Run) -> None:
    a = run.args
    with open(run.input(a.dictionary), encoding="utf-8") as fh:
        vocab = {line.rstrip("\r\n").split("\t")[0] for line in fh if line.strip()}
    corpus: dict[str, dict[str, int]] = {}
    for spec in a.corpus:
        if "=" in spec:
            iso, path = spec.split("=", 1)
            corpus[iso] = _read_token_counts(Path(run.input(path)))
        elif os.path.isdir(spec):
            run.input(spec)
            for f in sorted(Path(spec).glob("*.tsv")):
                corpus[f.stem] = _read_token_counts(f)
        else:
            raise UsageError(f"--corpus expects iso=path or a directory, got {spec!r}")
    cov = sampling.dictionary_coverage(vocab, corpus)
    with _open_out(run.output(a.out)) as fh:
        fh.write("iso\tcoverage\n")
        for iso in sorted(cov):
            fh.write(f"{iso}\t{cov[iso]!r}\n")


def cmd_filter_run(run: Run) -> None:
    a = run.args
    config = filtering.FilterConfig.from_json(run.input(a.config)) if a.config else filtering.FilterConfig()
    run.args.config_snapshot = config.snapshot()
    c = None
    if a.catalog:
        run.input(a.catalog)
        c = _load_catalog(a)
    pipe = filtering.FilterPipeline(config, c, workers=a.workers)
    with _open_in(run.input(a.input)) as fin, _open_out(run.output(a.output)) as fout:
        for rec in pipe.run(filtering.read_records(fin, a.format)):
            fout.write(filtering.format_record(rec, a.format))
    report = pipe.report
    if not report.conserved():
        raise RuntimeError("filter report does not balance")
    _dump_json(report.to_dict(), run.output(a.report))


def cmd_shard_plan(run: Run) -> None:
    a = run.args
    if a.sizes:
        sizes = sharding.read_sizes(run.input(a.sizes))
    else:
        run.input(a.catalog)
        c = cat.load_catalog(a.catalog)
        sizes = {lang.iso: lang.total_bitext for lang in c.languages}
    plan = sharding.plan_shards(sizes, a.total_shards, a.target_shard_size)
    sharding.write_plan(plan, run.output(a.out))


_assign_state: dict = {}


def _assign_init(plan, seed, fmt):
    _assign_state.update(plan=plan, seed=seed, fmt=fmt)


def _assign_line(item):
    lineno, line = item
    fmt = _assign_state["fmt"]
    plan = _assign_state["plan"]
    if fmt == "tsv":
        rec, extra = filtering.parse_tsv_line(line, lineno)
        shard = sharding.assign_record(rec, plan, _assign_state["seed"])
        return filtering.format_record(rec, "tsv", list(extra) + [shard])
    rec, extra = filtering.parse_json_line(line, lineno)
    shard = sharding.assign_record(rec, plan, _assign_state["seed"])
    return filtering.format_record(rec, "jsonl", {**extra, "shard": shard})


def cmd_shard_assign(run: Run) -> None:
    a = run.args
    plan = sharding.read_plan(run.input(a.plan))
    _assign_init(plan, a.hash_seed, a.format)
    with _open_in(run.input(a.input)) as fin, _open_out(run.output(a.output)) as fout:
        items = ((i, line) for i, line in enumerate(fin, start=1)
                 if line.strip() and not (a.format == "tsv" and i == 1 and line.startswith("src_lang\t")))
        if a.workers == 1:
            for item in items:
                fout.write(_assign_line(item))
        else:
            ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
            with ctx.Pool(a.workers, initializer=_assign_init, initargs=(plan, a.hash_seed, a.format)) as pool:
                for out in pool.imap(_assign_line, items, chunksize=512):
                    fout.write(out)


def _load_profiles(directory: str, sizes: dict[str, int], top_n: int) -> list[grouping.VocabProfile]:
    profiles = []
    for f in sorted(Path(directory).glob("*.tsv")):
        if f.stem not in sizes:
            raise ValueError(f"no sentence count for {f.stem!r} in sizes file")
        profiles.append(grouping.read_profile(f, sizes[f.stem], top_n=top_n))
    if not profiles:
        raise ValueError(f"no <iso>.tsv profiles in {directory}")
    return profiles


def cmd_groups_build(run: Run) -> None:
    a = run.args
    sizes = sharding.read_sizes(run.input(a.sizes))
    profiles = _load_profiles(run.input(a.profiles), sizes, a.top_n)
    plan = grouping.build_groups(profiles, a.threshold, a.clusters, a.slack)
    grouping.write_grouping(plan, run.output(a.out))


def cmd_route_simulate(run: Run) -> None:
    a = run.args
    plan = grouping.read_grouping(run.input(a.grouping))
    similarity = None
    if a.profiles:
        langs = [iso for g in plan.groups for iso in g]
        profiles = _load_profiles(run.input(a.profiles), {iso: 0 for iso in langs}, grouping.DEFAULT_TOP_N)
        similarity = grouping.group_similarity(plan, profiles)
    router = routing.Router(plan, a.rate, similarity)
    if a.pairs:
        pairs = _read_pairs(run.input(a.pairs))
    else:
        langs = sorted(iso for g in plan.groups for iso in g)
        pairs = [(s, t) for s in langs for t in langs if s != t]
    queries = [routing.RouteQuery(s, t, a.side) for s, t in pairs]
    decisions = routing.simulate(router, queries, a.n, a.seed)
    with _open_out(run.output(a.out)) as fh:
        for q, d in decisions:
            fh.write(json.dumps({"src": q.src_lang, "tgt": q.tgt_lang, "side": q.side,
                                 "assigned_group": d.assigned_group_id, "group": d.group_id,
                                 "rerouted": d.rerouted}) + "\n")
    summary = routing.summarize(decisions, plan.K)
    summary.update(rate=a.rate, seed=a.seed, side=a.side)
    if a.summary or a.out:
        _dump_json(summary, run.output(a.summary or a.out + ".summary.json"))
    else:
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")


def _read_pairs(path: str) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\r\n").split("\t")
            if not fields[0] or fields[0].startswith("#") or (lineno == 1 and fields[:2] == ["src", "tgt"]):
                continue
            if len(fields) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'src<TAB>tgt'")
            out.append((fields[0], fields[1]))
    return out


def cmd_ensemble_combine(run: Run) -> None:
    a = run.args
    with _open_in(run.input(a.input)) as fin, _open_out(run.output(a.out)) as fout:
        for lineno, line in enumerate(fin, start=1):
            if not line.strip():
                continue
            try:
                vectors = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if isinstance(vectors, dict):
                vectors = vectors["logprobs"]
            try:
                scores = routing.combine_logprobs(vectors, a.weights)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            fout.write(json.dumps({"scores": [float(x) for x in scores],
                                   "argmax": int(np.argmax(scores))}) + "\n")


HANDLERS = {
    ("catalog", "validate"): cmd_catalog_validate,
    ("plan", "build"): cmd_plan_build,
    ("plan", "sparsity"): cmd_plan_sparsity,
    ("bt", "select"): cmd_bt_select,
    ("sinkhorn", "solve"): cmd_sinkhorn_solve,
    ("sinkhorn", "sample"): cmd_sinkhorn_sample,
    ("rescale", None): cmd_rescale,
    ("coverage", None): cmd_coverage,
    ("filter", "run"): cmd_filter_run,
    ("shard", "plan"): cmd_shard_plan,
    ("shard", "assign"): cmd_shard_assign,
    ("groups", "build"): cmd_groups_build,
    ("route", "simulate"): cmd_route_simulate,
    ("ensemble", "combine"): cmd_ensemble_combine,
}


def replay(path: str) -> int:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    argv = data.get("argv")
    if not isinstance(argv, list):
        print(f"bitextkit: error: {path} has no argv to replay", file=sys.stderr)
        return 1
    return dispatch(argv)


def dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.group == "manifest":
        return replay(args.path)

    handler = HANDLERS[(args.group, getattr(args, "cmd", None))]
    run = Run(args, argv)
    status = 0
    try:
        handler(run)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bitextkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"bitextkit: error: {msg}", file=sys.stderr)
        status = 1
    if status == 0 or run.outputs:
        manifest = run.manifest()
        manifest["exit_status"] = status
        _dump_json(manifest, run.manifest_path())
    return status


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
