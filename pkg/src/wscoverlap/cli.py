"""Command-line entry point.

Each stage is its own subcommand so overlap scores can be recomputed against
new indexes without re-parsing.  Exit codes: 0 success, 1 usage error,
2 data error.  Every output is written atomically and accompanied by a run
manifest (resolved configuration, input digests, tool version).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from wscoverlap import __version__, lexicon
from wscoverlap.analysis import DEFAULT_CUTOFFS, analyze, overlap_curve, partition, read_predictions, read_scores
from wscoverlap.errors import OverlapError
from wscoverlap.fsio import atomic_write_text, sha256_tree
from wscoverlap.index import build_index, load, persist
from wscoverlap.pipeline import run_pipeline
from wscoverlap.report import curve_csv, curve_svg, emit_report
from wscoverlap.retrieval import ScoringParams, instance_overlap, search
from wscoverlap.schema import DEFAULT_WINDOW, build_query, parse_instance, read_instances
from wscoverlap.text import READER_FORMATS, default_tagger, read_corpus

log = logging.getLogger("wscoverlap")

COMMANDS = ("index", "parse", "score", "partition", "analyze", "curve", "pipeline")
RUN_MANIFEST = "run_manifest.json"
DEFAULT_GRID = "0:50:5"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, list[str]] = field(default_factory=dict)
    output: str = ""
    options: dict[str, object] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    if ":" not in text:
        return _floats(text)
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n + 1)]


def _add_scoring(p):
    p.add_argument("--index", action="append", metavar="DIR", help="index directory (repeatable)")
    p.add_argument("--k1", type=float, default=1.2, help="BM25 term-frequency saturation (default 1.2)")
    p.add_argument("--b", type=float, default=0.75, help="BM25 length normalization (default 0.75)")
    p.add_argument("--idf-floor", type=float, default=0.0, help="lower bound on per-term IDF (default 0)")
    p.add_argument("--force-params", action="store_true", help="accept k1 outside [1.2, 2.0]")


def _add_parsing(p):
    p.add_argument("--instances", required=True, metavar="JSONL", help="instances file")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="max tokens between predicates (default 10)")
    p.add_argument("--connectives", metavar="FILE", help="connective lexicon, one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wscoverlap", description="Measure train/test overlap for pronoun-disambiguation test sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", metavar="FILE", help="key = value defaults; command-line flags win")
        p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
        return p

    p = command("index", "Build a positional index from a corpus.")
    p.add_argument("--corpus", action="append", metavar="PATH", help="corpus file (repeatable)")
    p.add_argument("--format", choices=READER_FORMATS, default="text", help="corpus reader (default text)")
    p.add_argument("--out", required=True, metavar="DIR", help="index directory to write")
    p.add_argument("--name", help="corpus name (default: output directory name)")
    p.add_argument("--threads", type=int, default=1, help="ignored; index builds are single-writer")

    p = command("parse", "Parse instances into skeletal form and print their overlap queries.")
    _add_parsing(p)
    p.add_argument("--out", required=True, metavar="JSONL", help="output file")

    p = command("score", "Compute the overlap score of every instance against one or more indexes.")
    _add_parsing(p)
    _add_scoring(p)
    p.add_argument("--top-k", type=int, default=1, help="matches listed per instance (default 1)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch queries (default 1)")
    p.add_argument("--out", required=True, metavar="JSONL", help="output file")

    p = command("partition", "Split scored instances into overlap / non-overlap subsets.")
    p.add_argument("--scores", required=True, metavar="JSONL", help="output of the score command")
    p.add_argument("--instances", metavar="JSONL", help="restrict to these instances")
    p.add_argument("--cutoffs", type=_floats, default=list(DEFAULT_CUTOFFS), help="comma-separated (default 0,25,35)")
    p.add_argument("--out", required=True, metavar="JSON", help="output file")

    p = command("analyze", "Compare model accuracy on overlap and non-overlap subsets.")
    p.add_argument("--instances", required=True, metavar="JSONL", help="test set with gold answers")
    p.add_argument("--scores", required=True, metavar="JSONL", help="output of the score command")
    p.add_argument("--predictions", action="append", metavar="[NAME=]TSV",
                   help="model predictions, instance_id<TAB>answer (repeatable)")
    p.add_argument("--cutoffs", type=_floats, default=list(DEFAULT_CUTOFFS), help="comma-separated (default 0,25,35)")
    p.add_argument("--grid", type=_grid, default=_grid(DEFAULT_GRID), help=f"curve cutoffs (default {DEFAULT_GRID})")
    p.add_argument("--yates", action="store_true", help="apply the continuity correction")
    p.add_argument("--out", required=True, metavar="DIR", help="report directory")

    p = command("curve", "Overlap proportion as a function of score cutoff.")
    p.add_argument("--scores", action="append", metavar="[NAME=]JSONL", help="score file (repeatable)")
    p.add_argument("--grid", type=_grid, default=_grid(DEFAULT_GRID), help=f"cutoffs (default {DEFAULT_GRID})")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")

    p = command("pipeline", "Build new instances from raw web text.")
    p.add_argument("--input", action="append", metavar="PATH", help="input dump (repeatable)")
    p.add_argument("--format", choices=READER_FORMATS, default="jsonl", help="input reader (default jsonl)")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="global perturbation seed (default 0)")
    p.add_argument("--labels", metavar="TSV", help="completed annotations to merge")
    p.add_argument("--connectives", metavar="FILE", help="connective lexicon, one per line")
    p.add_argument("--names-male", metavar="FILE", help="male given names, one per line")
    p.add_argument("--names-female", metavar="FILE", help="female given names, one per line")

    # required options may also come from --config, so they are checked after it is merged
    for p in sub.choices.values():
        for a in p._actions:
            if a.required and a.option_strings:
                a.required = False
                a.help = f"{a.help} (required)"
                p.required_dests = getattr(p, "required_dests", []) + [a]
    return parser


def _check_required(sub: argparse.ArgumentParser, ns):
    missing = [a.option_strings[-1] for a in getattr(sub, "required_dests", []) if getattr(ns, a.dest) is None]
    if missing:
        raise UsageError(f"wscoverlap {ns.command}: the following arguments are required: {', '.join(missing)}")


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        return action.choices[name]


def read_config(path: str | Path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, ns, argv: Sequence[str]):
    """Fill options not given on the command line from ``--config``."""
    values = read_config(ns.config)
    actions = {a.dest: a for a in sub._actions}
    given = set()
    for a in sub._actions:
        for opt in a.option_strings:
            if any(arg == opt or arg.startswith(opt + "=") for arg in argv):
                given.add(a.dest)
    for key, raw in values.items():
        a = actions.get(key)
        if a is None or key in ("config", "help"):
            raise UsageError(f"{ns.config}: unknown option {key!r}")
        if key in given:
            continue
        try:
            if isinstance(a, argparse._StoreTrueAction):
                if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                val = raw.lower() in ("true", "1", "yes")
            elif isinstance(a, argparse._AppendAction):
                val = [x.strip() for x in raw.split(",") if x.strip()]
            else:
                val = a.type(raw) if a.type else raw
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise UsageError(f"{ns.config}: bad value for {key!r}: {e}") from None
        if a.choices is not None and val not in a.choices:
            raise UsageError(f"{ns.config}: {key} must be one of {list(a.choices)}")
        setattr(ns, key, val)


# ---------------------------------------------------------------------------
# manifests


def _named(spec: str) -> tuple[str | None, str]:
    name, sep, path = spec.partition("=")
    if sep and name and not Path(spec).exists():
        return name, path
    return None, spec


def _require(paths: dict[str, list[str]]):
    for role, items in paths.items():
        for p in items:
            if not Path(p).exists():
                raise FileNotFoundError(f"{role}: {p} does not exist")


def write_run_manifest(cfg: RunConfig, manifest_path: Path):
    base = manifest_path.parent

    def rel(p):
        return os.path.relpath(Path(p).resolve(), base.resolve()).replace(os.sep, "/")

    doc = {
        "tool": "wscoverlap",
        "version": __version__,
        "command": cfg.command,
        "inputs": {role: [{"path": rel(p), "sha256": sha256_tree(p)} for p in items]
                   for role, items in sorted(cfg.inputs.items())},
        "output": rel(cfg.output),
        "options": cfg.options,
    }
    atomic_write_text(manifest_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _file_manifest(cfg: RunConfig):
    out = Path(cfg.output)
    write_run_manifest(cfg, out.with_name(out.name + ".manifest.json"))


def _dir_manifest(cfg: RunConfig):
    write_run_manifest(cfg, Path(cfg.output) / RUN_MANIFEST)


def _params(ns) -> ScoringParams:
    return ScoringParams(k1=ns.k1, b=ns.b, idf_floor=ns.idf_floor, unchecked=ns.force_params)


def _connectives(ns):
    return lexicon.load_connectives(ns.connectives) if ns.connectives else None


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)


# ---------------------------------------------------------------------------
# commands


def cmd_index(ns) -> RunConfig:
    if not ns.corpus:
        raise UsageError("index: at least one --corpus is required")
    _require({"corpus": ns.corpus})
    out = Path(ns.out)
    name = ns.name or out.resolve().name

    def sentences():
        for path in ns.corpus:
            log.info("reading %s", path)
            yield from read_corpus(path, ns.format)

    index = build_index(sentences(), name)
    log.info("indexed %d sentences, %d terms", index.N, len(index.terms))
    persist(index, out)
    cfg = RunConfig("index", {"corpus": ns.corpus}, ns.out, {"format": ns.format, "name": name})
    _dir_manifest(cfg)
    return cfg


def _parse_all(ns):
    """Yield (instance, query or None, error or None) in input order."""
    tagger = default_tagger()
    conn = _connectives(ns)
    for raw in read_instances(ns.instances):
        try:
            sk = parse_instance(raw, tagger, conn)
        except OverlapError as e:
            log.warning("%s: %s", raw.instance_id, e)
            yield raw, None, None, str(e)
            continue
        yield raw, sk, build_query(sk, ns.window), None


def cmd_parse(ns) -> RunConfig:
    _require({"instances": [ns.instances]} | ({"connectives": [ns.connectives]} if ns.connectives else {}))
    rows = []
    for raw, sk, q, err in _parse_all(ns):
        if err:
            rows.append({"instance_id": raw.instance_id, "error": err})
        else:
            rows.append({"instance_id": raw.instance_id, "skeleton": sk.to_json(),
                         "query": q.to_json(), "query_text": str(q)})
    atomic_write_text(ns.out, _jsonl(sorted(rows, key=lambda r: r["instance_id"])))
    inputs = {"instances": [ns.instances]} | ({"connectives": [ns.connectives]} if ns.connectives else {})
    cfg = RunConfig("parse", inputs, ns.out, {"window": ns.window})
    _file_manifest(cfg)
    return cfg


def cmd_score(ns) -> RunConfig:
    if not ns.index:
        raise UsageError("score: at least one --index is required")
    if ns.top_k < 1:
        raise UsageError("score: --top-k must be >= 1")
    if ns.threads < 1:
        raise UsageError("score: --threads must be >= 1")
    inputs = {"instances": [ns.instances], "index": ns.index}
    if ns.connectives:
        inputs["connectives"] = [ns.connectives]
    _require(inputs)
    try:
        params = _params(ns)
    except ValueError as e:
        raise UsageError(f"score: {e}") from None
    indexes = [load(p) for p in ns.index]
    parsed = list(_parse_all(ns))

    def one(item):
        raw, _, q, err = item
        if err:
            return {"instance_id": raw.instance_id, "max_score": 0.0, "match_count": 0,
                    "best_match": None, "error": err}
        row = instance_overlap(q, indexes, params).to_json()
        if ns.top_k > 1:
            row["matches"] = [m.to_json() for m in search(q, indexes, params, ns.top_k)]
        return row

    with ThreadPoolExecutor(max_workers=ns.threads) as pool:
        rows = list(pool.map(one, parsed))
    log.info("scored %d instances", len(rows))
    atomic_write_text(ns.out, _jsonl(sorted(rows, key=lambda r: r["instance_id"])))
    cfg = RunConfig("score", inputs, ns.out, {
        "k1": ns.k1, "b": ns.b, "idf_floor": ns.idf_floor, "force_params": ns.force_params,
        "window": ns.window, "top_k": ns.top_k,
    })
    _file_manifest(cfg)
    return cfg


def cmd_partition(ns) -> RunConfig:
    inputs = {"scores": [ns.scores]} | ({"instances": [ns.instances]} if ns.instances else {})
    _require(inputs)
    scores = read_scores(ns.scores)
    if ns.instances:
        ids = [r.instance_id for r in read_instances(ns.instances)]
        missing = sorted(set(ids) - set(scores))
        if missing:
            raise OverlapError("MissingScore", ", ".join(missing))
        scores = {i: scores[i] for i in ids}
    out = []
    for c in ns.cutoffs:
        over, non = partition(scores, c)
        out.append({"cutoff": c, "overlap": sorted(over), "nonoverlap": sorted(non)})
    atomic_write_text(ns.out, json.dumps(out, indent=2) + "\n")
    cfg = RunConfig("partition", inputs, ns.out, {"cutoffs": ns.cutoffs})
    _file_manifest(cfg)
    return cfg


def cmd_analyze(ns) -> RunConfig:
    if not ns.predictions:
        raise UsageError("analyze: at least one --predictions is required")
    named = [_named(s) for s in ns.predictions]
    inputs = {"instances": [ns.instances], "scores": [ns.scores], "predictions": [p for _, p in named]}
    _require(inputs)
    gold = {r.instance_id: r.gold_answer for r in read_instances(ns.instances)}
    scores = read_scores(ns.scores)
    reports = []
    for name, path in named:
        reports += analyze(gold, scores, read_predictions(path, name), ns.cutoffs, yates=ns.yates)
    curve = overlap_curve({i: scores[i] for i in gold}, ns.grid)
    emit_report(reports, {Path(ns.instances).stem: curve}, ns.out)
    cfg = RunConfig("analyze", inputs, ns.out, {
        "cutoffs": ns.cutoffs, "grid": ns.grid, "yates": ns.yates,
        "models": [r.model for r in reports[:: len(ns.cutoffs)]] if ns.cutoffs else [],
    })
    _dir_manifest(cfg)
    return cfg


def cmd_curve(ns) -> RunConfig:
    if not ns.scores:
        raise UsageError("curve: at least one --scores is required")
    named = [_named(s) for s in ns.scores]
    _require({"scores": [p for _, p in named]})
    curves = {}
    for name, path in named:
        curves[name or Path(path).stem] = overlap_curve(read_scores(path), ns.grid)
    out = Path(ns.out)
    atomic_write_text(out / "curve.csv", curve_csv(curves))
    atomic_write_text(out / "curve.svg", curve_svg(curves))
    cfg = RunConfig("curve", {"scores": [p for _, p in named]}, ns.out, {"grid": ns.grid, "series": list(curves)})
    _dir_manifest(cfg)
    return cfg


def cmd_pipeline(ns) -> RunConfig:
    if not ns.input:
        raise UsageError("pipeline: at least one --input is required")
    inputs = {"input": ns.input}
    for role in ("labels", "connectives", "names_male", "names_female"):
        if getattr(ns, role):
            inputs[role] = [getattr(ns, role)]
    _require(inputs)
    names = {
        "male": lexicon.read_wordlist(ns.names_male, "names_male.txt"),
        "female": lexicon.read_wordlist(ns.names_female, "names_female.txt"),
    }
    funnel = run_pipeline(ns.input, ns.format, ns.out, ns.seed, names, _connectives(ns), labels=ns.labels)
    for stage, count in funnel.items():
        log.info("%-12s %d", stage, count)
    cfg = RunConfig("pipeline", inputs, ns.out, {"format": ns.format, "seed": ns.seed})
    _dir_manifest(cfg)
    return cfg


HANDLERS = {
    "index": cmd_index, "parse": cmd_parse, "score": cmd_score, "partition": cmd_partition,
    "analyze": cmd_analyze, "curve": cmd_curve, "pipeline": cmd_pipeline,
}


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = None
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(f"wscoverlap: a command is required ({', '.join(COMMANDS)})")
        if ns.config:
            if not Path(ns.config).is_file():
                raise UsageError(f"config file {ns.config} not found")
            _apply_config(_subparser(parser, ns.command), ns, argv)
        _check_required(_subparser(parser, ns.command), ns)
    except UsageError as e:
        command = ns.command if ns is not None else None
        (_subparser(parser, command) if command else parser).print_usage(sys.stderr)
        print(e, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        HANDLERS[ns.command](ns)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except (OverlapError, OSError, ValueError, LookupError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
