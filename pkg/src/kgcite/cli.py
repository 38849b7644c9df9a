"""Command-line entry point: ``kgcite {ingest,query,evaluate,stats}``.

Runs are driven by a flat ``key = value`` config file; command-line flags
override config values. Exit codes: 0 success, 2 input error, 3 query error,
4 config error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import ConfigError, IngestError, QueryError
from .evaluation import PAIR_STATS_HEADER, pair_similarity_stats, run_benchmark
from .kg_store import ConceptType, Scoping, kg_stats, load_kg
from .retrieval import IndexConfig, build_index, rank_all
from .snapshot import load_snapshot, save_snapshot
from .vectorizer import FULL_FILTER, TypeFilter, load_embeddings

logger = logging.getLogger("kgcite")

EXIT_OK, EXIT_INPUT, EXIT_QUERY, EXIT_CONFIG = 0, 2, 3, 4

TYPE_ABBREV = {"m": ConceptType.MATERIAL, "p": ConceptType.PROCESS,
               "d": ConceptType.DATA, "me": ConceptType.METHOD}

KNOWN_KEYS = {"papers", "mentions", "citations", "kg", "types", "k", "min_citations",
              "seed", "out", "workers", "query_embedding"}


@dataclass
class RunConfig:
    papers: Path | None = None
    mentions: Path | None = None
    citations: Path | None = None
    embeddings: dict[str, Path] = field(default_factory=dict)
    scopings: tuple[Scoping, ...] = (Scoping.IN_DOMAIN, Scoping.CROSS_DOMAIN)
    type_filter: TypeFilter = FULL_FILTER
    k_values: tuple[int, ...] = (10, 20, 50)
    min_citations: int = 4
    seed: int = 0
    out: Path = Path("kgcite-out")
    workers: int = 1
    query_embedding: str | None = None

    def canonical(self):
        d = asdict(self)
        d["papers"], d["mentions"], d["citations"] = (str(p) if p else None for p in
                                                      (self.papers, self.mentions, self.citations))
        d["embeddings"] = {k: str(v) for k, v in sorted(self.embeddings.items())}
        d["scopings"] = [s.value for s in self.scopings]
        d["type_filter"] = sorted(t.value for t in self.type_filter.allowed)
        d["out"] = str(self.out)
        return d

    def digest(self):
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_types(text) -> TypeFilter:
    types = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.lower() in ("all", "*"):
            return FULL_FILTER
        try:
            types.append(TYPE_ABBREV.get(tok.lower()) or ConceptType.parse(tok))
        except ValueError:
            raise ConfigError(f"unknown concept type {tok!r} (use m,p,d,me)") from None
    if not types:
        raise ConfigError("empty concept type list")
    return TypeFilter(frozenset(types))


def parse_k(text) -> tuple[int, ...]:
    try:
        ks = tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad k list {text!r}") from None
    if not ks or any(k < 1 for k in ks) or list(ks) != sorted(set(ks)):
        raise ConfigError(f"k values must be positive, unique and ascending: {text!r}")
    return ks


def parse_scopings(text) -> tuple[Scoping, ...]:
    if str(text).strip().lower() == "both":
        return (Scoping.IN_DOMAIN, Scoping.CROSS_DOMAIN)
    try:
        return (Scoping.parse(text),)
    except ValueError:
        raise ConfigError(f"kg must be in-domain, cross-domain or both, got {text!r}") from None


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}") from None


def read_config(path) -> RunConfig:
    """Parse a flat ``key = value`` file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    base = path.parent
    cfg = RunConfig(out=base / "kgcite-out")
    for key, value in parser["run"].items():
        value = value.strip()
        if key.startswith("embedding."):
            cfg.embeddings[key[len("embedding."):]] = base / value
        elif key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        elif key in ("papers", "mentions", "citations", "out"):
            setattr(cfg, key, base / value)
        elif key == "kg":
            cfg.scopings = parse_scopings(value)
        elif key == "types":
            cfg.type_filter = parse_types(value)
        elif key == "k":
            cfg.k_values = parse_k(value)
        elif key in ("min_citations", "seed", "workers"):
            setattr(cfg, key, _int(key, value))
        elif key == "query_embedding":
            cfg.query_embedding = value or None
    return cfg


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "kg", None):
        cfg.scopings = parse_scopings(args.kg)
    if getattr(args, "types", None):
        cfg.type_filter = parse_types(args.types)
    if getattr(args, "k", None):
        cfg.k_values = parse_k(args.k)
    if getattr(args, "min_citations", None) is not None:
        cfg.min_citations = args.min_citations
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out = Path(args.out)
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "embedding", None):
        cfg.query_embedding = args.embedding
    if cfg.min_citations < 1:
        raise ConfigError("min_citations must be >= 1")
    return cfg


def _require(path, what):
    if path is None:
        raise ConfigError(f"config does not set '{what}'")
    if not Path(path).is_file():
        raise IngestError(f"{what} file not found", path)
    return Path(path)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(cfg: RunConfig, command, inputs, outputs):
    manifest = {
        "command": command,
        "kgcite_version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config_hash": cfg.digest(),
        "config": cfg.canonical(),
        "seed": cfg.seed,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": sorted(str(p) for p in outputs),
    }
    path = cfg.out / f"manifest-{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def snapshot_path(cfg, scoping):
    return cfg.out / "snapshot" / f"{scoping.value}.kg.json.gz"


def _load_snapshot(cfg, scoping):
    path = snapshot_path(cfg, scoping)
    if not path.is_file():
        raise IngestError("snapshot not found; run 'kgcite ingest' first", path)
    return load_snapshot(path)


def _load_embeddings(cfg, label):
    if label not in cfg.embeddings:
        raise ConfigError(f"no 'embedding.{label}' entry in config")
    return load_embeddings(_require(cfg.embeddings[label], f"embedding.{label}"))


# -- commands ------------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig):
    inputs = [_require(cfg.papers, "papers"), _require(cfg.mentions, "mentions"),
              _require(cfg.citations, "citations")]
    (cfg.out / "snapshot").mkdir(parents=True, exist_ok=True)
    outputs = []
    for scoping in cfg.scopings:
        kg = load_kg(*inputs, scoping)
        snap = snapshot_path(cfg, scoping)
        save_snapshot(kg, snap)
        stats = cfg.out / f"kg-stats-{scoping.value}.tsv"
        stats.write_text(kg_stats(kg).to_tsv(), encoding="utf-8")
        outputs += [snap, stats]
        logger.info("%s KG: %d papers, %d concepts, %d links, %d citations (%d dropped)",
                    scoping.value, len(kg.papers), kg.n_concepts, kg.n_links,
                    len(kg.citations), kg.dropped_citations)
    write_manifest(cfg, "ingest", inputs, outputs)
    return outputs


def cmd_query(cfg: RunConfig, query_id, k=None, use_concepts=True, stream=None):
    stream = stream or sys.stdout
    scoping = cfg.scopings[0]
    kg = _load_snapshot(cfg, scoping)
    emb = _load_embeddings(cfg, cfg.query_embedding) if cfg.query_embedding else None
    config = IndexConfig(use_concepts=use_concepts, type_filter=cfg.type_filter,
                         use_dense=emb is not None)
    index = build_index(kg, emb, config)
    ranked = rank_all(query_id, index, k or cfg.k_values[0])
    stream.write(ranked.to_tsv())
    return ranked


def cmd_evaluate(cfg: RunConfig):
    kgs = {s: _load_snapshot(cfg, s) for s in cfg.scopings}
    inputs = [snapshot_path(cfg, s) for s in cfg.scopings]
    embeddings = {}
    for label in sorted(cfg.embeddings):
        embeddings[label] = _load_embeddings(cfg, label)
        inputs.append(cfg.embeddings[label])
    report = run_benchmark(kgs, embeddings, cfg.k_values, cfg.seed,
                           min_citations=cfg.min_citations, workers=cfg.workers)
    outputs = {
        cfg.out / "report.tsv": report.to_tsv(),
        cfg.out / "report.txt": report.to_text(),
        cfg.out / "report.json": json.dumps(report.to_dict(), indent=2) + "\n",
    }
    for path, text in outputs.items():
        path.write_text(text, encoding="utf-8")
    write_manifest(cfg, "evaluate", inputs, outputs)
    return report


def cmd_stats(cfg: RunConfig):
    lines = ["\t".join(["kg", *PAIR_STATS_HEADER])]
    inputs = []
    for scoping in cfg.scopings:
        kg = _load_snapshot(cfg, scoping)
        inputs.append(snapshot_path(cfg, scoping))
        for st in pair_similarity_stats(kg, cfg.seed, cfg.type_filter):
            lines.append("\t".join([scoping.value, *st.as_row()]))
    out = cfg.out / "pair-stats.tsv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(cfg, "stats", inputs, [out])
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat key = value run config")
    common.add_argument("--kg", help="in-domain, cross-domain or both")
    common.add_argument("--types", help="concept types to keep, e.g. m,p,d,me")
    common.add_argument("--k", help="comma-separated cutoffs, e.g. 10,20,50")
    common.add_argument("--min-citations", type=int, dest="min_citations")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="kgcite", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="build KG snapshots and statistics")
    q = sub.add_parser("query", parents=[common], help="rank the corpus for one paper")
    q.add_argument("query_id")
    q.add_argument("--embedding", help="embedding label for the dense part")
    q.add_argument("--no-concepts", action="store_true", help="rank by embeddings only")
    sub.add_parser("evaluate", parents=[common], help="run the MAP@k configuration matrix")
    sub.add_parser("stats", parents=[common], help="citing vs. random pair similarity")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = apply_overrides(read_config(args.config), args)
        if args.command != "query":
            cfg.out.mkdir(parents=True, exist_ok=True)
        if args.command == "ingest":
            cmd_ingest(cfg)
        elif args.command == "query":
            cmd_query(cfg, args.query_id, use_concepts=not args.no_concepts)
        elif args.command == "evaluate":
            cmd_evaluate(cfg)
        elif args.command == "stats":
            cmd_stats(cfg)
    except ConfigError as exc:
        print(f"kgcite: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QueryError as exc:
        print(f"kgcite: query error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (IngestError, OSError) as exc:
        print(f"kgcite: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"kgcite: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
