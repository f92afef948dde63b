"""Command-line pipeline: each subcommand reads prior-stage files and writes its own."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import corpus as C
from .config import ConfigError, PipelineConfig, load_config
from .dense import DualIndex, FusionParams, VectorIndex, build_append_index, build_query_index, build_text_index
from .evaluation import (METRICS, evaluate_run, gain_vs_topic_recall, pearson, read_run,
                         topic_recall, write_report, write_run, UndefinedCorrelation)
from .gateway import make_chat, make_embedder
from .keywords import KeywordSets, build_pool, extract_doc_keywords, select_keywords_llm, topic_keywords_for_doc
from .qgen import MODES, load_exemplars, generate_queries
from .sparse import Bm25Params, build_index, expand_text, InvertedIndex
from .topics import TopicModel, build_topic_model

logger = logging.getLogger("docexpand")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
MINI_DATASET = Path(__file__).parent / "data" / "mini"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- stage file names -----------------------------------------------------------

def paths(cfg: PipelineConfig) -> dict[str, Path]:
    o = cfg.out
    return {
        "corpus": o / "corpus.jsonl",
        "queries": o / "queries.jsonl",
        "qrels": o / "qrels.tsv",
        "sentences": o / "sentences.jsonl",
        "topics": o / "topics.json",
        "doc_topics": o / "doc_topics.jsonl",
        "keywords": o / "keywords.jsonl",
        "expanded": o / "expanded.jsonl",
        "generation": o / "generation.jsonl",
        "dense_text": o / "dense_text.vec",
        "dense_query": o / "dense_query.vec",
        "dense_append": o / "dense_append.vec",
        "runs": o / "runs",
    }


def expanded_path(cfg: PipelineConfig, mode: str) -> Path:
    p = paths(cfg)
    if mode == "full":
        return p["expanded"]
    return cfg.out / f"expanded_{mode.replace('+', 'plus')}.jsonl"


def _require(*files: Path) -> None:
    missing = [str(f) for f in files if not f.exists()]
    if missing:
        raise UsageError(f"missing input(s): {', '.join(missing)}; run the earlier stage first")


def _summary(text: str) -> None:
    print(text, file=sys.stderr)


def _docs(cfg) -> list[C.Document]:
    p = paths(cfg)
    _require(p["corpus"])
    return C.load_corpus(p["corpus"])


# --- stages -----------------------------------------------------------------------

def cmd_ingest(cfg: PipelineConfig, args) -> None:
    name = args.dataset or cfg.dataset_dir
    if not name:
        raise UsageError("no dataset directory given (dataset_dir or --dataset)")
    dataset = MINI_DATASET if name == "mini" else Path(name)
    src = C.beir_paths(dataset, cfg.split)
    _require(src["corpus"], src["queries"], src["qrels"])
    docs = C.indexable(C.load_corpus(src["corpus"]), cfg.include_title)
    queries = C.load_queries(src["queries"])
    qrels = C.load_qrels(src["qrels"])
    judged = set(qrels)
    queries = [q for q in queries if q.query_id in judged]
    p = paths(cfg)
    C.write_corpus(docs, p["corpus"])
    C.write_queries(queries, p["queries"])
    C.write_qrels(qrels, p["qrels"])
    rows = []
    for d in docs:
        ss = C.segment_sentences(d)
        rows.append({"doc_id": d.doc_id,
                     "sentences": [{"text": s.text, "start": s.start, "end": s.end} for s in ss.sentences]})
    C.write_jsonl(p["sentences"], rows)
    n_sent = sum(len(r["sentences"]) for r in rows)
    _summary(f"ingest: {len(docs)} documents, {n_sent} sentences, {len(queries)} queries, "
             f"{sum(len(v) for v in qrels.values())} judgments -> {cfg.out}")


def cmd_fit_topics(cfg: PipelineConfig, args) -> None:
    p = paths(cfg)
    _require(p["sentences"])
    rows = C.read_jsonl(p["sentences"])
    refs, texts = [], []
    for r in rows:
        for i, s in enumerate(r["sentences"]):
            refs.append((r["doc_id"], i))
            texts.append(s["text"])
    embedder = make_embedder(cfg.embedding)
    emb = embedder.embed_batch(texts)
    chat = make_chat(cfg.chat)
    model, assignments = build_topic_model(refs, texts, emb, chat, cfg.topics)
    model.save(p["topics"])
    per_doc: dict[str, list[int]] = {}
    for (doc_id, _), t in zip(refs, assignments.tolist()):
        per_doc.setdefault(doc_id, []).append(int(t))
    C.write_jsonl(p["doc_topics"], (
        {"doc_id": r["doc_id"],
         "topics": sorted({t for t in per_doc.get(r["doc_id"], []) if t > 0}),
         "sentence_topics": per_doc.get(r["doc_id"], [])}
        for r in rows))
    n_out = int(np.sum(assignments < 0))
    _summary(f"fit-topics: {model.n_topics} topics over {len(texts)} sentences "
             f"({n_out} outliers) -> {p['topics']}")


def _load_doc_topics(cfg) -> dict[str, list[int]]:
    p = paths(cfg)
    _require(p["doc_topics"])
    return {r["doc_id"]: list(r["topics"]) for r in C.read_jsonl(p["doc_topics"])}


def cmd_extract_keywords(cfg: PipelineConfig, args) -> None:
    p = paths(cfg)
    _require(p["topics"], p["doc_topics"])
    docs = _docs(cfg)
    model = TopicModel.load(p["topics"])
    doc_topics = _load_doc_topics(cfg)
    embedder = make_embedder(cfg.embedding)
    chat = make_chat(cfg.chat)
    kc = cfg.keywords
    doc_vecs = embedder.embed_batch([d.body(cfg.include_title) for d in docs])

    def one(i: int) -> KeywordSets:
        d = docs[i]
        body = d.body(cfg.include_title)
        doc_level = extract_doc_keywords(body, doc_vecs[i], embedder, kc.top_n, kc.lam)
        topic_level = topic_keywords_for_doc(doc_topics.get(d.doc_id, []), model)
        pool = build_pool(doc_level, topic_level)
        selected = select_keywords_llm(body, pool, chat, kc.target, doc_level=doc_level,
                                       topic_level=topic_level, seed=cfg.generation.seed) if pool else []
        return KeywordSets(d.doc_id, topic_level, doc_level, selected)

    with ThreadPoolExecutor(max_workers=cfg.chat.max_in_flight) as pool_exec:
        sets = list(pool_exec.map(one, range(len(docs))))
    C.write_jsonl(p["keywords"], (s.to_json() for s in sets))
    mean_sel = sum(len(s.selected) for s in sets) / max(1, len(sets))
    _summary(f"extract-keywords: {len(sets)} documents, {mean_sel:.1f} selected keywords/doc -> {p['keywords']}")


def run_generation(cfg: PipelineConfig, mode: str, output: Path | None = None) -> Path:
    p = paths(cfg)
    docs = _docs(cfg)
    gen = cfg.generation
    gen.mode = mode
    gen.validate()
    topic_names: dict[str, list[str]] = {}
    keywords: dict[str, list[str]] = {}
    if mode == "full":
        _require(p["topics"], p["doc_topics"])
        model = TopicModel.load(p["topics"])
        topic_names = {d: [model.name(t) for t in ts] for d, ts in _load_doc_topics(cfg).items()}
    if mode in ("full", "F+K"):
        _require(p["keywords"])
        keywords = {r["doc_id"]: list(r["selected"]) for r in C.read_jsonl(p["keywords"])}
    fewshot = load_exemplars(cfg.fewshot_path or None)
    chat = make_chat(cfg.chat)

    def one(d: C.Document):
        return generate_queries(d.doc_id, d.body(cfg.include_title), topic_names.get(d.doc_id, []),
                                keywords.get(d.doc_id, []), gen, chat, fewshot)

    with ThreadPoolExecutor(max_workers=cfg.chat.max_in_flight) as ex:
        records = list(ex.map(one, docs))
    out = output or expanded_path(cfg, mode)
    complete = [r for r in records if r.queries]
    if len(complete) < len(records):
        logger.warning("%d documents produced no queries and are left out of %s",
                       len(records) - len(complete), out)
    C.write_expanded_corpus([C.ExpandedDocument(r.doc_id, tuple(r.queries)) for r in complete], out)
    stem = out.stem.replace("expanded", "generation") if "expanded" in out.stem else out.stem + "_generation"
    gen_path = out.with_name(stem + ".jsonl")
    C.write_jsonl(gen_path, (r.to_json() for r in records))
    short = sum(1 for r in records if len(r.queries) < gen.num_queries)
    _summary(f"generate[{mode}]: {len(records)} documents, {sum(len(r.queries) for r in records)} queries, "
             f"{short} short -> {out}")
    return out


def cmd_generate(cfg: PipelineConfig, args) -> None:
    run_generation(cfg, args.mode, Path(args.output) if args.output else None)


def cmd_ablate(cfg: PipelineConfig, args) -> None:
    run_generation(cfg, args.mode, Path(args.output) if args.output else None)


def _load_expansions(path: Path | None) -> dict[str, C.ExpandedDocument]:
    if path is None:
        return {}
    _require(path)
    return {e.doc_id: e for e in C.load_expanded_corpus(path)}


def _truncate(exp: dict[str, C.ExpandedDocument], m: int | None) -> dict[str, C.ExpandedDocument]:
    if m is None:
        return exp
    return {k: C.ExpandedDocument(k, v.queries[:m]) for k, v in exp.items()}


def build_sparse(cfg: PipelineConfig, docs, expansions: dict[str, C.ExpandedDocument]) -> InvertedIndex:
    params = Bm25Params(cfg.bm25.k1, cfg.bm25.b)
    texts = ((d.doc_id, expand_text(d, expansions.get(d.doc_id), cfg.include_title)) for d in docs)
    return build_index(texts, params, cfg.bm25.stem)


def _sparse_index_path(cfg, args) -> Path:
    if args.index:
        return Path(args.index)
    return cfg.out / ("sparse_none.npz" if args.no_expansion else "sparse_expanded.npz")


def cmd_index_sparse(cfg: PipelineConfig, args) -> None:
    docs = _docs(cfg)
    exp_path = None if args.no_expansion else Path(args.expanded) if args.expanded else paths(cfg)["expanded"]
    expansions = _truncate(_load_expansions(exp_path), args.max_queries)
    index = build_sparse(cfg, docs, expansions)
    out = _sparse_index_path(cfg, args)
    out.parent.mkdir(parents=True, exist_ok=True)
    index.save(out)
    _summary(f"index-sparse: {index.n_docs} documents, {len(index.vocab)} terms, "
             f"avg length {index.avg_doc_length:.1f} -> {out}")


def cmd_index_dense(cfg: PipelineConfig, args) -> None:
    p = paths(cfg)
    docs = _docs(cfg)
    embedder = make_embedder(cfg.embedding)
    exp_path = Path(args.expanded) if args.expanded else p["expanded"]
    expansions = list(_load_expansions(exp_path).values())
    build_text_index(docs, embedder, cfg.include_title).save(p["dense_text"], cfg.fusion.similarity)
    qi = build_query_index(expansions, embedder)
    qi.save(p["dense_query"], cfg.fusion.similarity)
    build_append_index(docs, expansions, embedder, cfg.include_title).save(p["dense_append"], cfg.fusion.similarity)
    _summary(f"index-dense: {len(docs)} documents, {len(qi)} queries, dimension {qi.dimension} -> {cfg.out}")


def _queries(cfg) -> list[C.QueryRecord]:
    p = paths(cfg)
    _require(p["queries"])
    return C.load_queries(p["queries"])


def dense_runs(cfg: PipelineConfig, mode: str, params: FusionParams, depth: int,
               query_vecs: np.ndarray | None = None, indices: dict | None = None) -> dict:
    p = paths(cfg)
    queries = _queries(cfg)
    if query_vecs is None:
        query_vecs = make_embedder(cfg.embedding).embed_batch([q.text for q in queries])
    indices = indices if indices is not None else {}
    run = {}
    if mode == "append":
        _require(p["dense_append"])
        dual = indices.get("append") or DualIndex(VectorIndex.load(p["dense_append"]))
        for q, v in zip(queries, query_vecs):
            run[q.query_id] = [(h.doc_id, h.score) for h in dual.search_text(v, depth, params.similarity)]
        return run
    _require(p["dense_text"])
    if mode == "text":
        dual = indices.get("text") or DualIndex(VectorIndex.load(p["dense_text"]))
        for q, v in zip(queries, query_vecs):
            run[q.query_id] = [(h.doc_id, h.score) for h in dual.search_text(v, depth, params.similarity)]
        return run
    _require(p["dense_query"])
    dual = indices.get("fused") or DualIndex(VectorIndex.load(p["dense_text"]), VectorIndex.load(p["dense_query"]))
    for q, v in zip(queries, query_vecs):
        run[q.query_id] = [(h.doc_id, h.s) for h in dual.search_fused(v, params, depth)]
    return run


def sparse_run(index: InvertedIndex, queries: list[C.QueryRecord], depth: int) -> dict:
    return {q.query_id: [(h.doc_id, h.score) for h in index.search(q.text, depth)] for q in queries}


def _fusion_params(cfg, args) -> FusionParams:
    f = cfg.fusion
    return FusionParams(
        alpha=f.alpha if getattr(args, "alpha", None) is None else args.alpha,
        n_t=f.n_t if getattr(args, "n_t", None) is None else args.n_t,
        n_q=f.n_q if getattr(args, "n_q", None) is None else args.n_q,
        similarity=f.similarity,
    )


def cmd_search(cfg: PipelineConfig, args) -> None:
    depth = args.depth or cfg.search_depth
    if args.mode == "sparse":
        path = _sparse_index_path(cfg, args)
        _require(path)
        run = sparse_run(InvertedIndex.load(path), _queries(cfg), depth)
    else:
        run = dense_runs(cfg, args.mode, _fusion_params(cfg, args), depth)
    out = Path(args.output) if args.output else paths(cfg)["runs"] / f"{args.mode}.trec"
    write_run(run, out, tag=args.tag or f"docexpand-{args.mode}")
    _summary(f"search[{args.mode}]: {len(run)} queries, depth {depth} -> {out}")


def cmd_evaluate(cfg: PipelineConfig, args) -> None:
    qrels_path = Path(args.qrels) if args.qrels else paths(cfg)["qrels"]
    _require(Path(args.run), qrels_path)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    report = evaluate_run(read_run(args.run), C.load_qrels(qrels_path), metrics)
    out = Path(args.output) if args.output else cfg.out / "reports" / f"{Path(args.run).stem}.json"
    write_report(report, out)
    _summary("evaluate: " + ", ".join(f"{m}={report.means[m]:.4f}" for m in metrics) + f" -> {out}")


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sweep_alpha(cfg: PipelineConfig, values: list[float], depth: int | None = None) -> list[list]:
    p = paths(cfg)
    _require(p["dense_text"], p["dense_query"], p["qrels"])
    qrels = C.load_qrels(p["qrels"])
    queries = _queries(cfg)
    vecs = make_embedder(cfg.embedding).embed_batch([q.text for q in queries])
    dual = DualIndex(VectorIndex.load(p["dense_text"]), VectorIndex.load(p["dense_query"]))
    rows = []
    for a in values:
        params = FusionParams(a, cfg.fusion.n_t, cfg.fusion.n_q, cfg.fusion.similarity)
        run = dense_runs(cfg, "fused", params, depth or cfg.search_depth, vecs, {"fused": dual})
        rep = evaluate_run(run, qrels, ("ndcg@10", "recall@100"))
        rows.append([a, rep["ndcg@10"], rep["recall@100"]])
    return rows


def cmd_sweep_alpha(cfg: PipelineConfig, args) -> None:
    values = ([float(v) for v in args.values.split(",")] if args.values
              else [round(0.1 * i, 1) for i in range(11)])
    rows = sweep_alpha(cfg, values, args.depth)
    out = Path(args.output) if args.output else cfg.out / "sweep_alpha.csv"
    C.atomic_write_text(out, _csv(rows, ["alpha", "ndcg@10", "recall@100"]))
    _summary(f"sweep-alpha: {len(rows)} rows -> {out}")


def sweep_query_count(cfg: PipelineConfig, counts: list[int], expanded: Path | None = None,
                      depth: int | None = None) -> list[list]:
    p = paths(cfg)
    _require(p["qrels"])
    docs = _docs(cfg)
    qrels = C.load_qrels(p["qrels"])
    queries = _queries(cfg)
    full = _load_expansions(expanded or p["expanded"])
    rows = []
    for m in sorted(set(counts)):
        index = build_sparse(cfg, docs, _truncate(full, m))
        rep = evaluate_run(sparse_run(index, queries, depth or cfg.search_depth), qrels, ("ndcg@10", "recall@100"))
        rows.append([m, rep["ndcg@10"], rep["recall@100"]])
    return rows


def cmd_sweep_query_count(cfg: PipelineConfig, args) -> None:
    counts = [int(v) for v in args.counts.split(",")] if args.counts else [0, 10, 20, 30]
    if any(c < 0 for c in counts):
        raise UsageError("query counts must be >= 0")
    rows = sweep_query_count(cfg, counts, Path(args.expanded) if args.expanded else None, args.depth)
    out = Path(args.output) if args.output else cfg.out / "sweep_query_count.csv"
    C.atomic_write_text(out, _csv(rows, ["num_queries", "ndcg@10", "recall@100"]))
    _summary(f"sweep-query-count: {len(rows)} rows -> {out}")


def cmd_topic_recall(cfg: PipelineConfig, args) -> None:
    p = paths(cfg)
    exp_path = Path(args.expanded) if args.expanded else p["expanded"]
    _require(p["topics"], p["doc_topics"], exp_path)
    model = TopicModel.load(p["topics"])
    gold = _load_doc_topics(cfg)
    embedder = make_embedder(cfg.embedding)
    per_doc = {}
    for e in C.load_expanded_corpus(exp_path):
        g = gold.get(e.doc_id, [])
        if not g or not e.queries:
            continue
        per_doc[e.doc_id] = topic_recall(g, embedder.embed_batch(list(e.queries)), model)
    result = {"mean": (sum(per_doc.values()) / len(per_doc)) if per_doc else None,
              "documents": len(per_doc), "per_doc": per_doc}
    if args.baseline_run and args.expanded_run:
        qrels = C.load_qrels(p["qrels"])
        run = read_run(args.expanded_run)
        base = evaluate_run(read_run(args.baseline_run), qrels)
        expd = evaluate_run(run, qrels)
        for metric in ("ndcg@10", "recall@100"):
            qids, xs, ys = gain_vs_topic_recall(base, expd, run, per_doc, metric)
            try:
                r = pearson(xs, ys)
            except (UndefinedCorrelation, ValueError) as exc:
                logger.warning("correlation for %s undefined: %s", metric, exc)
                r = None
            result[f"pearson_{metric}"] = r
            result[f"pairs_{metric}"] = len(qids)
    out = Path(args.output) if args.output else cfg.out / "topic_recall.json"
    C.atomic_write_text(out, json.dumps(result, indent=2, sort_keys=True) + "\n")
    mean = result["mean"]
    _summary(f"topic-recall: {len(per_doc)} documents, mean {mean if mean is None else round(mean, 4)} -> {out}")


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON pipeline config")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set fusion.alpha=0.3")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="docexpand", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="load a BEIR dataset and segment sentences")
    p.add_argument("--dataset", help="BEIR dataset directory, or 'mini' for the bundled sample")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit-topics", parents=[common], help="cluster sentences and name topics")
    p.set_defaults(func=cmd_fit_topics)

    p = sub.add_parser("extract-keywords", parents=[common], help="document keywords and LLM selection")
    p.set_defaults(func=cmd_extract_keywords)

    for name, func, helptext in (("generate", cmd_generate, "generate queries per document"),
                                 ("ablate", cmd_ablate, "generate an ablation variant")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--mode", choices=MODES, default="full" if name == "generate" else None,
                       required=name == "ablate")
        p.add_argument("--output", help="expanded corpus path")
        p.set_defaults(func=func)

    p = sub.add_parser("index-sparse", parents=[common], help="build the BM25 index")
    p.add_argument("--expanded", help="expanded corpus to append (default: expanded.jsonl)")
    p.add_argument("--no-expansion", action="store_true", help="index original text only")
    p.add_argument("--max-queries", type=int, help="truncate each document's queries")
    p.add_argument("--index", help="snapshot path")
    p.set_defaults(func=cmd_index_sparse)

    p = sub.add_parser("index-dense", parents=[common], help="build text, query and append indices")
    p.add_argument("--expanded", help="expanded corpus (default: expanded.jsonl)")
    p.set_defaults(func=cmd_index_dense)

    p = sub.add_parser("search", parents=[common], help="retrieve and write a TREC run")
    p.add_argument("--mode", choices=("sparse", "text", "fused", "append"), default="fused")
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-t", type=int, dest="n_t")
    p.add_argument("--n-q", type=int, dest="n_q")
    p.add_argument("--depth", type=int)
    p.add_argument("--index", help="sparse snapshot path")
    p.add_argument("--no-expansion", action="store_true", help="use the no-expansion sparse index")
    p.add_argument("--output", help="run file path")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", parents=[common], help="score a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels")
    p.add_argument("--metrics", default=",".join(METRICS))
    p.add_argument("--output", help="JSON report path (default: <output_dir>/reports/<run>.json)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-alpha", parents=[common], help="fusion weight sweep")
    p.add_argument("--values", help="comma-separated alphas (default 0.0..1.0 step 0.1)")
    p.add_argument("--depth", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("sweep-query-count", parents=[common], help="queries-per-document sweep")
    p.add_argument("--counts", help="comma-separated query counts (default 0,10,20,30)")
    p.add_argument("--expanded")
    p.add_argument("--depth", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep_query_count)

    p = sub.add_parser("topic-recall", parents=[common], help="topic coverage of generated queries")
    p.add_argument("--expanded")
    p.add_argument("--baseline-run")
    p.add_argument("--expanded-run")
    p.add_argument("--output")
    p.set_defaults(func=cmd_topic_recall)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.command == "search" and args.mode == "fused":
            _fusion_params(cfg, args)
        args.func(cfg, args)
    except (ConfigError, UsageError) as exc:
        print(f"docexpand {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        logger.debug("failure", exc_info=True)
        print(f"docexpand {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
