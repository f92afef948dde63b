import csv
import json

import pytest

from docexpand import cli
from docexpand.config import ConfigError, load_config, parse_override
from docexpand.corpus import load_expanded_corpus, load_qrels
from docexpand.evaluation import evaluate_run, read_run

STAGES = [
    ["ingest", "--dataset", "mini"],
    ["fit-topics"],
    ["extract-keywords"],
    ["generate"],
    ["index-sparse"],
    ["index-sparse", "--no-expansion"],
    ["index-dense"],
]


def run(out, *args):
    return cli.main([*args, "--set", f"output_dir={out}"])


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    for stage in STAGES:
        assert run(out, *stage) == 0, stage
    return out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_generate_thirty_per_doc(built):
    exp = load_expanded_corpus(built / "expanded.jsonl")
    assert len(exp) == 50 and all(len(e.queries) == 30 for e in exp)


def test_search_and_evaluate(built):
    assert run(built, "search", "--mode", "fused", "--alpha", "0.5") == 0
    lines = (built / "runs" / "fused.trec").read_text().splitlines()
    assert len(lines) == 20 * 50  # depth 1000 capped by corpus size
    assert run(built, "evaluate", "--run", str(built / "runs" / "fused.trec"),
               "--metrics", "map,ndcg@10,recall@100", "--output", str(built / "rep.json")) == 0
    report = json.loads((built / "rep.json").read_text())
    assert set(report) >= {"map", "ndcg@10", "recall@100"}
    assert set(report["map"]) == {"mean", "per_query"}


def test_sweep_alpha_zero_is_text_only(built):
    assert run(built, "sweep-alpha", "--values", "0,1") == 0
    rows = read_csv(built / "sweep_alpha.csv")
    assert [r["alpha"] for r in rows] == ["0.0", "1.0"]
    assert run(built, "search", "--mode", "text") == 0
    text = evaluate_run(read_run(built / "runs" / "text.trec"), load_qrels(built / "qrels.tsv"))
    assert float(rows[0]["ndcg@10"]) == text["ndcg@10"]
    assert float(rows[0]["recall@100"]) == text["recall@100"]


def test_sweep_alpha_default_grid(built):
    assert run(built, "sweep-alpha", "--output", str(built / "grid.csv")) == 0
    assert len(read_csv(built / "grid.csv")) == 11


def test_sweep_query_count_zero_is_baseline(built):
    assert run(built, "sweep-query-count", "--counts", "30,0") == 0
    rows = read_csv(built / "sweep_query_count.csv")
    assert [r["num_queries"] for r in rows] == ["0", "30"]
    assert run(built, "search", "--mode", "sparse", "--no-expansion", "--output", str(built / "none.trec")) == 0
    base = evaluate_run(read_run(built / "none.trec"), load_qrels(built / "qrels.tsv"))
    assert float(rows[0]["ndcg@10"]) == base["ndcg@10"]
    assert float(rows[0]["recall@100"]) == base["recall@100"]


@pytest.mark.parametrize("mode", ["F", "F+K"])
def test_ablate_modes(built, mode):
    out = built / f"abl_{mode}.jsonl"
    assert run(built, "ablate", "--mode", mode, "--output", str(out)) == 0
    assert all(len(e.queries) == 30 for e in load_expanded_corpus(out))


def test_topic_recall_report(built):
    for mode, extra in (("sparse", ["--no-expansion", "--output", str(built / "b.trec")]),
                        ("sparse", ["--output", str(built / "e.trec")])):
        assert run(built, "search", "--mode", mode, *extra) == 0
    assert run(built, "topic-recall", "--baseline-run", str(built / "b.trec"),
               "--expanded-run", str(built / "e.trec")) == 0
    rep = json.loads((built / "topic_recall.json").read_text())
    assert rep["documents"] > 0 and 0 <= rep["mean"] <= 1
    assert "pearson_ndcg@10" in rep


def test_missing_input_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "fit-topics") == 1
    assert "missing input" in capsys.readouterr().err


def test_bad_flag_exits_one():
    with pytest.raises(SystemExit) as info:
        cli.main(["search", "--mode", "nonsense"])
    assert info.value.code == 1


def test_bad_config_value_exits_one(tmp_path):
    assert run(tmp_path, "ingest", "--dataset", "mini", "--set", "fusion.alpha=2") == 1


def test_runtime_failure_exits_two(tmp_path):
    (tmp_path / "corpus.jsonl").write_text("{broken\n")
    (tmp_path / "doc_topics.jsonl").write_text("")
    (tmp_path / "topics.json").write_text("{}")
    assert run(tmp_path, "extract-keywords") == 2


def test_config_file_and_overrides(tmp_path, monkeypatch):
    cfg = tmp_path / "run.toml"
    cfg.write_text('output_dir = "o"\n[fusion]\nalpha = 0.3\n[embedding]\ndimension = 16\n')
    monkeypatch.setenv("DOCEXPAND_CHAT_MODEL", "m2")
    c = load_config(str(cfg), ["fusion.n_t=50", "generation.num_queries=9"])
    assert c.out == tmp_path / "o"
    assert (c.fusion.alpha, c.fusion.n_t, c.embedding.dimension) == (0.3, 50, 16)
    assert c.generation.num_queries == 9 and c.chat.model_name == "m2"


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="nope"):
        load_config(None, ["fusion.nope=1"])


def test_parse_override():
    assert parse_override("a.b=0.5") == (["a", "b"], 0.5)
    assert parse_override("x=hello") == (["x"], "hello")
