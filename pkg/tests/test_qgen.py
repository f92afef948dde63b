import pytest
from hypothesis import given, settings, strategies as st

from docexpand.gateway import BackendUnavailable, ScriptedChat, SyntheticChat
from docexpand.qgen import (NO_TOPIC_SENTINEL, GenerationConfig, GenerationError, build_prompt,
                            generate_queries, load_exemplars, parse_exemplars, parse_queries)

FEWSHOT = load_exemplars()


def batch(*qs):
    return "\n".join(f"- {q}" for q in qs)


def test_bundled_exemplars_parse():
    assert len(FEWSHOT) >= 3
    first = FEWSHOT[0]
    assert "index fund" in first.article.lower() or "index fund" in first.keywords.lower()
    assert all(ex.queries for ex in FEWSHOT)


def test_parse_exemplars_requires_fields():
    with pytest.raises(ValueError):
        parse_exemplars("Example 1\n\nArticle:\nx\n")


def test_prompt_uses_sentinel_for_empty_topics():
    p = build_prompt("Body.", [], ["k"], FEWSHOT)
    assert f"Topics: {NO_TOPIC_SENTINEL}" in p


def test_prompt_contains_all_slots():
    topics = ["Alpha Topic", "Beta Topic", "Gamma Topic"]
    kws = [f"kw{i}" for i in range(10)]
    p = build_prompt("Passage body.", topics, kws, FEWSHOT)
    assert all(s in p for s in topics + kws)
    assert p.rstrip().endswith("Queries:")


def test_prompt_modes():
    f = build_prompt("Body.", ["T"], ["k"], FEWSHOT, mode="F")
    fk = build_prompt("Body.", ["T"], ["k"], FEWSHOT, mode="F+K")
    full = build_prompt("Body.", ["T"], ["k"], FEWSHOT, mode="full")
    assert "Topics:" not in f and "Keywords:" not in f
    assert "Topics:" not in fk and "Keywords:" in fk
    assert "Topics:" in full and "Keywords:" in full


def test_parse_bullets():
    assert parse_queries("- Q1?\n- Q2?\n- Q3?") == ["Q1?", "Q2?", "Q3?"]


def test_parse_short_batch():
    assert parse_queries("1. Q1?\n2. Q2?", expected=3) == ["Q1?", "Q2?"]


def test_parse_refusal():
    assert parse_queries("I cannot help with that.") == []


def test_ten_clean_batches():
    chat = ScriptedChat([batch(f"q{3 * i}", f"q{3 * i + 1}", f"q{3 * i + 2}") for i in range(10)])
    rec = generate_queries("d1", "Body.", ["T"], ["k"], GenerationConfig(), chat, FEWSHOT)
    assert len(rec.queries) == 30 and rec.batches_issued == 10
    assert [r.seed for r in chat.requests] == list(range(10))


def test_duplicate_triggers_refill():
    script = [batch(f"q{3 * i}", f"q{3 * i + 1}", f"q{3 * i + 2}") for i in range(10)]
    script[4] = batch("Q0", "q13", "q14")  # case-insensitive repeat of q0
    script.append(batch("extra1", "extra2", "extra3"))
    rec = generate_queries("d1", "Body.", [], [], GenerationConfig(), ScriptedChat(script), FEWSHOT)
    assert rec.batches_issued == 11 and len(rec.queries) == 30
    assert "Q0" not in rec.queries and rec.queries[-1] == "extra1"


def test_unparseable_hits_cap(caplog):
    cfg = GenerationConfig()
    chat = ScriptedChat(["I cannot help with that."] * 100)
    rec = generate_queries("d1", "Body.", [], [], cfg, chat, FEWSHOT)
    assert rec.queries == [] and rec.batches_issued == cfg.batch_cap == 40
    assert "only 0 of 30" in caplog.text


def test_hard_failure_carries_partial():
    chat = ScriptedChat([batch("a?", "b?", "c?"), BackendUnavailable("gone")])
    with pytest.raises(GenerationError) as info:
        generate_queries("d1", "Body.", [], [], GenerationConfig(), chat, FEWSHOT)
    assert info.value.partial.queries == ["a?", "b?", "c?"]


def test_config_validation():
    with pytest.raises(ValueError):
        GenerationConfig(num_queries=2, batch_size=3).validate()
    with pytest.raises(ValueError):
        GenerationConfig(mode="K").validate()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["a?", "A?", "b?", "c?", "B?", "junk", "d?", "e?"]), min_size=1, max_size=40),
       st.integers(3, 12))
def test_generation_invariants(items, m):
    script = [batch(*items[i:i + 3]) for i in range(0, len(items), 3)] + ["nothing"] * 200
    cfg = GenerationConfig(num_queries=m, batch_size=3)
    rec = generate_queries("d", "Body.", [], [], cfg, ScriptedChat(script), FEWSHOT)
    keys = [q.casefold() for q in rec.queries]
    assert len(keys) == len(set(keys)) and len(keys) <= m
    assert rec.batches_issued <= cfg.batch_cap


def test_synthetic_generation_is_pure():
    cfg = GenerationConfig()
    args = ("d1", "Central banks raise interest rates to slow inflation.", ["Monetary Policy"],
            ["interest rates", "inflation"], cfg)
    a = generate_queries(*args, SyntheticChat(), FEWSHOT)
    b = generate_queries(*args, SyntheticChat(), FEWSHOT)
    assert a.queries == b.queries and len(a.queries) == 30
