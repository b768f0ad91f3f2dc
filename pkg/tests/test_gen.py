import json

import pytest

from memestream.engine import Pipeline, PipelineConfig, parse_key_str
from memestream.extraction import extract_memes
from memestream.gen import GenParams, generate
from memestream.ingest import IngestStats, iter_parsed, read_lines
from memestream.themes import Theme, load_themes

from conftest import load_themes3


def test_same_seed_byte_identical(tmp_path, themes3):
    themes = load_themes3(themes3)
    generate(GenParams(tweets=500, users=40, seed=7), themes, tmp_path / "a.ndjson")
    generate(GenParams(tweets=500, users=40, seed=7), themes, tmp_path / "b.ndjson")
    assert (tmp_path / "a.ndjson").read_bytes() == (tmp_path / "b.ndjson").read_bytes()
    assert (tmp_path / "a.ndjson.ledger.json").read_bytes() == (
        tmp_path / "b.ndjson.ledger.json"
    ).read_bytes()


def test_different_seed_differs(tmp_path, themes3):
    themes = load_themes3(themes3)
    generate(GenParams(tweets=200, users=40, seed=1), themes, tmp_path / "a.ndjson")
    generate(GenParams(tweets=200, users=40, seed=2), themes, tmp_path / "b.ndjson")
    assert (tmp_path / "a.ndjson").read_bytes() != (tmp_path / "b.ndjson").read_bytes()


def test_all_records_parse_clean(tmp_path, themes3):
    themes = load_themes3(themes3)
    generate(GenParams(tweets=10000, users=200, seed=7), themes, tmp_path / "c.ndjson")
    stats = IngestStats()
    tweets = list(iter_parsed(read_lines(tmp_path / "c.ndjson"), stats))
    assert len(tweets) == 10000
    assert stats.error_total == 0
    assert [t.created_at for t in tweets] == sorted(t.created_at for t in tweets)


def test_ledger_meme_counts_match_independent_corpus_scan(tmp_path, themes3):
    """Every per-tweet meme set recomputed by extraction equals the
    generator's construction-level account."""
    themes = load_themes3(themes3)
    ledger = generate(GenParams(tweets=1000, users=50, seed=3), themes, tmp_path / "d.ndjson")
    stats = IngestStats()
    counts = {}
    for tweet in iter_parsed(read_lines(tmp_path / "d.ndjson"), stats):
        for key in extract_memes(tweet):
            counts[str(key)] = counts.get(str(key), 0) + 1
    assert counts == ledger["meme_counts"]


def test_ledger_routing_matches_pipeline(tmp_path, themes3):
    from memestream.themes import route

    themes = load_themes3(themes3)
    ledger = generate(GenParams(tweets=1500, users=60, seed=5), themes, tmp_path / "e.ndjson")

    # route() over the corpus agrees with the ledger per theme
    per_theme = {t.name: 0 for t in themes}
    stats = IngestStats()
    for tweet in iter_parsed(read_lines(tmp_path / "e.ndjson"), stats):
        for name in route(tweet, themes):
            per_theme[name] += 1
    assert per_theme == ledger["theme_routed"]

    p = Pipeline(PipelineConfig(state_dir=None, themes=themes))
    p.ingest_lines(read_lines(tmp_path / "e.ndjson"))
    assert p.accepted == ledger["totals"]["routed"]
    # per-meme counts over routed tweets
    for key_str, count in ledger["routed_meme_counts"].items():
        assert p.networks[parse_key_str(key_str)].tweet_count == count
    assert len(p.meme_summaries) == len(ledger["routed_meme_counts"])


def test_single_user_corpus_has_single_node_networks(tmp_path):
    # no '@' keywords: with one user, every pool-drawn retweet/mention is a
    # self-loop, so graphs collapse to single nodes with no edges
    themes = [Theme.build("T", ["#tag000", "#tag001", "about"])]
    generate(GenParams(tweets=300, users=1, seed=9, salt_frac=0.5), themes, tmp_path / "f.ndjson")
    p = Pipeline(PipelineConfig(state_dir=None, themes=themes))
    p.ingest_lines(read_lines(tmp_path / "f.ndjson"))
    assert p.accepted > 0
    assert any(net.self_edges_dropped for net in p.networks.values())
    for net in p.networks.values():
        assert len(net.nodes) == 1
        assert net.edges == {}


def test_invalid_params_rejected(tmp_path, themes3):
    themes = load_themes3(themes3)
    with pytest.raises(ValueError):
        generate(GenParams(tweets=0, users=5, seed=1), themes, tmp_path / "x.ndjson")
    with pytest.raises(ValueError):
        generate(GenParams(tweets=5, users=0, seed=1), themes, tmp_path / "x.ndjson")


def test_multiword_keyword_rejected_for_salting(tmp_path):
    theme = Theme.build("X", ["new york"])
    with pytest.raises(ValueError):
        generate(GenParams(tweets=5, users=2, seed=1), [theme], tmp_path / "x.ndjson")


def test_minute_plants_match_pipeline_time_series(tmp_path, themes3):
    from memestream.analytics import time_series
    from memestream.ingest import format_timestamp

    themes = load_themes3(themes3)
    ledger = generate(GenParams(tweets=800, users=30, seed=13), themes, tmp_path / "g.ndjson")
    p = Pipeline(PipelineConfig(state_dir=None, themes=themes))
    p.ingest_lines(read_lines(tmp_path / "g.ndjson"))
    checked = 0
    for key_str, minutes in ledger["routed_meme_minutes"].items():
        net = p.networks[parse_key_str(key_str)]
        series = time_series(net, "minute")
        nonzero = {
            format_timestamp(b.start): b.tweet_count for b in series.buckets if b.tweet_count
        }
        assert nonzero == minutes
        checked += 1
    assert checked == len(p.meme_summaries)
