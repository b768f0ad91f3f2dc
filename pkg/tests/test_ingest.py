import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memestream.ingest import (
    INVALID_TIMESTAMP,
    MALFORMED_SYNTAX,
    MISSING_REQUIRED_FIELD,
    IngestStats,
    ParseError,
    ReorderBuffer,
    SocketLineSource,
    TEXT_CAP,
    dedup,
    format_timestamp,
    parse_record,
    parse_timestamp,
    replay,
    tweet_from_obj,
    tweet_to_obj,
)

from conftest import BASE_TS, make_tweet, record_line


class TestParseRecord:
    def test_minimal_valid_record(self):
        t = parse_record(record_line(text="I love #bahrain"))
        assert t.id == 1
        assert t.user_id == 42
        assert t.screen_name == "alice"
        assert t.text == "I love #bahrain"
        assert t.entities is None  # extraction happens downstream
        assert t.retweet_of_user_id is None

    def test_missing_user_id(self):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(user_id=None))
        assert err.value.reason == MISSING_REQUIRED_FIELD

    @pytest.mark.parametrize("field", ["id", "created_at", "screen_name", "text"])
    def test_missing_required_fields(self, field):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(**{field: None}))
        assert err.value.reason == MISSING_REQUIRED_FIELD

    def test_not_json(self):
        with pytest.raises(ParseError) as err:
            parse_record(b"{nope")
        assert err.value.reason == MALFORMED_SYNTAX

    def test_not_an_object(self):
        with pytest.raises(ParseError) as err:
            parse_record("[1,2]")
        assert err.value.reason == MALFORMED_SYNTAX

    def test_bad_timestamp(self):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(created_at="yesterdayish"))
        assert err.value.reason == INVALID_TIMESTAMP

    def test_offset_timestamp_accepted(self):
        t = parse_record(record_line(created_at="2010-09-01T14:00:00+02:00"))
        assert t.created_at == BASE_TS

    def test_retweet_fields(self):
        t = parse_record(record_line(retweet_of_user_id=7, retweet_of_screen_name="bob"))
        assert t.retweet_of_user_id == 7
        assert t.retweet_of_screen_name == "bob"

    def test_retweet_without_screen_name(self):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(retweet_of_user_id=7))
        assert err.value.reason == MISSING_REQUIRED_FIELD

    def test_bad_screen_name(self):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(screen_name="way too long a screen name!"))
        assert err.value.reason == MALFORMED_SYNTAX

    def test_text_truncated_at_cap(self):
        stats = IngestStats()
        t = parse_record(record_line(text="x" * 500), stats)
        assert len(t.text) == TEXT_CAP
        assert stats.truncated == 1

    def test_entities_parsed(self):
        t = parse_record(record_line(entities={"hashtags": ["p2"], "mentions": ["bob"]}))
        assert list(t.entities.hashtags) == ["p2"]
        assert list(t.entities.mentions) == ["bob"]
        assert list(t.entities.urls) == []

    def test_bad_entities_shape(self):
        with pytest.raises(ParseError) as err:
            parse_record(record_line(entities={"hashtags": "p2"}))
        assert err.value.reason == MALFORMED_SYNTAX

    def test_bool_id_rejected(self):
        with pytest.raises(ParseError):
            parse_record(record_line(id=True))

    def test_roundtrip_obj(self):
        t = parse_record(record_line(retweet_of_user_id=7, retweet_of_screen_name="bob",
                                     entities={"urls": ["http://x.co/1"]}))
        assert tweet_from_obj(tweet_to_obj(t)) == t


class TestTimestamps:
    def test_roundtrip(self):
        assert format_timestamp(parse_timestamp("2010-09-01T12:00:00Z")) == "2010-09-01T12:00:00Z"

    def test_naive_rejected(self):
        with pytest.raises(ParseError):
            parse_timestamp("2010-09-01T12:00:00")


class TestReorderBuffer:
    def test_out_of_order_within_window_sorted(self):
        buf = ReorderBuffer(window_s=60)
        t1 = make_tweet(tweet_id=1, ts=BASE_TS + 1)
        t2 = make_tweet(tweet_id=2, ts=BASE_TS + 2)
        t3 = make_tweet(tweet_id=3, ts=BASE_TS + 3)
        out = []
        for t in (t3, t1, t2):
            out.extend(buf.push(t))
        out.extend(buf.flush())
        assert [t.id for t in out] == [1, 2, 3]

    def test_late_record_dropped_and_counted(self):
        stats = IngestStats()
        buf = ReorderBuffer(window_s=60, stats=stats)
        buf.push(make_tweet(tweet_id=1, ts=BASE_TS + 1000))
        out = buf.push(make_tweet(tweet_id=2, ts=BASE_TS))
        assert out == []
        assert stats.late_dropped == 1
        assert [t.id for t in buf.flush()] == [1]

    def test_watermark_emission(self):
        buf = ReorderBuffer(window_s=60)
        assert buf.push(make_tweet(tweet_id=1, ts=BASE_TS)) == []
        emitted = buf.push(make_tweet(tweet_id=2, ts=BASE_TS + 61))
        assert [t.id for t in emitted] == [1]


class TestReplay:
    def test_empty_stream(self):
        assert list(replay([])) == []

    def test_speed_zero_deterministic(self):
        lines = [record_line(id=i, created_at=format_timestamp(BASE_TS + i)) for i in range(50)]
        a = [t.id for t in replay(list(lines))]
        b = [t.id for t in replay(list(lines))]
        assert a == b == list(range(50))

    def test_pacing_factor_sleeps_scaled_gaps(self):
        lines = [
            record_line(id=1, created_at=format_timestamp(BASE_TS)),
            record_line(id=2, created_at=format_timestamp(BASE_TS + 10)),
        ]
        naps = []
        list(replay(lines, speed=2.0, sleep=naps.append))
        assert naps == [20.0]

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            list(replay([], speed=-1))

    def test_fault_isolation_counts(self):
        lines = [
            record_line(id=1),
            "not json at all",
            record_line(id=2),
            '{"id": 3}',
            record_line(id=4),
        ]
        stats = IngestStats()
        out = list(replay(lines, stats=stats))
        assert [t.id for t in out] == [1, 2, 4]
        assert stats.error_total == 2

    def test_blank_lines_skipped_silently(self):
        stats = IngestStats()
        out = list(replay([record_line(id=1), "", "   \n"], stats=stats))
        assert len(out) == 1
        assert stats.error_total == 0
        assert stats.lines == 1


class TestDedup:
    def test_first_occurrence_wins(self):
        stats = IngestStats()
        a = make_tweet(tweet_id=1, text="first")
        b = make_tweet(tweet_id=1, text="second")
        out = list(dedup([a, b], set(), stats))
        assert [t.text for t in out] == ["first"]
        assert stats.duplicates == 1

    def test_preloaded_seen(self):
        stats = IngestStats()
        out = list(dedup([make_tweet(tweet_id=5)], {5}, stats))
        assert out == []
        assert stats.duplicates == 1


@given(
    st.lists(
        st.tuples(st.booleans(), st.integers(min_value=0, max_value=59)),
        min_size=0,
        max_size=60,
    )
)
@settings(max_examples=150, deadline=None)
def test_fault_isolation_property(plan):
    """k malformed lines among n valid ones: exactly n tweets out, k errors."""
    lines = []
    n = k = 0
    for i, (valid, offset) in enumerate(plan):
        if valid:
            n += 1
            lines.append(record_line(id=i + 1, created_at=format_timestamp(BASE_TS + offset)))
        else:
            k += 1
            lines.append("}malformed{")
    stats = IngestStats()
    out = list(replay(lines, stats=stats))
    assert len(out) == n
    assert stats.error_total == k
    assert [t.created_at for t in out] == sorted(t.created_at for t in out)


def test_socket_source_round_trip():
    import socket

    source = SocketLineSource(0)
    source.start()
    try:
        with socket.create_connection(("127.0.0.1", source.port), timeout=5) as conn:
            conn.sendall((record_line(id=1) + "\n" + record_line(id=2) + "\n").encode())
        collected = []
        it = iter(source)
        for _ in range(2):
            collected.append(next(it))
    finally:
        source.stop()
    parsed = [parse_record(line) for line in collected]
    assert [t.id for t in parsed] == [1, 2]
