"""Wire-format parsing, event-time reordering, and corpus replay.

One tweet per line, UTF-8 JSON, as documented in the README. Bad records
are counted and skipped; the stream never aborts on a malformed line.
"""

from __future__ import annotations

import heapq
import json
import re
import socketserver
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from queue import Queue
from typing import Iterable, Iterator

from .extraction import Entities

# Records more than this far (event time) behind the newest seen record
# are counted as late and dropped.
REORDER_WINDOW_S = 60

# Text above this many code points is truncated, not rejected.
TEXT_CAP = 280

# Live sources inject this sentinel after an idle period; replay() drains
# the reorder buffer when it sees one, trading strict ordering on a
# stalled stream for liveness.
FLUSH = object()

MALFORMED_SYNTAX = "malformed_syntax"
MISSING_REQUIRED_FIELD = "missing_required_field"
INVALID_TIMESTAMP = "invalid_timestamp"

PARSE_REASONS = (MALFORMED_SYNTAX, MISSING_REQUIRED_FIELD, INVALID_TIMESTAMP)

_SCREEN_NAME_RE = re.compile(r"[A-Za-z0-9_]{1,15}\Z")
_TS_RE = re.compile(r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})Z\Z")

_REQUIRED_FIELDS = ("id", "created_at", "user_id", "screen_name", "text")


class ParseError(ValueError):
    """Invalid ingest record. `reason` is one of PARSE_REASONS."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


@dataclass(slots=True)
class Tweet:
    id: int
    created_at: int  # unix seconds, UTC
    user_id: int
    screen_name: str
    text: str
    retweet_of_user_id: int | None = None
    retweet_of_screen_name: str | None = None
    entities: Entities | None = None


_TS_MEMO: dict[str, int] = {}


def parse_timestamp(raw: str) -> int:
    """RFC 3339 UTC timestamp -> unix seconds. Fast path for the canonical
    'YYYY-MM-DDTHH:MM:SSZ' shape, fromisoformat fallback for offsets."""
    memo = _TS_MEMO.get(raw)
    if memo is not None:
        return memo
    m = _TS_RE.match(raw)
    if m:
        try:
            ts = int(
                datetime(
                    int(m.group(1)), int(m.group(2)), int(m.group(3)),
                    int(m.group(4)), int(m.group(5)), int(m.group(6)),
                    tzinfo=timezone.utc,
                ).timestamp()
            )
        except ValueError as exc:
            raise ParseError(INVALID_TIMESTAMP, raw) from exc
    else:
        try:
            dt = datetime.fromisoformat(raw.replace("Z", "+00:00"))
        except ValueError as exc:
            raise ParseError(INVALID_TIMESTAMP, raw) from exc
        if dt.tzinfo is None:
            raise ParseError(INVALID_TIMESTAMP, f"naive timestamp: {raw}")
        ts = int(dt.timestamp())
    if len(_TS_MEMO) > 4096:
        _TS_MEMO.clear()
    _TS_MEMO[raw] = ts
    return ts


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class IngestStats:
    """Counters for one ingest session."""

    lines: int = 0
    parsed: int = 0
    truncated: int = 0
    late_dropped: int = 0
    duplicates: int = 0
    errors: dict[str, int] = field(
        default_factory=lambda: {r: 0 for r in PARSE_REASONS}
    )

    @property
    def error_total(self) -> int:
        return sum(self.errors.values())

    def as_dict(self) -> dict:
        return {
            "lines": self.lines,
            "parsed": self.parsed,
            "truncated": self.truncated,
            "late_dropped": self.late_dropped,
            "duplicates": self.duplicates,
            "errors": dict(self.errors),
        }


def _require_int(obj: dict, key: str) -> int:
    v = obj[key]
    # bool is an int subclass; reject it explicitly
    if type(v) is not int or v < 0:
        raise ParseError(MALFORMED_SYNTAX, f"field {key!r} must be a nonnegative integer")
    return v


def _require_handle(value, key: str) -> str:
    if not isinstance(value, str) or not _SCREEN_NAME_RE.match(value):
        raise ParseError(MALFORMED_SYNTAX, f"field {key!r} must be 1-15 chars of [A-Za-z0-9_]")
    return value


def _parse_entities(obj) -> Entities:
    if not isinstance(obj, dict):
        raise ParseError(MALFORMED_SYNTAX, "entities must be an object")
    lists = []
    for key in ("hashtags", "mentions", "urls"):
        v = obj.get(key, [])
        if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
            raise ParseError(MALFORMED_SYNTAX, f"entities.{key} must be a list of strings")
        lists.append(tuple(v))
    return Entities(*lists)


def parse_record(line: str | bytes, stats: IngestStats | None = None) -> Tweet:
    """One wire-format line -> Tweet. Raises ParseError on bad records;
    over-long text is truncated to TEXT_CAP code points and counted."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(MALFORMED_SYNTAX, "not valid UTF-8") from exc
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(MALFORMED_SYNTAX, str(exc)) from exc
    if not isinstance(obj, dict):
        raise ParseError(MALFORMED_SYNTAX, "record is not an object")
    for key in _REQUIRED_FIELDS:
        if key not in obj:
            raise ParseError(MISSING_REQUIRED_FIELD, key)

    tweet_id = obj["id"]
    user_id = obj["user_id"]
    if type(tweet_id) is not int or tweet_id < 0:
        raise ParseError(MALFORMED_SYNTAX, "field 'id' must be a nonnegative integer")
    if type(user_id) is not int or user_id < 0:
        raise ParseError(MALFORMED_SYNTAX, "field 'user_id' must be a nonnegative integer")
    screen_name = obj["screen_name"]
    if not isinstance(screen_name, str) or not _SCREEN_NAME_RE.match(screen_name):
        raise ParseError(MALFORMED_SYNTAX, "field 'screen_name' must be 1-15 chars of [A-Za-z0-9_]")
    raw_ts = obj["created_at"]
    if not isinstance(raw_ts, str):
        raise ParseError(INVALID_TIMESTAMP, "created_at must be a string")
    created_at = _TS_MEMO.get(raw_ts)
    if created_at is None:
        created_at = parse_timestamp(raw_ts)

    text = obj["text"]
    if not isinstance(text, str) or not text:
        raise ParseError(MALFORMED_SYNTAX, "text must be a nonempty string")
    if len(text) > TEXT_CAP:
        text = text[:TEXT_CAP]
        if stats is not None:
            stats.truncated += 1

    rt_user_id = None
    rt_screen_name = None
    if "retweet_of_user_id" in obj:
        rt_user_id = _require_int(obj, "retweet_of_user_id")
        if "retweet_of_screen_name" not in obj:
            raise ParseError(MISSING_REQUIRED_FIELD, "retweet_of_screen_name")
        rt_screen_name = _require_handle(obj["retweet_of_screen_name"], "retweet_of_screen_name")

    entities = None
    if "entities" in obj:
        entities = _parse_entities(obj["entities"])

    return Tweet(tweet_id, created_at, user_id, screen_name, text,
                 rt_user_id, rt_screen_name, entities)


def tweet_to_obj(t: Tweet) -> dict:
    """Tweet -> wire-format object (inverse of parse_record)."""
    obj: dict = {
        "id": t.id,
        "created_at": format_timestamp(t.created_at),
        "user_id": t.user_id,
        "screen_name": t.screen_name,
        "text": t.text,
    }
    if t.retweet_of_user_id is not None:
        obj["retweet_of_user_id"] = t.retweet_of_user_id
        obj["retweet_of_screen_name"] = t.retweet_of_screen_name
    if t.entities is not None:
        ents = {}
        if t.entities.hashtags:
            ents["hashtags"] = list(t.entities.hashtags)
        if t.entities.mentions:
            ents["mentions"] = list(t.entities.mentions)
        if t.entities.urls:
            ents["urls"] = list(t.entities.urls)
        obj["entities"] = ents
    return obj


def tweet_from_obj(obj: dict) -> Tweet:
    """Wire-format object -> Tweet, trusted input (our own snapshots and
    log records). Use parse_record for anything external."""
    entities = None
    if "entities" in obj:
        ents = obj["entities"]
        entities = Entities(
            hashtags=tuple(ents.get("hashtags", ())),
            mentions=tuple(ents.get("mentions", ())),
            urls=tuple(ents.get("urls", ())),
        )
    return Tweet(
        id=obj["id"],
        created_at=parse_timestamp(obj["created_at"]),
        user_id=obj["user_id"],
        screen_name=obj["screen_name"],
        text=obj["text"],
        retweet_of_user_id=obj.get("retweet_of_user_id"),
        retweet_of_screen_name=obj.get("retweet_of_screen_name"),
        entities=entities,
    )


class ReorderBuffer:
    """Bounded event-time reordering: records are held until the newest
    seen timestamp has moved past them by the window; records arriving
    more than a window behind are dropped as late."""

    def __init__(self, window_s: int = REORDER_WINDOW_S, stats: IngestStats | None = None):
        self.window_s = window_s
        self.stats = stats
        self._heap: list[tuple[int, int, Tweet]] = []
        self._seq = 0
        self._max_seen = None

    def push(self, tweet: Tweet) -> list[Tweet]:
        """Accept one tweet, return any tweets now safe to emit (in
        timestamp order, arrival order for ties)."""
        if self._max_seen is not None and tweet.created_at < self._max_seen - self.window_s:
            if self.stats is not None:
                self.stats.late_dropped += 1
            return []
        heapq.heappush(self._heap, (tweet.created_at, self._seq, tweet))
        self._seq += 1
        if self._max_seen is None or tweet.created_at > self._max_seen:
            self._max_seen = tweet.created_at
        watermark = self._max_seen - self.window_s
        out = []
        while self._heap and self._heap[0][0] <= watermark:
            out.append(heapq.heappop(self._heap)[2])
        return out

    def flush(self) -> list[Tweet]:
        """Drain everything still pending, in order. Call at stream end."""
        out = [heapq.heappop(self._heap)[2] for _ in range(len(self._heap))]
        return out


def iter_parsed(lines: Iterable[str | bytes], stats: IngestStats) -> Iterator[Tweet]:
    """Parse a line stream, counting and skipping bad records. Blank lines
    are ignored silently (a trailing newline is not an error); FLUSH
    sentinels pass through."""
    for line in lines:
        if line is FLUSH:
            yield line
            continue
        if not line or line.isspace():
            continue
        stats.lines += 1
        try:
            tweet = parse_record(line, stats)
        except ParseError as exc:
            stats.errors[exc.reason] += 1
            continue
        stats.parsed += 1
        yield tweet


def replay(
    lines: Iterable[str | bytes],
    speed: float = 0.0,
    stats: IngestStats | None = None,
    window_s: int = REORDER_WINDOW_S,
    sleep=time.sleep,
) -> Iterator[Tweet]:
    """Replay a record stream in timestamp order.

    `speed` is a pacing factor on recorded inter-arrival gaps: 0 replays
    as fast as possible, 1 at the recorded pace, 2 at half pace.
    Deterministic for speed=0.
    """
    if speed < 0:
        raise ValueError("speed must be >= 0")
    if stats is None:
        stats = IngestStats()
    buffer = ReorderBuffer(window_s, stats)
    prev_ts = None
    for tweet in iter_parsed(lines, stats):
        if tweet is FLUSH:
            yield from buffer.flush()
            continue
        if speed > 0 and prev_ts is not None and tweet.created_at > prev_ts:
            sleep((tweet.created_at - prev_ts) * speed)
        prev_ts = tweet.created_at
        yield from buffer.push(tweet)
    yield from buffer.flush()


def dedup(tweets: Iterable[Tweet], seen: set[int], stats: IngestStats) -> Iterator[Tweet]:
    """First occurrence of a tweet id wins; later ones are counted and
    dropped. `seen` may be preloaded from a recovered event log."""
    for t in tweets:
        if t.id in seen:
            stats.duplicates += 1
            continue
        seen.add(t.id)
        yield t


def read_lines(path: str | Path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from fh


class SocketLineSource:
    """TCP listener feeding newline-delimited records into an iterator.

    Lines from all connections funnel into one queue; iteration ends when
    stop() is called and the queue drains. After `idle_flush_s` without
    traffic a FLUSH sentinel is emitted so the reorder buffer drains and
    live records become visible promptly.
    """

    _STOP = object()

    def __init__(self, port: int, host: str = "127.0.0.1", idle_flush_s: float = 1.0):
        self.queue: Queue = Queue()
        self.idle_flush_s = idle_flush_s
        source = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                for line in self.rfile:
                    source.queue.put(line)

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = Server((host, port), Handler)
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="ingest-socket", daemon=True
        )

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self.queue.put(self._STOP)

    def __iter__(self) -> Iterator[bytes]:
        from queue import Empty

        while True:
            try:
                item = self.queue.get(timeout=self.idle_flush_s)
            except Empty:
                yield FLUSH
                continue
            if item is self._STOP:
                return
            yield item
