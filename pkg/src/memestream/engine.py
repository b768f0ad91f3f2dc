"""The pipeline engine: dedup, annotation scan, theme routing, per-meme
graph updates, analytics counters, durable logging, and recovery.

One engine owns all meme-tracking state. Writes are serialized under a
single lock; API handlers read under the same lock so every request sees
a consistent snapshot. State rebuilt from the event log (plus the latest
snapshot) is digest-identical to the state of an uninterrupted run.
"""

from __future__ import annotations

import gc
import hashlib
import json
import logging
import re
import shutil
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from . import analytics, annotations, ingest, storage
from .extraction import (
    HASHTAG,
    MEME_KINDS,
    MENTION,
    PHRASE,
    URL,
    MemeKey,
    derive_phrase,
    extract_entities,
    normalize_meme_value,
    normalize_mention,
    normalize_url,
)
from .graph import DiffusionNetwork
from .ingest import IngestStats, Tweet
from .themes import MatchContext, Theme

logger = logging.getLogger(__name__)

DEFAULT_SNAPSHOT_EVERY = 10000


def handle_id(handle: str) -> int:
    """Deterministic synthetic id for a user known only by handle.

    Negative so it can never collide with real (nonnegative) record ids.
    """
    digest = hashlib.sha1(b"handle:" + handle.lower().encode("utf-8")).digest()
    return -(int.from_bytes(digest[:8], "big") >> 1) - 1


def parse_meme_key(raw: str) -> MemeKey:
    """'kind:value' -> MemeKey (value normalized; first colon splits)."""
    kind, sep, value = raw.partition(":")
    if not sep or not value:
        raise ValueError(f"meme key must be kind:value, got {raw!r}")
    if kind not in MEME_KINDS:
        raise ValueError(f"unknown meme kind: {kind!r}")
    normalized = normalize_meme_value(kind, value)
    if not normalized:
        raise ValueError(f"meme value empty after normalization: {raw!r}")
    return MemeKey(kind, normalized)


@dataclass
class UserAccumulator:
    user_id: int
    screen_name: str
    activity: int = 0
    sentiment_sum: float = 0.0
    sentiment_n: int = 0


@dataclass
class PipelineConfig:
    state_dir: str | Path | None = None
    themes: list[Theme] = field(default_factory=list)
    lexicon: dict[str, float] | None = None
    user_labels: dict[int, analytics.UserLabels] = field(default_factory=dict)
    definitions: dict[str, str] = field(default_factory=dict)
    bot_handle: str = annotations.DEFAULT_BOT_HANDLE
    recent_cap: int = 200
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY  # 0 disables periodic snapshots
    max_memes: int | None = None  # LRU spill cap; None = unbounded
    segment_size: int = storage.DEFAULT_SEGMENT_SIZE
    reorder_window_s: int = ingest.REORDER_WINDOW_S
    now_fn: object = time.time


class Pipeline:
    """Single-writer meme-tracking engine with locked concurrent readers."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.lock = threading.RLock()
        self.themes = list(config.themes)
        self.networks: OrderedDict[MemeKey, DiffusionNetwork] = OrderedDict()
        self.spilled: set[MemeKey] = set()
        # meme -> [n_tweets, n_users, last_seen], spill-proof summary row
        self.meme_summaries: dict[MemeKey, list] = {}
        self.cooccur: dict[MemeKey, dict[MemeKey, int]] = {}
        self.users: dict[int, UserAccumulator] = {}
        # normalized handle -> (user_id, display name), learned from the
        # accepted stream only so recovery re-derives it exactly
        self.registry: dict[str, tuple[int, str]] = {}
        self.theme_index: dict[str, set[MemeKey]] = {t.name: set() for t in self.themes}
        self.seen_ids: set[int] = set()
        self.accepted_ids: set[int] = set()
        self.accepted = 0
        self._snapshotted_at = 0
        self.unrouted = 0
        self.self_edges_dropped = 0
        self.annotations_ambiguous = 0
        self.ingest_stats = IngestStats()

        self.state_dir = Path(config.state_dir) if config.state_dir else None
        self.log: storage.EventLog | None = None
        self._bot_re = re.compile(re.escape("@" + config.bot_handle), re.IGNORECASE)
        if config.max_memes is not None and config.state_dir is None:
            raise ValueError("max_memes needs a state_dir to spill into")
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self.log = storage.EventLog(self.state_dir / "log", config.segment_size)
            self.annotation_store = annotations.AnnotationStore(self.state_dir / "annotations.ndjson")
            self._spill_dir = self.state_dir / "spill"
            if self._spill_dir.exists():
                shutil.rmtree(self._spill_dir)  # spill files are cache, state lives in the log
            self._recover()
        else:
            self.annotation_store = annotations.AnnotationStore(None)
            self._spill_dir = None

    # -- recovery --

    def _recover(self) -> None:
        assert self.log is not None
        if self.log.count == 0:
            return
        start = 0
        snap = storage.load_latest_snapshot(self.state_dir / "snapshots", self.log.count)
        if snap is not None:
            start, payload = snap
            self._restore_state(payload["state"])
            self.accepted_ids = set(payload["accepted_ids"])
            self.seen_ids = set(self.accepted_ids)
            logger.info("recovered snapshot at %d accepted tweets", start)
        replayed = 0
        for tweet, theme_names in self.log.replay_log(start):
            self.seen_ids.add(tweet.id)
            self.accepted_ids.add(tweet.id)
            self._apply_accepted(tweet, theme_names)
            replayed += 1
        self._snapshotted_at = self.accepted
        if replayed:
            logger.info("replayed %d event log records", replayed)

    # -- hot path --

    def ingest_lines(self, lines, speed: float = 0.0) -> IngestStats:
        """Parse, reorder, dedup, and process a record stream.

        Bulk replay retunes the cyclic GC for the duration: the long-lived
        graph state makes default generation-0 sweeps dominate the run.
        """
        stats = self.ingest_stats
        seen = self.seen_ids
        process = self.process_tweet
        old_threshold = gc.get_threshold()
        gc.set_threshold(50000, 25, 25)
        try:
            for tweet in ingest.replay(lines, speed, stats, self.config.reorder_window_s):
                if tweet.id in seen:
                    stats.duplicates += 1
                    continue
                seen.add(tweet.id)
                process(tweet)
        finally:
            gc.set_threshold(*old_threshold)
        return stats

    def process_tweet(self, tweet: Tweet) -> bool:
        """One deduped tweet through annotation scan and routing; returns
        True when the tweet was accepted into meme tracking."""
        with self.lock:
            if self._bot_re.search(tweet.text) is not None:
                self._scan_annotation(tweet)
            entities = extract_entities(tweet.text)
            ctx = MatchContext.for_tweet(tweet, entities)
            matched = [t.name for t in self.themes if ctx.matches(t)]
            if not matched:
                self.unrouted += 1
                return False
            if self.log is not None:
                self.log.append(tweet, matched)
            self.accepted_ids.add(tweet.id)
            self._apply_accepted(tweet, matched, entities, ctx)
            if (
                self.config.snapshot_every
                and self.state_dir is not None
                and self.accepted % self.config.snapshot_every == 0
            ):
                self.write_snapshot()
            return True

    def _scan_annotation(self, tweet: Tweet) -> None:
        verdict, label, target = annotations.classify_annotation_tweet(
            tweet.text, self.config.bot_handle
        )
        if verdict == annotations.AMBIGUOUS:
            self.annotations_ambiguous += 1
            return
        if verdict != annotations.MATCH:
            return
        target, resolved = self._resolve_target(target)
        self.annotation_store.record(
            annotator=str(tweet.user_id),
            target=target,
            label=label,
            source=annotations.SOURCE_TWEET,
            created_at=tweet.created_at,
            resolved=resolved,
        )

    def _resolve_target(self, target: annotations.Target) -> tuple[annotations.Target, bool]:
        """Pin a target to known state: meme must be tracked, user handles
        resolve through the registry. Unresolvable targets are kept but
        flagged."""
        if target.meme is not None:
            return target, self.has_meme(target.meme)
        if target.user_id is not None:
            return target, target.user_id in self.users
        entry = self.registry.get(target.user_handle)
        if entry is not None:
            return annotations.Target(user_id=entry[0], user_handle=target.user_handle), True
        return target, False

    def _learn_user(self, user_id: int, screen_name: str) -> None:
        handle = screen_name.lower()
        if handle and handle not in self.registry:
            self.registry[handle] = (user_id, screen_name)

    def _mention_users(self, tweet: Tweet, entities) -> list[tuple[int, str]]:
        """Per-occurrence mentioned users resolved to (id, display name);
        unknown handles get deterministic synthetic ids."""
        raw = list(entities.mentions)
        if tweet.entities is not None:
            raw.extend(tweet.entities.mentions)
        out = []
        for mention in raw:
            handle = normalize_mention(mention)
            if not handle:
                continue
            entry = self.registry.get(handle)
            if entry is not None:
                out.append(entry)
            else:
                out.append((handle_id(handle), mention))
        return out

    def _apply_accepted(
        self, tweet: Tweet, theme_names: list[str], entities=None, ctx: MatchContext | None = None
    ) -> None:
        if entities is None:
            entities = extract_entities(tweet.text)
        if ctx is None:
            ctx = MatchContext.for_tweet(tweet, entities)
        self._learn_user(tweet.user_id, tweet.screen_name)
        if tweet.retweet_of_user_id is not None:
            self._learn_user(tweet.retweet_of_user_id, tweet.retweet_of_screen_name or "")

        # same result as extraction.memes_from_parts, reusing the routing
        # context's already-normalized hashtag/mention sets
        memes = {MemeKey(HASHTAG, h) for h in ctx.hashtags}
        memes.update(MemeKey(MENTION, m) for m in ctx.mentions)
        raw_urls = entities.urls
        if tweet.entities is not None and tweet.entities.urls:
            raw_urls = raw_urls + tuple(tweet.entities.urls)
        for u in raw_urls:
            v = normalize_url(u)
            if v:
                memes.add(MemeKey(URL, v))
        phrase = derive_phrase(tweet.text, tweet.entities)
        if phrase is not None:
            memes.add(MemeKey(PHRASE, phrase))

        mention_users = self._mention_users(tweet, entities) if (
            entities.mentions or (tweet.entities is not None and tweet.entities.mentions)
        ) else []

        summaries = self.meme_summaries
        for key in memes:
            net = self._network_for_write(key)
            self.self_edges_dropped += net.apply_tweet(tweet, mention_users)
            row = summaries.get(key)
            if row is None:
                summaries[key] = [net.tweet_count, len(net.nodes), net.last_seen]
            else:
                row[0] = net.tweet_count
                row[1] = len(net.nodes)
                row[2] = net.last_seen

        if len(memes) > 1:
            cooccur = self.cooccur
            for a, b in combinations(sorted(memes), 2):
                ca = cooccur.get(a)
                if ca is None:
                    ca = cooccur[a] = {}
                ca[b] = ca.get(b, 0) + 1
                cb = cooccur.get(b)
                if cb is None:
                    cb = cooccur[b] = {}
                cb[a] = cb.get(a, 0) + 1

        acc = self.users.get(tweet.user_id)
        if acc is None:
            acc = UserAccumulator(tweet.user_id, tweet.screen_name)
            self.users[tweet.user_id] = acc
        acc.activity += 1
        if self.config.lexicon is not None:
            score = analytics.sentiment_score(tweet.text, self.config.lexicon)
            if score is not None:
                acc.sentiment_sum += score
                acc.sentiment_n += 1

        for name in theme_names:
            self.theme_index.setdefault(name, set()).update(memes)
        self.accepted += 1
        if self.config.max_memes is not None and len(self.networks) > self.config.max_memes:
            self._evict_lru()

    # -- meme network access --

    def _spill_path(self, key: MemeKey) -> Path:
        digest = hashlib.sha1(str(key).encode("utf-8")).hexdigest()
        return self._spill_dir / f"{digest}.json"

    def _evict_lru(self) -> None:
        while len(self.networks) > self.config.max_memes:
            key, net = self.networks.popitem(last=False)
            if self._spill_dir is None:
                self.networks[key] = net  # nowhere to spill without a state dir
                self.networks.move_to_end(key, last=False)
                return
            self._spill_dir.mkdir(parents=True, exist_ok=True)
            self._spill_path(key).write_text(
                json.dumps(net.to_obj(), ensure_ascii=False, separators=(",", ":")),
                encoding="utf-8",
            )
            self.spilled.add(key)

    def _network_for_write(self, key: MemeKey) -> DiffusionNetwork:
        net = self.networks.get(key)
        if net is not None:
            self.networks.move_to_end(key)
            return net
        if key in self.spilled:
            net = self._load_spilled(key)
            self.spilled.remove(key)
        else:
            net = DiffusionNetwork(key, self.config.recent_cap)
        self.networks[key] = net
        return net

    def _load_spilled(self, key: MemeKey) -> DiffusionNetwork:
        obj = json.loads(self._spill_path(key).read_text(encoding="utf-8"))
        return DiffusionNetwork.from_obj(obj)

    def has_meme(self, key: MemeKey) -> bool:
        return key in self.networks or key in self.spilled

    def get_network(self, key: MemeKey) -> DiffusionNetwork:
        """Read access; raises analytics.UnknownMeme for untracked keys.
        Spilled networks are loaded without disturbing the writer's LRU."""
        with self.lock:
            net = self.networks.get(key)
            if net is not None:
                return net
            if key in self.spilled:
                return self._load_spilled(key)
            raise analytics.UnknownMeme(str(key))

    # -- derived views --

    def meme_count(self, key: MemeKey) -> int:
        row = self.meme_summaries.get(key)
        return row[0] if row else 0

    def cooccurrence_top(self, key: MemeKey, k: int) -> list[analytics.CooccurrenceEntry]:
        with self.lock:
            if not self.has_meme(key):
                raise analytics.UnknownMeme(str(key))
            return analytics.cooccurrence_top(
                key, self.cooccur.get(key, {}), self.meme_count, k
            )

    def user_stats(self, user_id: int) -> analytics.UserStats:
        with self.lock:
            acc = self.users.get(user_id)
            if acc is None:
                raise analytics.UnknownUser(user_id)
            labels = self.config.user_labels.get(user_id, analytics.UserLabels())
            mean = acc.sentiment_sum / acc.sentiment_n if acc.sentiment_n else None
            return analytics.UserStats(
                user_id=acc.user_id,
                screen_name=acc.screen_name,
                activity=acc.activity,
                sentiment_mean=mean,
                labels=labels,
            )

    def export_derived(self, key: MemeKey, tweet_cap: int | None = None) -> dict:
        """Stats + minute time series + top co-occurrences + recent tweets
        (newest first, capped)."""
        cap = tweet_cap if tweet_cap is not None else self.config.recent_cap
        with self.lock:
            net = self.get_network(key)
            stats = analytics.meme_stats(net)
            series = analytics.time_series(net, "minute")
            cooc = analytics.cooccurrence_top(key, self.cooccur.get(key, {}), self.meme_count, 10)
            recents = list(net.recent)[-cap:][::-1]
            return {
                "stats": meme_stats_obj(stats),
                "timeseries": time_series_obj(series),
                "cooccurrence": [cooccurrence_obj(e) for e in cooc],
                "recent_tweets": [ingest.tweet_to_obj(t) for t in recents],
            }

    # -- durability --

    def write_snapshot(self) -> None:
        if self.state_dir is None:
            return
        payload = {"state": self._state_obj(), "accepted_ids": sorted(self.accepted_ids)}
        storage.save_snapshot(self.state_dir / "snapshots", payload, self.accepted)
        self._snapshotted_at = self.accepted

    def close(self) -> None:
        with self.lock:
            if self.log is not None:
                if self.accepted != self._snapshotted_at:
                    self.write_snapshot()
                self.log.close()
            self.annotation_store.close()

    # -- canonical state / digest --

    def _iter_networks_sorted(self):
        for key in sorted(self.meme_summaries):
            if key in self.networks:
                yield key, self.networks[key]
            else:
                yield key, self._load_spilled(key)

    def _state_obj(self) -> dict:
        memes = {str(key): net.to_obj() for key, net in self._iter_networks_sorted()}
        return {
            "accepted": self.accepted,
            "memes": memes,
            "cooccur": {
                str(a): {str(b): n for b, n in sorted(partners.items())}
                for a, partners in sorted(self.cooccur.items())
            },
            "users": {
                str(uid): [acc.screen_name, acc.activity, acc.sentiment_sum, acc.sentiment_n]
                for uid, acc in sorted(self.users.items())
            },
            "registry": {h: list(entry) for h, entry in sorted(self.registry.items())},
            "theme_index": {
                name: sorted(str(k) for k in keys) for name, keys in sorted(self.theme_index.items())
            },
        }

    def _restore_state(self, state: dict) -> None:
        self.accepted = state["accepted"]
        for key_str, obj in state["memes"].items():
            net = DiffusionNetwork.from_obj(obj)
            self.networks[net.meme] = net
            self.meme_summaries[net.meme] = [net.tweet_count, len(net.nodes), net.last_seen]
        self.cooccur = {
            parse_key_str(a): {parse_key_str(b): n for b, n in partners.items()}
            for a, partners in state["cooccur"].items()
        }
        self.users = {
            int(uid): UserAccumulator(int(uid), row[0], row[1], row[2], row[3])
            for uid, row in state["users"].items()
        }
        self.registry = {h: (entry[0], entry[1]) for h, entry in state["registry"].items()}
        self.theme_index = {
            name: {parse_key_str(k) for k in keys} for name, keys in state["theme_index"].items()
        }
        for t in self.themes:
            self.theme_index.setdefault(t.name, set())

    def state_digest(self) -> str:
        """sha256 over the canonical serialized meme-tracking state.

        Session counters (parse errors, duplicates, lateness) are volatile
        observability data and deliberately excluded: a crash-recovered
        run must produce the same digest as an uninterrupted one.
        """
        with self.lock:
            h = hashlib.sha256()
            for key, net in self._iter_networks_sorted():
                h.update(_canon([str(key), net.to_obj()]))
            state = self._state_obj()
            for part in ("accepted", "cooccur", "users", "registry", "theme_index"):
                h.update(_canon([part, state[part]]))
            return h.hexdigest()


def _canon(obj) -> bytes:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_key_str(raw: str) -> MemeKey:
    kind, _, value = raw.partition(":")
    return MemeKey(kind, value)


# -- plain-dict views shared by the API, exports, and the CLI --


def meme_stats_obj(stats: analytics.MemeStats) -> dict:
    return {
        "meme": {"kind": stats.meme.kind, "value": stats.meme.value},
        "n_tweets": stats.n_tweets,
        "n_users": stats.n_users,
        "n_retweet_edges": stats.n_retweet_edges,
        "n_mention_edges": stats.n_mention_edges,
        "mean_degree": stats.mean_degree,
        "lcc_size": stats.lcc_size,
        "first_seen": ingest.format_timestamp(stats.first_seen) if stats.first_seen is not None else None,
        "last_seen": ingest.format_timestamp(stats.last_seen) if stats.last_seen is not None else None,
    }


def time_series_obj(series: analytics.TimeSeries) -> dict:
    return {
        "interval": series.interval,
        "buckets": [
            {
                "bucket_start": ingest.format_timestamp(b.start),
                "tweet_count": b.tweet_count,
                "user_count": b.user_count,
            }
            for b in series.buckets
        ],
    }


def cooccurrence_obj(entry: analytics.CooccurrenceEntry) -> dict:
    return {
        "meme_a": {"kind": entry.meme_a.kind, "value": entry.meme_a.value},
        "meme_b": {"kind": entry.meme_b.kind, "value": entry.meme_b.value},
        "joint_count": entry.joint_count,
        "jaccard": entry.jaccard,
    }


def user_stats_obj(stats: analytics.UserStats) -> dict:
    obj = {
        "user_id": stats.user_id,
        "screen_name": stats.screen_name,
        "activity": stats.activity,
        "sentiment_mean": stats.sentiment_mean,
        "labels": {
            "partisanship": stats.labels.partisanship,
            "language": stats.labels.language,
        },
    }
    return obj
