"""Dashboard statistics over meme networks: counts, mean degree, largest
connected component, activity time series, lexicon sentiment, user stats,
and meme-meme co-occurrence.

All graph statistics treat the collapsed undirected simple graph (edge
directions and types between the same user pair merged)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .extraction import MemeKey, tokenize
from .graph import DiffusionNetwork, MENTION_EDGE, RETWEET

INTERVALS = {"minute": 60, "hour": 3600, "day": 86400}


class UnknownMeme(KeyError):
    pass


class UnknownUser(KeyError):
    pass


@dataclass(frozen=True)
class MemeStats:
    meme: MemeKey
    n_tweets: int
    n_users: int
    n_retweet_edges: int
    n_mention_edges: int
    mean_degree: float
    lcc_size: int
    first_seen: int | None
    last_seen: int | None


@dataclass(frozen=True)
class TimeBucket:
    start: int
    tweet_count: int
    user_count: int


@dataclass(frozen=True)
class TimeSeries:
    interval: str
    buckets: tuple[TimeBucket, ...]


@dataclass(frozen=True)
class UserLabels:
    partisanship: float | None = None
    language: str | None = None


@dataclass(frozen=True)
class UserStats:
    user_id: int
    screen_name: str
    activity: int
    sentiment_mean: float | None
    labels: UserLabels


@dataclass(frozen=True)
class CooccurrenceEntry:
    meme_a: MemeKey
    meme_b: MemeKey
    joint_count: int
    jaccard: float


def mean_degree(network: DiffusionNetwork) -> float:
    """2E/N on the collapsed undirected simple graph; 0 for an empty one."""
    n = len(network.nodes)
    if n == 0:
        return 0.0
    return 2.0 * len(network.collapsed_pairs()) / n


def largest_connected_component(network: DiffusionNetwork) -> int:
    """Largest component size, maintained online by the union-find the
    graph writer updates; 0 for an empty graph, 1 for a lone node."""
    return network.dsu.max_size


def meme_stats(network: DiffusionNetwork) -> MemeStats:
    n_retweet = sum(1 for (_, _, kind) in network.edges if kind == RETWEET)
    n_mention = sum(1 for (_, _, kind) in network.edges if kind == MENTION_EDGE)
    return MemeStats(
        meme=network.meme,
        n_tweets=network.tweet_count,
        n_users=len(network.nodes),
        n_retweet_edges=n_retweet,
        n_mention_edges=n_mention,
        mean_degree=mean_degree(network),
        lcc_size=largest_connected_component(network),
        first_seen=network.first_seen,
        last_seen=network.last_seen,
    )


def time_series(network: DiffusionNetwork, interval: str) -> TimeSeries:
    """Bucketed activity covering [first_seen, last_seen], empty buckets
    included; user_count is distinct authors per bucket."""
    if interval not in INTERVALS:
        raise ValueError(f"unknown interval: {interval!r}")
    width = INTERVALS[interval]
    if network.first_seen is None:
        return TimeSeries(interval, ())
    agg: dict[int, list] = {}
    for minute, (count, users) in network.minute_buckets.items():
        start = minute - minute % width
        slot = agg.get(start)
        if slot is None:
            agg[start] = [count, set(users)]
        else:
            slot[0] += count
            slot[1].update(users)
    lo = network.first_seen - network.first_seen % width
    hi = network.last_seen - network.last_seen % width
    buckets = []
    for start in range(lo, hi + width, width):
        if start in agg:
            count, users = agg[start]
            buckets.append(TimeBucket(start, count, len(users)))
        else:
            buckets.append(TimeBucket(start, 0, 0))
    return TimeSeries(interval, tuple(buckets))


def load_lexicon(path: str | Path) -> dict[str, float]:
    """Sentiment lexicon: lines of word<TAB>valence with valence in [-1, 1]."""
    lexicon: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                word, raw = line.split("\t")
                valence = float(raw)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: expected word<TAB>valence") from exc
            if not -1.0 <= valence <= 1.0:
                raise ValueError(f"{path}:{lineno}: valence {valence} outside [-1, 1]")
            lexicon[word.lower()] = valence
    return lexicon


def sentiment_score(text: str, lexicon: dict[str, float]) -> float | None:
    """Mean valence over lexicon-matched lowercase tokens; None when no
    token matches."""
    total = 0.0
    n = 0
    for token in tokenize(text):
        v = lexicon.get(token)
        if v is not None:
            total += v
            n += 1
    if n == 0:
        return None
    return total / n


def load_user_labels(path: str | Path) -> dict[int, UserLabels]:
    """Externally supplied per-user labels, bounds enforced on load."""
    labels: dict[int, UserLabels] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if not isinstance(obj, dict) or "user_id" not in obj:
                raise ValueError(f"{path}:{lineno}: need user_id")
            partisanship = obj.get("partisanship")
            if partisanship is not None:
                partisanship = float(partisanship)
                if not -1.0 <= partisanship <= 1.0:
                    raise ValueError(f"{path}:{lineno}: partisanship outside [-1, 1]")
            language = obj.get("language")
            if language is not None:
                if not isinstance(language, str) or len(language) != 2 or not language.isalpha():
                    raise ValueError(f"{path}:{lineno}: language must be an ISO 639-1 code")
                language = language.lower()
            labels[int(obj["user_id"])] = UserLabels(partisanship, language)
    return labels


def cooccurrence_top(
    meme: MemeKey,
    partners: dict[MemeKey, int],
    counts,
    k: int,
) -> list[CooccurrenceEntry]:
    """Top-k co-occurrence partners of `meme` by joint count, ties broken
    by jaccard then lexicographic partner key. `counts(key)` returns a
    meme's tweet count (the jaccard marginals)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    count_a = counts(meme)
    entries = []
    for partner, joint in partners.items():
        count_b = counts(partner)
        denom = count_a + count_b - joint
        jaccard = joint / denom if denom > 0 else 0.0
        entries.append(CooccurrenceEntry(meme, partner, joint, jaccard))
    entries.sort(key=lambda e: (-e.joint_count, -e.jaccard, e.meme_b))
    return entries[:k]
