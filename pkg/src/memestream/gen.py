"""Deterministic synthetic corpus generator.

Emits a wire-format corpus plus a ground-truth ledger computed from the
construction itself (which tokens were planted where), so tests can check
pipeline output against an account that never ran the pipeline: per-meme
tweet counts, per-minute activity, and which tweets were salted with
theme keywords.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import format_timestamp
from .themes import Theme

_WORD_KW_RE = re.compile(r"\w+\Z")
_HANDLE_KW_RE = re.compile(r"[A-Za-z0-9_]{1,15}\Z")

START_TS = 1283299200  # 2010-09-01T00:00:00Z

FILLER_VOCAB = (
    "about", "across", "always", "answer", "around", "because", "better",
    "between", "bright", "carry", "change", "clear", "close", "corner",
    "early", "enough", "evening", "every", "follow", "forward", "garden",
    "gather", "ground", "happen", "heavy", "little", "listen", "matter",
    "moment", "morning", "nothing", "number", "often", "people", "place",
    "quiet", "rather", "remember", "river", "second", "silver", "simple",
    "street", "strong", "sudden", "together", "window", "winter",
)

URL_POOL_SIZE = 40
DEFAULT_TAG_COUNT = 150
ZIPF_EXPONENT = 1.2


@dataclass
class GenParams:
    tweets: int
    users: int
    seed: int
    retweet_prob: float = 0.3
    mention_rate: float = 0.5
    url_prob: float = 0.1
    salt_frac: float = 0.2
    tag_count: int = DEFAULT_TAG_COUNT


@dataclass
class _PlannedTweet:
    """Construction-level account of one tweet, kept for the ledger and
    for retweet targets."""

    tweet_id: int
    ts: int
    author_id: int
    author_handle: str
    text: str
    tags: frozenset[str]
    mentions: frozenset[str]
    urls: frozenset[str]
    phrase: str | None
    tokens: frozenset[str]
    is_retweet: bool
    memes: frozenset[str] = field(default=frozenset())
    matched_themes: tuple[str, ...] = ()


def _theme_matches(planned: _PlannedTweet, theme: Theme) -> bool:
    # construction-level mirror of keyword routing: membership checks over
    # the planted token sets, never a run of the router on raw text
    if theme.tag_words & planned.tags:
        return True
    if theme.user_words & planned.mentions or planned.author_handle in theme.user_words:
        return True
    if theme.plain_words & planned.tokens:
        return True
    return False


def generate(params: GenParams, themes: list[Theme], out_path: str | Path) -> dict:
    """Write the corpus to out_path and the ledger next to it
    (<out>.ledger.json); returns the ledger."""
    if params.tweets < 1 or params.users < 1:
        raise ValueError("tweets and users must be >= 1")
    _check_salting_contract(themes)
    rng = random.Random(params.seed)
    tag_vocab = [f"tag{i:03d}" for i in range(params.tag_count)]
    tag_weights = [1.0 / (r + 1) ** ZIPF_EXPONENT for r in range(params.tag_count)]
    cum = []
    total = 0.0
    for w in tag_weights:
        total += w
        cum.append(total)
    url_pool = [f"http://x.co/{i}" for i in range(URL_POOL_SIZE)]

    def handle(uid: int) -> str:
        return f"user{uid}"

    ledger_meme_counts: dict[str, int] = {}
    routed_meme_counts: dict[str, int] = {}
    routed_meme_minutes: dict[str, dict[str, int]] = {}
    theme_routed = {t.name: 0 for t in themes}
    totals = {"tweets": params.tweets, "routed": 0, "retweets": 0, "salted": 0}

    recent_originals: list[_PlannedTweet] = []
    ts = START_TS
    lines = []

    for i in range(params.tweets):
        tweet_id = i + 1
        ts += rng.randrange(0, 4)
        author_id = rng.randrange(params.users) + 1
        author_handle = handle(author_id)

        retweet_of: _PlannedTweet | None = None
        if recent_originals and rng.random() < params.retweet_prob:
            retweet_of = recent_originals[rng.randrange(len(recent_originals))]

        if retweet_of is not None:
            origin_handle = retweet_of.author_handle
            text = f"RT @{origin_handle} {retweet_of.text}"
            planned = _PlannedTweet(
                tweet_id=tweet_id,
                ts=ts,
                author_id=author_id,
                author_handle=author_handle,
                text=text,
                tags=retweet_of.tags,
                mentions=retweet_of.mentions | {origin_handle},
                urls=retweet_of.urls,
                phrase=retweet_of.phrase,
                tokens=retweet_of.tokens | {"rt", origin_handle},
                is_retweet=True,
            )
            record = {
                "id": tweet_id,
                "created_at": format_timestamp(ts),
                "user_id": author_id,
                "screen_name": author_handle,
                "text": text,
                "retweet_of_user_id": retweet_of.author_id,
                "retweet_of_screen_name": origin_handle,
            }
            totals["retweets"] += 1
        else:
            words = [FILLER_VOCAB[rng.randrange(len(FILLER_VOCAB))] for _ in range(rng.randrange(2, 5))]
            n_tags = 1 + (rng.random() < 0.35) + (rng.random() < 0.15)
            tags = [tag_vocab[_pick(cum, rng.random() * total)] for _ in range(n_tags)]
            mentions = []
            if rng.random() < params.mention_rate:
                mentions.append(handle(rng.randrange(params.users) + 1))
            urls = []
            if rng.random() < params.url_prob:
                urls.append(url_pool[rng.randrange(len(url_pool))])

            salted = False
            if themes and rng.random() < params.salt_frac:
                theme = themes[rng.randrange(len(themes))]
                kw = theme.keywords[rng.randrange(len(theme.keywords))]
                if kw.startswith("#"):
                    tags.append(kw[1:])
                elif kw.startswith("@"):
                    mentions.append(kw[1:])
                else:
                    words.append(kw)
                salted = True
                totals["salted"] += 1

            parts = list(words)
            parts.extend("#" + t for t in tags)
            parts.extend("@" + m for m in mentions)
            parts.extend(urls)
            text = " ".join(parts)
            phrase = " ".join(words)
            planned = _PlannedTweet(
                tweet_id=tweet_id,
                ts=ts,
                author_id=author_id,
                author_handle=author_handle,
                text=text,
                tags=frozenset(tags),
                mentions=frozenset(mentions),
                urls=frozenset(urls),
                phrase=phrase if len(phrase) >= 3 else None,
                tokens=frozenset(words) | frozenset(tags) | frozenset(mentions),
                is_retweet=False,
            )
            record = {
                "id": tweet_id,
                "created_at": format_timestamp(ts),
                "user_id": author_id,
                "screen_name": author_handle,
                "text": text,
            }
            recent_originals.append(planned)
            if len(recent_originals) > 500:
                recent_originals.pop(0)

        memes = set()
        memes.update(f"hashtag:{t}" for t in planned.tags)
        memes.update(f"mention:{m}" for m in planned.mentions)
        memes.update(f"url:{u}" for u in planned.urls)
        if planned.phrase is not None:
            memes.add(f"phrase:{planned.phrase}")
        planned.memes = frozenset(memes)
        planned.matched_themes = tuple(t.name for t in themes if _theme_matches(planned, t))

        for key in memes:
            ledger_meme_counts[key] = ledger_meme_counts.get(key, 0) + 1
        if planned.matched_themes:
            totals["routed"] += 1
            for name in planned.matched_themes:
                theme_routed[name] += 1
            minute = format_timestamp(ts - ts % 60)
            for key in memes:
                routed_meme_counts[key] = routed_meme_counts.get(key, 0) + 1
                routed_meme_minutes.setdefault(key, {})
                routed_meme_minutes[key][minute] = routed_meme_minutes[key].get(minute, 0) + 1

        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))

    out_path = Path(out_path)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    ledger = {
        "params": {
            "tweets": params.tweets,
            "users": params.users,
            "seed": params.seed,
            "retweet_prob": params.retweet_prob,
            "mention_rate": params.mention_rate,
            "url_prob": params.url_prob,
            "salt_frac": params.salt_frac,
            "tag_count": params.tag_count,
        },
        "totals": totals,
        "theme_routed": theme_routed,
        "meme_counts": ledger_meme_counts,
        "routed_meme_counts": routed_meme_counts,
        "routed_meme_minutes": routed_meme_minutes,
    }
    ledger_path = out_path.with_name(out_path.name + ".ledger.json")
    ledger_path.write_text(
        json.dumps(ledger, ensure_ascii=False, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    return ledger


def _pick(cum: list[float], x: float) -> int:
    # binary search over the cumulative weights
    lo, hi = 0, len(cum) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _check_salting_contract(themes: list[Theme]) -> None:
    """Generated text must extract back to exactly the planted tokens, so
    salted keywords are restricted to single clean tokens."""
    for theme in themes:
        for kw in theme.keywords:
            if kw.startswith("#") or kw.startswith("@"):
                pattern = _WORD_KW_RE if kw.startswith("#") else _HANDLE_KW_RE
                if not pattern.match(kw[1:]):
                    raise ValueError(
                        f"theme {theme.name!r}: keyword {kw!r} is not a single clean token"
                    )
            elif not _WORD_KW_RE.match(kw):
                raise ValueError(
                    f"theme {theme.name!r}: keyword {kw!r} is not a single clean token"
                )
