"""Hand-picked keyword lists ("themes") routing tweets into meme tracking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .extraction import (
    Entities,
    extract_entities,
    normalize_hashtag,
    normalize_mention,
    tokenize,
)

DUPLICATE_NAME = "duplicate_name"
EMPTY_KEYWORDS = "empty_keywords"
MALFORMED = "malformed"


class ConfigError(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


@dataclass(frozen=True)
class Theme:
    """One named keyword list. Keywords are stored normalized (lowercase,
    sigils preserved) and pre-split by kind for matching."""

    name: str
    keywords: tuple[str, ...]
    description: str | None = None
    tag_words: frozenset[str] = field(default=frozenset(), repr=False)
    user_words: frozenset[str] = field(default=frozenset(), repr=False)
    plain_words: frozenset[str] = field(default=frozenset(), repr=False)

    @classmethod
    def build(cls, name: str, keywords: list[str], description: str | None = None) -> "Theme":
        if not name:
            raise ConfigError(MALFORMED, "theme name must be nonempty")
        if not keywords:
            raise ConfigError(EMPTY_KEYWORDS, name)
        normalized = []
        tags, users, words = set(), set(), set()
        for kw in keywords:
            if not isinstance(kw, str) or not kw.strip():
                raise ConfigError(MALFORMED, f"theme {name!r} has an empty keyword")
            kw = kw.strip().lower()
            normalized.append(kw)
            if kw.startswith("#"):
                if len(kw) == 1:
                    raise ConfigError(MALFORMED, f"theme {name!r}: bare '#' keyword")
                tags.add(kw[1:])
            elif kw.startswith("@"):
                if len(kw) == 1:
                    raise ConfigError(MALFORMED, f"theme {name!r}: bare '@' keyword")
                users.add(kw[1:])
            else:
                words.add(kw)
        return cls(
            name=name,
            keywords=tuple(normalized),
            description=description,
            tag_words=frozenset(tags),
            user_words=frozenset(users),
            plain_words=frozenset(words),
        )


class MatchContext:
    """Per-tweet precomputed sets so routing shares one extraction pass."""

    __slots__ = ("hashtags", "mentions", "author", "_text", "_tokens")

    def __init__(self, hashtags: set[str], mentions: set[str], author: str, text: str):
        self.hashtags = hashtags
        self.mentions = mentions
        self.author = author
        self._text = text
        self._tokens: set[str] | None = None

    @classmethod
    def for_tweet(cls, tweet, entities: Entities | None = None) -> "MatchContext":
        if entities is None:
            entities = extract_entities(tweet.text)
        supplied = tweet.entities
        # normalize_hashtag/normalize_mention are plain lowercasing
        hashtags = {h.lower() for h in entities.hashtags}
        mentions = {m.lower() for m in entities.mentions}
        if supplied is not None:
            hashtags.update(h.lower() for h in supplied.hashtags)
            mentions.update(m.lower() for m in supplied.mentions)
        return cls(hashtags, mentions, tweet.screen_name.lower(), tweet.text)

    @property
    def tokens(self) -> set[str]:
        # computed lazily: only themes with plain keywords need it
        if self._tokens is None:
            self._tokens = set(tokenize(self._text))
        return self._tokens

    def matches(self, theme: Theme) -> bool:
        if theme.tag_words and not theme.tag_words.isdisjoint(self.hashtags):
            return True
        if theme.user_words:
            if self.author in theme.user_words:
                return True
            if not theme.user_words.isdisjoint(self.mentions):
                return True
        if theme.plain_words:
            tokens = self._tokens
            if tokens is None:
                tokens = self.tokens
            if not theme.plain_words.isdisjoint(tokens):
                return True
        return False


def matches_theme(tweet, theme: Theme) -> bool:
    """True iff any theme keyword matches: '#tag' against normalized
    hashtags, '@user' against normalized mentions or the author handle,
    plain keywords as whole lowercase text tokens (urls excluded)."""
    return MatchContext.for_tweet(tweet).matches(theme)


def route(tweet, themes: list[Theme], ctx: MatchContext | None = None) -> list[str]:
    """Names of all matching themes in config order; empty means the tweet
    stays out of meme tracking."""
    if ctx is None:
        ctx = MatchContext.for_tweet(tweet)
    return [t.name for t in themes if ctx.matches(t)]


def load_themes(path: str | Path) -> list[Theme]:
    """Load the line-delimited theme config; duplicate names rejected."""
    themes: list[Theme] = []
    names: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(MALFORMED, f"{path}:{lineno}: {exc}") from exc
            if not isinstance(obj, dict) or "name" not in obj or "keywords" not in obj:
                raise ConfigError(MALFORMED, f"{path}:{lineno}: need name and keywords")
            if not isinstance(obj["keywords"], list):
                raise ConfigError(MALFORMED, f"{path}:{lineno}: keywords must be a list")
            theme = Theme.build(obj["name"], obj["keywords"], obj.get("description"))
            if theme.name in names:
                raise ConfigError(DUPLICATE_NAME, theme.name)
            names.add(theme.name)
            themes.append(theme)
    return themes
