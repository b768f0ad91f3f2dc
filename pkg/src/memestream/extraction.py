"""Entity extraction and meme identity.

A meme is identified by a (kind, value) pair where kind is one of
hashtag / mention / url / phrase and value is the normalized form.
Everything in this module is a pure function of its inputs.
"""

from __future__ import annotations

import re
from typing import NamedTuple
from urllib.parse import urlsplit, urlunsplit

HASHTAG = "hashtag"
MENTION = "mention"
URL = "url"
PHRASE = "phrase"

MEME_KINDS = (HASHTAG, MENTION, URL, PHRASE)

# Residues shorter than this never become phrase memes.
MIN_PHRASE_LEN = 3

_URL_RE = re.compile(r"https?://\S+", re.IGNORECASE)
_HASHTAG_RE = re.compile(r"#(\w+)")
_MENTION_RE = re.compile(r"@([A-Za-z0-9_]{1,15})")
_TOKEN_RE = re.compile(r"\w+")
_PUNCT_RE = re.compile(r"[^\w\s]+")
_WS_RE = re.compile(r"\s+")


class MemeKey(NamedTuple):
    """Canonical meme identity: kind plus normalized value."""

    kind: str
    value: str

    def __str__(self) -> str:
        return f"{self.kind}:{self.value}"


class Entities(NamedTuple):
    """Raw (pre-normalization) entity lists, duplicates preserved in order."""

    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()


def extract_entities(text: str) -> Entities:
    """Pull raw hashtags, mentions, and urls out of tweet text.

    URL spans are matched first and masked out so url-internal '#' and '@'
    runs do not produce junk hashtag/mention entities.
    """
    if _URL_RE.search(text) is not None:
        urls = _URL_RE.findall(text)
        masked = _URL_RE.sub(" ", text)
    else:
        urls = []
        masked = text
    return Entities(
        hashtags=tuple(_HASHTAG_RE.findall(masked)),
        mentions=tuple(_MENTION_RE.findall(masked)),
        urls=tuple(urls),
    )


def normalize_hashtag(raw: str) -> str:
    return raw.lower()


def normalize_mention(raw: str) -> str:
    return raw.lower()


def normalize_url(raw: str) -> str:
    """Canonicalize a url: lowercase scheme/host, strip default port,
    strip fragment and bare-root trailing slash, keep the query.

    Unparseable input comes back verbatim so identical raw strings still
    cluster together.
    """
    try:
        parts = urlsplit(raw)
        scheme = parts.scheme.lower()
        if scheme not in ("http", "https"):
            return raw
        host = parts.hostname
        if not host:
            return raw
        if ":" in host:  # bare IPv6 host needs its brackets back
            host = f"[{host}]"
        userinfo = ""
        if "@" in parts.netloc:
            userinfo = parts.netloc.rsplit("@", 1)[0] + "@"
        port = parts.port
    except ValueError:
        return raw
    default_port = 80 if scheme == "http" else 443
    netloc = userinfo + host
    if port is not None and port != default_port:
        netloc = f"{netloc}:{port}"
    path = "" if parts.path == "/" else parts.path
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def normalize_phrase(raw: str) -> str:
    return _WS_RE.sub(" ", raw.lower()).strip()


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens of the text with url spans masked out.

    Shared by theme keyword matching and lexicon sentiment scoring.
    """
    if _URL_RE.search(text) is not None:
        text = _URL_RE.sub(" ", text)
    return _TOKEN_RE.findall(text.lower())


def derive_phrase(text: str, entities: Entities | None = None) -> str | None:
    """Residual-text phrase: strip a leading RT token, entity substrings
    (sigils included) and punctuation, lowercase, collapse whitespace.

    Returns None when the residue is empty or shorter than MIN_PHRASE_LEN
    code points. `entities` covers pre-supplied entity strings that may
    appear in the text; text-derived entities are stripped regardless.
    """
    s = text.lstrip()
    if s[:2].upper() == "RT" and (len(s) == 2 or s[2].isspace()):
        s = s[2:]
    if _URL_RE.search(s) is not None:
        s = _URL_RE.sub(" ", s)
    if entities is not None:
        for u in entities.urls:
            if u:
                s = s.replace(u, " ")
        for h in entities.hashtags:
            if h:
                s = re.sub("#" + re.escape(h), " ", s, flags=re.IGNORECASE)
        for m in entities.mentions:
            if m:
                s = re.sub("@" + re.escape(m), " ", s, flags=re.IGNORECASE)
    if "#" in s:
        s = _HASHTAG_RE.sub(" ", s)
    if "@" in s:
        s = _MENTION_RE.sub(" ", s)
    # one token pass covers punctuation removal and whitespace collapse
    s = " ".join(_TOKEN_RE.findall(s.lower()))
    if len(s) < MIN_PHRASE_LEN:
        return None
    return s


def merge_entities(text_entities: Entities, supplied: Entities | None) -> Entities:
    """Union pre-supplied entities with text-derived ones (order preserved,
    text-derived first)."""
    if supplied is None:
        return text_entities
    return Entities(
        hashtags=text_entities.hashtags + tuple(supplied.hashtags),
        mentions=text_entities.mentions + tuple(supplied.mentions),
        urls=text_entities.urls + tuple(supplied.urls),
    )


def memes_from_parts(text: str, entities: Entities, supplied: Entities | None) -> set[MemeKey]:
    """Meme keys from already-extracted entities; `entities` must be the
    extract_entities(text) result. Split out of extract_memes so the
    pipeline can reuse one extraction pass for routing and meme keys."""
    merged = merge_entities(entities, supplied)
    keys: set[MemeKey] = set()
    for h in merged.hashtags:
        v = normalize_hashtag(h)
        if v:
            keys.add(MemeKey(HASHTAG, v))
    for m in merged.mentions:
        v = normalize_mention(m)
        if v:
            keys.add(MemeKey(MENTION, v))
    for u in merged.urls:
        v = normalize_url(u)
        if v:
            keys.add(MemeKey(URL, v))
    phrase = derive_phrase(text, supplied)
    if phrase is not None:
        keys.add(MemeKey(PHRASE, phrase))
    return keys


def extract_memes(tweet) -> set[MemeKey]:
    """All meme keys a tweet belongs to: normalized hashtag/mention/url keys
    plus the residual phrase key when present."""
    return memes_from_parts(tweet.text, extract_entities(tweet.text), tweet.entities)


def normalize_meme_value(kind: str, value: str) -> str:
    """Normalize a raw meme value per its kind (annotation targets, CLI args,
    API paths all funnel through here)."""
    if kind == HASHTAG:
        return normalize_hashtag(value.lstrip("#"))
    if kind == MENTION:
        return normalize_mention(value.lstrip("@"))
    if kind == URL:
        return normalize_url(value)
    if kind == PHRASE:
        return normalize_phrase(value)
    raise ValueError(f"unknown meme kind: {kind!r}")
