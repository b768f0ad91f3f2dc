"""Crowdsourced truthy/spam/legitimate flags on memes and users.

Two entry points: the REST API and a machine-parseable tagging-tweet
syntax. The grammar for tagging tweets is documented bit-exactly in the
README so external tools can emit it:

    a tweet matches iff it mentions the bot handle, contains exactly one
    label token (#truthy | #spam | #legitimate) and exactly one target
    token (meme:<kind>:<value> or user:@<name>); phrase-meme values
    encode spaces as '_'. Anything else is no match; two labels or two
    targets make the tweet ambiguous and it is dropped with a counter.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from .extraction import MEME_KINDS, MemeKey, PHRASE, normalize_meme_value
from .ingest import _SCREEN_NAME_RE, format_timestamp, parse_timestamp

LABELS = ("truthy", "spam", "legitimate")

DEFAULT_BOT_HANDLE = "truthybot"

SOURCE_API = "api"
SOURCE_TWEET = "tweet_syntax"

# 24h dedup window for repeated identical flags
REPEAT_WINDOW_S = 24 * 3600

MATCH = "match"
AMBIGUOUS = "ambiguous"
NO_MATCH = "no_match"


class InvalidLabel(ValueError):
    pass


class MalformedTarget(ValueError):
    pass


@dataclass(frozen=True)
class Target:
    """Either a meme key or a user; users known only by handle carry the
    handle until someone resolves it to an id."""

    meme: MemeKey | None = None
    user_id: int | None = None
    user_handle: str | None = None

    def key(self) -> tuple:
        if self.meme is not None:
            return ("meme", self.meme.kind, self.meme.value)
        if self.user_id is not None:
            return ("user", self.user_id)
        return ("user_handle", self.user_handle)

    def to_obj(self) -> dict:
        if self.meme is not None:
            return {"type": "meme", "kind": self.meme.kind, "value": self.meme.value}
        obj: dict = {"type": "user"}
        if self.user_id is not None:
            obj["user_id"] = self.user_id
        if self.user_handle is not None:
            obj["handle"] = self.user_handle
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "Target":
        if obj["type"] == "meme":
            return cls(meme=MemeKey(obj["kind"], obj["value"]))
        return cls(user_id=obj.get("user_id"), user_handle=obj.get("handle"))


@dataclass
class AnnotationRecord:
    id: int
    annotator: str
    target: Target
    label: str
    source: str
    created_at: int
    resolved: bool = True
    repeat: int = 1


def parse_target(token: str) -> Target | None:
    """One grammar for every surface: meme:<kind>:<value>, user:@<name>,
    or user:<id>. Returns None when the token is not a well-formed target."""
    if token.startswith("meme:"):
        rest = token[5:]
        kind, sep, value = rest.partition(":")
        if not sep or kind not in MEME_KINDS or not value:
            return None
        if kind == PHRASE:
            value = value.replace("_", " ")
        value = normalize_meme_value(kind, value)
        if not value:
            return None
        return Target(meme=MemeKey(kind, value))
    if token.startswith("user:@"):
        handle = token[6:]
        if not _SCREEN_NAME_RE.match(handle):
            return None
        return Target(user_handle=handle.lower())
    if token.startswith("user:"):
        raw = token[5:]
        if not raw.isdigit():
            return None
        return Target(user_id=int(raw))
    return None


def format_target(target: Target) -> str:
    """Inverse of parse_target (phrase spaces back to '_'). Resolved user
    targets render as their id, the canonical stored identity."""
    if target.meme is not None:
        value = target.meme.value
        if target.meme.kind == PHRASE:
            value = value.replace(" ", "_")
        return f"meme:{target.meme.kind}:{value}"
    if target.user_id is not None:
        return f"user:{target.user_id}"
    return f"user:@{target.user_handle}"


def classify_annotation_tweet(text: str, bot_handle: str) -> tuple[str, str | None, Target | None]:
    """Grammar verdict for a tweet: (MATCH, label, target), (AMBIGUOUS,
    None, None) for two labels or two targets, else (NO_MATCH, None, None)."""
    tokens = text.split()
    bot_token = "@" + bot_handle.lower()
    mentions_bot = any(tok.lower() == bot_token for tok in tokens)
    if not mentions_bot:
        return NO_MATCH, None, None
    labels = [tok[1:].lower() for tok in tokens if tok.lower() in ("#truthy", "#spam", "#legitimate")]
    targets = [t for t in (parse_target(tok) for tok in tokens) if t is not None]
    if len(labels) > 1 or len(targets) > 1:
        return AMBIGUOUS, None, None
    if len(labels) != 1 or len(targets) != 1:
        return NO_MATCH, None, None
    return MATCH, labels[0], targets[0]


def parse_annotation_tweet(
    text: str,
    bot_handle: str = DEFAULT_BOT_HANDLE,
    annotator: str = "",
    created_at: int = 0,
) -> AnnotationRecord | None:
    """Tagging-tweet text -> record (id unassigned) or None."""
    verdict, label, target = classify_annotation_tweet(text, bot_handle)
    if verdict != MATCH:
        return None
    return AnnotationRecord(
        id=-1,
        annotator=annotator,
        target=target,
        label=label,
        source=SOURCE_TWEET,
        created_at=created_at,
    )


def serialize_annotation_tweet(record: AnnotationRecord, bot_handle: str = DEFAULT_BOT_HANDLE) -> str:
    """Round-trip form: the parser accepts this string and recovers the
    same label and target."""
    return f"@{bot_handle} #{record.label} {format_target(record.target)}"


class AnnotationStore:
    """Append-only annotation log with linearizable writes.

    On-disk lines are either full records or repeat increments; history is
    never rewritten. A duplicate (annotator, target, label) within 24h of
    the existing record collapses into it via a repeat increment; an exact
    duplicate (same created_at too) is an at-least-once redelivery and is
    skipped entirely.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: dict[int, AnnotationRecord] = {}
        self._dedup: dict[tuple, int] = {}  # (annotator, target key, label) -> record id
        self._next_id = 1
        self._lock = threading.Lock()
        self._fh = None
        if self.path is not None and self.path.exists():
            self._load()
        if self.path is not None:
            self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj["op"] == "record":
                    rec = AnnotationRecord(
                        id=obj["id"],
                        annotator=obj["annotator"],
                        target=Target.from_obj(obj["target"]),
                        label=obj["label"],
                        source=obj["source"],
                        created_at=parse_timestamp(obj["created_at"]),
                        resolved=obj["resolved"],
                    )
                    self.records[rec.id] = rec
                    self._dedup[(rec.annotator, rec.target.key(), rec.label)] = rec.id
                    self._next_id = max(self._next_id, rec.id + 1)
                elif obj["op"] == "repeat":
                    self.records[obj["id"]].repeat += 1

    def _append_line(self, obj: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
            self._fh.flush()

    def record(
        self,
        annotator: str,
        target: Target,
        label: str,
        source: str,
        created_at: int,
        resolved: bool = True,
    ) -> AnnotationRecord:
        if label not in LABELS:
            raise InvalidLabel(label)
        if target.meme is None and target.user_id is None and target.user_handle is None:
            raise MalformedTarget("empty target")
        key = (annotator, target.key(), label)
        with self._lock:
            existing_id = self._dedup.get(key)
            if existing_id is not None:
                existing = self.records[existing_id]
                if source == SOURCE_TWEET and existing.created_at == created_at:
                    # tweet timestamps identify the event: an equal one is a
                    # redelivered tweet (at-least-once replay), not a new flag
                    return existing
                if 0 <= created_at - existing.created_at <= REPEAT_WINDOW_S:
                    existing.repeat += 1
                    self._append_line({"op": "repeat", "id": existing.id})
                    return existing
            rec = AnnotationRecord(
                id=self._next_id,
                annotator=annotator,
                target=target,
                label=label,
                source=source,
                created_at=created_at,
                resolved=resolved,
            )
            self._next_id += 1
            self.records[rec.id] = rec
            self._dedup[key] = rec.id
            self._append_line(
                {
                    "op": "record",
                    "id": rec.id,
                    "annotator": rec.annotator,
                    "target": rec.target.to_obj(),
                    "label": rec.label,
                    "source": rec.source,
                    "created_at": format_timestamp(rec.created_at),
                    "resolved": rec.resolved,
                }
            )
            return rec

    def summary(self, target: Target) -> dict[str, int]:
        """Per-label totals for a target, repeat counters expanded,
        zero-filled over the closed label set."""
        key = target.key()
        out = {label: 0 for label in LABELS}
        with self._lock:
            for rec in self.records.values():
                if rec.target.key() == key:
                    out[rec.label] += rec.repeat
        return out

    def __len__(self) -> int:
        return len(self.records)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
