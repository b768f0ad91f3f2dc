"""Per-meme diffusion networks.

Nodes are users; edges are directed retweet (origin -> retweeter) and
mention (author -> mentioned) events with weights and seen-timestamps.
Each network also carries its per-meme analytics state: an online
union-find for the largest connected component, per-minute activity
buckets, and a capped ring of recent tweets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .extraction import MemeKey
from .ingest import Tweet, tweet_from_obj, tweet_to_obj
from .unionfind import UnionFind

RETWEET = "retweet"
MENTION_EDGE = "mention"

EDGE_TYPES = (RETWEET, MENTION_EDGE)

DEFAULT_RECENT_CAP = 200


@dataclass(slots=True)
class Node:
    user_id: int
    screen_name: str
    tweet_count: int = 0
    retweeted_count: int = 0


@dataclass(slots=True)
class Edge:
    weight: int
    first_seen: int
    last_seen: int


class DiffusionNetwork:
    """Mutable per-meme user graph; exactly one writer at a time."""

    def __init__(self, meme: MemeKey, recent_cap: int = DEFAULT_RECENT_CAP):
        self.meme = meme
        self.nodes: dict[int, Node] = {}
        self.edges: dict[tuple[int, int, str], Edge] = {}
        self.tweet_count = 0
        self.first_seen: int | None = None
        self.last_seen: int | None = None
        self.dsu = UnionFind()
        self.self_edges_dropped = 0
        self.recent_cap = recent_cap
        self.recent: deque[Tweet] = deque(maxlen=recent_cap)
        # minute bucket start -> [tweet_count, set of author ids]
        self.minute_buckets: dict[int, list] = {}

    def _upsert_node(self, user_id: int, screen_name: str) -> Node:
        node = self.nodes.get(user_id)
        if node is None:
            node = Node(user_id, screen_name)
            self.nodes[user_id] = node
            self.dsu.add(user_id)
        return node

    def _bump_edge(self, src: int, dst: int, kind: str, ts: int) -> None:
        key = (src, dst, kind)
        edge = self.edges.get(key)
        if edge is None:
            self.edges[key] = Edge(1, ts, ts)
            self.dsu.union(src, dst)  # endpoints exist; new edge may merge components
        else:
            edge.weight += 1
            if ts < edge.first_seen:
                edge.first_seen = ts
            if ts > edge.last_seen:
                edge.last_seen = ts

    def apply_tweet(self, tweet: Tweet, mention_users: list[tuple[int, str]] = ()) -> int:
        """Apply one tweet known to contain this meme; returns how many
        self-edges were dropped.

        `mention_users` are the tweet's mentioned users resolved to
        (user_id, screen_name); the caller resolves handles once per tweet
        and shares the result across all of the tweet's meme networks.
        """
        ts = tweet.created_at
        dropped = 0
        nodes = self.nodes
        author = nodes.get(tweet.user_id)
        if author is None:
            author = self._upsert_node(tweet.user_id, tweet.screen_name)
        author.tweet_count += 1

        origin_id = tweet.retweet_of_user_id
        if origin_id is not None:
            if origin_id == tweet.user_id:
                dropped += 1
            else:
                origin = nodes.get(origin_id)
                if origin is None:
                    origin = self._upsert_node(origin_id, tweet.retweet_of_screen_name or "")
                origin.retweeted_count += 1
                self._bump_edge(origin_id, tweet.user_id, RETWEET, ts)

        for uid, name in mention_users:
            if uid == origin_id:
                continue  # origin credit flows through the retweet edge
            if uid == tweet.user_id:
                dropped += 1
                continue
            if uid not in nodes:
                self._upsert_node(uid, name)
            self._bump_edge(tweet.user_id, uid, MENTION_EDGE, ts)

        self.tweet_count += 1
        if self.first_seen is None or ts < self.first_seen:
            self.first_seen = ts
        if self.last_seen is None or ts > self.last_seen:
            self.last_seen = ts

        minute = ts - ts % 60
        bucket = self.minute_buckets.get(minute)
        if bucket is None:
            self.minute_buckets[minute] = [1, {tweet.user_id}]
        else:
            bucket[0] += 1
            bucket[1].add(tweet.user_id)
        self.recent.append(tweet)
        self.self_edges_dropped += dropped
        return dropped

    def snapshot(self) -> "DiffusionNetwork":
        """Consistent point-in-time copy; later apply_tweet calls on the
        live network never mutate the copy."""
        dup = DiffusionNetwork(self.meme, self.recent_cap)
        dup.nodes = {
            uid: Node(n.user_id, n.screen_name, n.tweet_count, n.retweeted_count)
            for uid, n in self.nodes.items()
        }
        dup.edges = {
            key: Edge(e.weight, e.first_seen, e.last_seen) for key, e in self.edges.items()
        }
        dup.tweet_count = self.tweet_count
        dup.first_seen = self.first_seen
        dup.last_seen = self.last_seen
        dup.dsu = self.dsu.copy()
        dup.self_edges_dropped = self.self_edges_dropped
        dup.recent = deque(self.recent, maxlen=self.recent_cap)
        dup.minute_buckets = {m: [b[0], set(b[1])] for m, b in self.minute_buckets.items()}
        return dup

    def collapsed_pairs(self) -> set[tuple[int, int]]:
        """Undirected simple-graph edge set: directions and edge types
        between the same user pair merged."""
        pairs = set()
        for src, dst, _ in self.edges:
            pairs.add((src, dst) if src < dst else (dst, src))
        return pairs

    def to_obj(self) -> dict:
        """Canonical JSON-ready form (sorted, deterministic); inverse of
        from_obj. Used for snapshots, spill files, and state digests."""
        return {
            "meme": [self.meme.kind, self.meme.value],
            "tweet_count": self.tweet_count,
            "first_seen": self.first_seen,
            "last_seen": self.last_seen,
            "self_edges_dropped": self.self_edges_dropped,
            "recent_cap": self.recent_cap,
            "nodes": [
                [n.user_id, n.screen_name, n.tweet_count, n.retweeted_count]
                for _, n in sorted(self.nodes.items())
            ],
            "edges": [
                [src, dst, kind, e.weight, e.first_seen, e.last_seen]
                for (src, dst, kind), e in sorted(self.edges.items())
            ],
            "minute_buckets": [
                [minute, b[0], sorted(b[1])] for minute, b in sorted(self.minute_buckets.items())
            ],
            "recent": [tweet_to_obj(t) for t in self.recent],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "DiffusionNetwork":
        net = cls(MemeKey(*obj["meme"]), obj.get("recent_cap", DEFAULT_RECENT_CAP))
        net.tweet_count = obj["tweet_count"]
        net.first_seen = obj["first_seen"]
        net.last_seen = obj["last_seen"]
        net.self_edges_dropped = obj["self_edges_dropped"]
        for uid, name, tc, rc in obj["nodes"]:
            net.nodes[uid] = Node(uid, name, tc, rc)
            net.dsu.add(uid)
        for src, dst, kind, weight, first, last in obj["edges"]:
            net.edges[(src, dst, kind)] = Edge(weight, first, last)
            net.dsu.union(src, dst)
        for minute, count, users in obj["minute_buckets"]:
            net.minute_buckets[minute] = [count, set(users)]
        for tweet_obj in obj["recent"]:
            net.recent.append(tweet_from_obj(tweet_obj))
        return net
