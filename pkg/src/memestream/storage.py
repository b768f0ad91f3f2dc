"""Durable event log, periodic state snapshots, and graph exports.

Log layout under the state directory:

    log/segment-000000.ndjson   one accepted tweet per line, with the
    log/segment-000001.ndjson   theme names it routed through
    log/manifest.json           closed segments: {name, first_id, last_id,
                                count, sha256}
    snapshots/state-<n>.json    engine state at n accepted tweets

Closed segments verify against the manifest on open; the tail segment is
scanned line by line and truncated at the last valid record. Exports are
byte-deterministic for a given snapshot.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterator

from .extraction import MemeKey
from .graph import DiffusionNetwork, Edge, Node
from .ingest import Tweet, format_timestamp, parse_timestamp, tweet_from_obj, tweet_to_obj

logger = logging.getLogger(__name__)

EXPORT_FORMATS = ("edgelist", "graphml", "json")

DEFAULT_SEGMENT_SIZE = 10000

EDGELIST_HEADER = "source\ttarget\ttype\tweight"

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


class UnknownFormat(ValueError):
    pass


class LogCorruption(RuntimeError):
    pass


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class EventLog:
    """Append-only segmented log of accepted tweets plus their routing.

    Appends hit the OS before the caller proceeds (flush per record), so a
    killed process never loses acknowledged records; a torn tail line is
    truncated on reopen with a warning.
    """

    def __init__(self, root: str | Path, segment_size: int = DEFAULT_SEGMENT_SIZE):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.segment_size = segment_size
        self.manifest_path = self.root / "manifest.json"
        self.segments: list[dict] = []
        if self.manifest_path.exists():
            self.segments = json.loads(self.manifest_path.read_text(encoding="utf-8"))["segments"]
        self._verify_closed_segments()
        self._tail_records = self._repair_tail()
        self.count = sum(s["count"] for s in self.segments) + len(self._tail_records)
        self._tail_first_id = self._tail_records[0][0].id if self._tail_records else None
        self._tail_last_id = self._tail_records[-1][0].id if self._tail_records else None
        self._fh = open(self._tail_path(), "a", encoding="utf-8")

    def _tail_index(self) -> int:
        return len(self.segments)

    def _segment_path(self, index: int) -> Path:
        return self.root / f"segment-{index:06d}.ndjson"

    def _tail_path(self) -> Path:
        return self._segment_path(self._tail_index())

    def _verify_closed_segments(self) -> None:
        for seg in self.segments:
            path = self.root / seg["name"]
            if not path.exists():
                raise LogCorruption(f"missing log segment {seg['name']}")
            digest = _sha256_file(path)
            if digest != seg["sha256"]:
                raise LogCorruption(f"log segment {seg['name']} digest mismatch")

    def _repair_tail(self) -> list[tuple[Tweet, list[str]]]:
        path = self._tail_path()
        if not path.exists():
            return []
        records = []
        good_bytes = 0
        with open(path, "rb") as fh:
            for raw in fh:
                if not raw.endswith(b"\n"):
                    logger.warning("event log: truncated record at tail of %s, dropping", path.name)
                    break
                try:
                    obj = json.loads(raw)
                    records.append((tweet_from_obj(obj["t"]), obj["themes"]))
                except (ValueError, KeyError, TypeError):
                    logger.warning("event log: corrupt record at tail of %s, truncating", path.name)
                    break
                good_bytes += len(raw)
        if good_bytes < os.path.getsize(path):
            with open(path, "r+b") as fh:
                fh.truncate(good_bytes)
        return records

    def append(self, tweet: Tweet, theme_names: list[str]) -> int:
        """Durably append one accepted tweet; returns its log offset."""
        line = json.dumps(
            {"t": tweet_to_obj(tweet), "themes": theme_names},
            ensure_ascii=False,
            separators=(",", ":"),
        )
        self._fh.write(line + "\n")
        self._fh.flush()
        offset = self.count
        self.count += 1
        self._tail_records.append((tweet, theme_names))
        if self._tail_first_id is None:
            self._tail_first_id = tweet.id
        self._tail_last_id = tweet.id
        if len(self._tail_records) >= self.segment_size:
            self._rotate()
        return offset

    def _rotate(self) -> None:
        self._fh.close()
        path = self._tail_path()
        self.segments.append(
            {
                "name": path.name,
                "first_id": self._tail_first_id,
                "last_id": self._tail_last_id,
                "count": len(self._tail_records),
                "sha256": _sha256_file(path),
            }
        )
        _atomic_write(
            self.manifest_path,
            json.dumps({"segments": self.segments}, indent=2).encode("utf-8"),
        )
        self._tail_records = []
        self._tail_first_id = None
        self._tail_last_id = None
        self._fh = open(self._tail_path(), "a", encoding="utf-8")

    def replay_log(self, start: int = 0) -> Iterator[tuple[Tweet, list[str]]]:
        """Yield (tweet, theme names) from offset `start`, exactly the
        accepted sequence."""
        offset = 0
        for index, seg in enumerate(self.segments):
            if offset + seg["count"] <= start:
                offset += seg["count"]
                continue
            with open(self.root / seg["name"], "r", encoding="utf-8") as fh:
                for line in fh:
                    if offset >= start:
                        obj = json.loads(line)
                        yield tweet_from_obj(obj["t"]), obj["themes"]
                    offset += 1
        for tweet, themes in self._tail_records:
            if offset >= start:
                yield tweet, themes
            offset += 1

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        self._fh.flush()
        self._fh.close()


# -- state snapshots --


def save_snapshot(snap_dir: str | Path, state: dict, accepted: int, keep: int = 2) -> Path:
    """Atomically write a checksummed state snapshot covering `accepted`
    log records; prunes all but the newest `keep` snapshots."""
    snap_dir = Path(snap_dir)
    snap_dir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(state, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    wrapper = json.dumps(
        {
            "accepted": accepted,
            "sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
            "state": payload,
        }
    )
    path = snap_dir / f"state-{accepted:012d}.json"
    _atomic_write(path, wrapper.encode("utf-8"))
    snapshots = sorted(snap_dir.glob("state-*.json"))
    for old in snapshots[:-keep]:
        old.unlink()
    return path


def load_latest_snapshot(snap_dir: str | Path, max_accepted: int) -> tuple[int, dict] | None:
    """Newest valid snapshot covering at most `max_accepted` records, or
    None. Corrupt snapshots are skipped with a warning."""
    snap_dir = Path(snap_dir)
    if not snap_dir.is_dir():
        return None
    for path in sorted(snap_dir.glob("state-*.json"), reverse=True):
        try:
            wrapper = json.loads(path.read_text(encoding="utf-8"))
            if wrapper["accepted"] > max_accepted:
                continue
            payload = wrapper["state"]
            digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
            if digest != wrapper["sha256"]:
                raise ValueError("checksum mismatch")
            return wrapper["accepted"], json.loads(payload)
        except (ValueError, KeyError) as exc:
            logger.warning("snapshot %s unusable (%s), skipping", path.name, exc)
    return None


# -- network exports --


def sorted_nodes(network: DiffusionNetwork) -> list[Node]:
    return [network.nodes[uid] for uid in sorted(network.nodes)]


def sorted_edges(network: DiffusionNetwork) -> list[tuple[tuple[int, int, str], Edge]]:
    return sorted(network.edges.items())


def export_edgelist(network: DiffusionNetwork) -> bytes:
    """TSV edge list, rows sorted by (source, target, type). Nodes with no
    edges appear as `id<TAB><TAB><TAB>0` rows so re-imports keep the node
    count (sorted before any edges of the same source)."""
    lines = [EDGELIST_HEADER]
    linked = {uid for (s, t, _) in network.edges for uid in (s, t)}
    rows: list[tuple[int, int, str, str]] = []
    for uid in network.nodes:
        if uid not in linked:
            rows.append((uid, -1, "", f"{uid}\t\t\t0"))
    for (src, dst, kind), edge in network.edges.items():
        rows.append((src, dst, kind, f"{src}\t{dst}\t{kind}\t{edge.weight}"))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    lines.extend(r[3] for r in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_edgelist(data: bytes) -> DiffusionNetwork:
    """Rebuild a network (ids, edges, weights only) from an edgelist
    export; screen names and counts are not part of the format."""
    lines = data.decode("utf-8").splitlines()
    if not lines or lines[0] != EDGELIST_HEADER:
        raise ValueError("missing edgelist header")
    net = DiffusionNetwork(MemeKey("hashtag", "imported"))
    for line in lines[1:]:
        source, target, kind, weight = line.split("\t")
        src = int(source)
        if src not in net.nodes:
            net.nodes[src] = Node(src, "")
            net.dsu.add(src)
        if not target:
            continue
        dst = int(target)
        if dst not in net.nodes:
            net.nodes[dst] = Node(dst, "")
            net.dsu.add(dst)
        net.edges[(src, dst, kind)] = Edge(int(weight), 0, 0)
        net.dsu.union(src, dst)
    return net


def _node_json(node: Node, labels: dict | None) -> dict:
    obj = {
        "id": node.user_id,
        "screen_name": node.screen_name,
        "tweet_count": node.tweet_count,
        "retweeted_count": node.retweeted_count,
    }
    if labels is not None:
        lab = labels.get(node.user_id)
        if lab is not None and lab.partisanship is not None:
            obj["partisanship"] = lab.partisanship
    return obj


def export_json(network: DiffusionNetwork, labels: dict | None = None) -> bytes:
    """Node-link JSON graph with the same attributes as GraphML."""
    obj = {
        "meme": {"kind": network.meme.kind, "value": network.meme.value},
        "nodes": [_node_json(n, labels) for n in sorted_nodes(network)],
        "links": [
            {
                "source": src,
                "target": dst,
                "type": kind,
                "weight": edge.weight,
                "first_seen": format_timestamp(edge.first_seen),
                "last_seen": format_timestamp(edge.last_seen),
            }
            for (src, dst, kind), edge in sorted_edges(network)
        ],
    }
    return (json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1) + "\n").encode("utf-8")


def import_json(data: bytes) -> DiffusionNetwork:
    obj = json.loads(data.decode("utf-8"))
    net = DiffusionNetwork(MemeKey(obj["meme"]["kind"], obj["meme"]["value"]))
    for n in obj["nodes"]:
        net.nodes[n["id"]] = Node(n["id"], n["screen_name"], n["tweet_count"], n["retweeted_count"])
        net.dsu.add(n["id"])
    for link in obj["links"]:
        key = (link["source"], link["target"], link["type"])
        net.edges[key] = Edge(
            link["weight"],
            parse_timestamp(link["first_seen"]),
            parse_timestamp(link["last_seen"]),
        )
        net.dsu.union(link["source"], link["target"])
    return net


_GRAPHML_NODE_KEYS = (
    ("d0", "screen_name", "string"),
    ("d1", "tweet_count", "int"),
    ("d2", "retweeted_count", "int"),
    ("d3", "partisanship", "double"),
)
_GRAPHML_EDGE_KEYS = (
    ("d4", "type", "string"),
    ("d5", "weight", "int"),
    ("d6", "first_seen", "string"),
    ("d7", "last_seen", "string"),
)


def export_graphml(network: DiffusionNetwork, labels: dict | None = None) -> bytes:
    """Minimal valid GraphML: attribute keys declared up front, directed
    graph, one <edge> per (source, target, type) with a unique id."""
    root = ET.Element("graphml", {"xmlns": GRAPHML_NS})
    for domain, keys in (("node", _GRAPHML_NODE_KEYS), ("edge", _GRAPHML_EDGE_KEYS)):
        for key_id, name, attr_type in keys:
            ET.SubElement(
                root,
                "key",
                {"id": key_id, "for": domain, "attr.name": name, "attr.type": attr_type},
            )
    graph = ET.SubElement(root, "graph", id=str(network.meme), edgedefault="directed")
    for node in sorted_nodes(network):
        el = ET.SubElement(graph, "node", id=str(node.user_id))
        values = {
            "d0": node.screen_name,
            "d1": str(node.tweet_count),
            "d2": str(node.retweeted_count),
        }
        if labels is not None:
            lab = labels.get(node.user_id)
            if lab is not None and lab.partisanship is not None:
                values["d3"] = repr(lab.partisanship)
        for key_id, value in values.items():
            data = ET.SubElement(el, "data", key=key_id)
            data.text = value
    for i, ((src, dst, kind), edge) in enumerate(sorted_edges(network)):
        el = ET.SubElement(graph, "edge", id=f"e{i}", source=str(src), target=str(dst))
        for key_id, value in (
            ("d4", kind),
            ("d5", str(edge.weight)),
            ("d6", format_timestamp(edge.first_seen)),
            ("d7", format_timestamp(edge.last_seen)),
        ):
            data = ET.SubElement(el, "data", key=key_id)
            data.text = value
    ET.indent(root)
    return b'<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode").encode("utf-8") + b"\n"


def validate_graphml(data: bytes) -> None:
    """Structural GraphML checks: namespaced root, keys declared before
    use, unique node ids, edges referencing declared nodes. Raises
    ValueError on the first violation."""
    root = ET.fromstring(data)
    if root.tag != f"{{{GRAPHML_NS}}}graphml":
        raise ValueError(f"root element is {root.tag}, not namespaced graphml")
    declared_keys: dict[str, str] = {}
    for key in root.findall(f"{{{GRAPHML_NS}}}key"):
        key_id = key.get("id")
        domain = key.get("for")
        if key_id is None or domain not in ("node", "edge", "graph", "all"):
            raise ValueError("key element missing id or valid 'for'")
        if key_id in declared_keys:
            raise ValueError(f"duplicate key id {key_id}")
        declared_keys[key_id] = domain
    graphs = root.findall(f"{{{GRAPHML_NS}}}graph")
    if not graphs:
        raise ValueError("no graph element")
    for graph in graphs:
        if graph.get("edgedefault") not in ("directed", "undirected"):
            raise ValueError("graph missing edgedefault")
        node_ids = set()
        for node in graph.findall(f"{{{GRAPHML_NS}}}node"):
            node_id = node.get("id")
            if node_id is None or node_id in node_ids:
                raise ValueError(f"missing or duplicate node id {node_id}")
            node_ids.add(node_id)
            _check_data_keys(node, declared_keys, "node")
        edge_ids = set()
        for edge in graph.findall(f"{{{GRAPHML_NS}}}edge"):
            src, dst = edge.get("source"), edge.get("target")
            if src not in node_ids or dst not in node_ids:
                raise ValueError(f"edge endpoint not declared: {src} -> {dst}")
            edge_id = edge.get("id")
            if edge_id is not None:
                if edge_id in edge_ids:
                    raise ValueError(f"duplicate edge id {edge_id}")
                edge_ids.add(edge_id)
            _check_data_keys(edge, declared_keys, "edge")


def _check_data_keys(el, declared: dict[str, str], domain: str) -> None:
    for data in el.findall(f"{{{GRAPHML_NS}}}data"):
        key_id = data.get("key")
        if key_id not in declared:
            raise ValueError(f"data references undeclared key {key_id}")
        if declared[key_id] not in (domain, "all"):
            raise ValueError(f"key {key_id} declared for {declared[key_id]}, used on {domain}")


def export_network(network: DiffusionNetwork, fmt: str, labels: dict | None = None) -> bytes:
    if fmt == "edgelist":
        return export_edgelist(network)
    if fmt == "graphml":
        return export_graphml(network, labels)
    if fmt == "json":
        return export_json(network, labels)
    raise UnknownFormat(fmt)
