"""Independent oracles the implementation is checked against.

These re-derive statistics from first principles (adjacency walks,
brute-force counting) and never call the incremental code paths they
verify.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations


def collapsed_adjacency(edges) -> dict[int, set[int]]:
    """Undirected simple-graph adjacency from a (src, dst, type) edge map."""
    adj: dict[int, set[int]] = {}
    for src, dst, _ in edges:
        adj.setdefault(src, set()).add(dst)
        adj.setdefault(dst, set()).add(src)
    return adj


def bfs_lcc(node_ids, edges) -> int:
    """Largest connected component size by breadth-first search."""
    adj = collapsed_adjacency(edges)
    unvisited = set(node_ids)
    best = 0
    while unvisited:
        start = unvisited.pop()
        size = 1
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for peer in adj.get(node, ()):
                if peer in unvisited:
                    unvisited.remove(peer)
                    size += 1
                    queue.append(peer)
        best = max(best, size)
    return best


def degree_sum_mean(node_ids, edges) -> float:
    """Mean degree as (sum of per-node adjacency-list lengths) / N."""
    node_ids = list(node_ids)
    if not node_ids:
        return 0.0
    adj = collapsed_adjacency(edges)
    total = sum(len(adj.get(n, ())) for n in node_ids)
    return total / len(node_ids)


def brute_force_cooccurrence(meme_sets) -> dict[tuple, int]:
    """Pair counts by double loop over stored per-tweet meme sets."""
    counts: dict[tuple, int] = {}
    for memes in meme_sets:
        for a, b in combinations(sorted(memes), 2):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts
