"""Disjoint-set union over arbitrary integer ids, tracking the largest
component size online. No deletions, so sizes stay exact on a growing graph."""

from __future__ import annotations


class UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}
        self.size: dict[int, int] = {}
        self.max_size = 0

    def add(self, x: int) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1
            if self.max_size == 0:
                self.max_size = 1

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        """Merge the components of a and b; both must have been add()ed."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        del self.size[rb]
        if self.size[ra] > self.max_size:
            self.max_size = self.size[ra]

    def __len__(self) -> int:
        return len(self.parent)

    def copy(self) -> "UnionFind":
        dup = UnionFind()
        dup.parent = dict(self.parent)
        dup.size = dict(self.size)
        dup.max_size = self.max_size
        return dup

    def to_obj(self) -> dict:
        # canonical: every node points at its root, sorted keys
        return {
            "members": {str(x): self.find(x) for x in sorted(self.parent)},
            "max_size": self.max_size,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "UnionFind":
        uf = cls()
        for x_str, root in obj["members"].items():
            uf.add(int(x_str))
            uf.add(root)
        for x_str, root in obj["members"].items():
            uf.union(int(x_str), root)
        uf.max_size = max(uf.size.values(), default=0)
        return uf
