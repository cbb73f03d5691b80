"""Merge trees over vertex leaves.

Nodes ``0..n-1`` are the singleton leaves; internal nodes ``n, n+1, ...`` are
numbered in creation order, so every child id is smaller than its parent id
and the last node is the root. A node's vertex set is the union of the leaves
below it. A cut is an antichain of nodes whose vertex sets partition ``V``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .graph import Graph, ParseError, Partition

log = logging.getLogger(__name__)

#: refusal threshold for the brute-force enumerator
ENUMERATION_LIMIT = 10**6


class EnumerationLimitError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Dendrogram:
    n: int
    children: tuple[tuple[int, ...], ...]
    virtual_root: bool = False
    attrs: tuple[Mapping[str, str], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        parent = np.full(len(self.children), -1, dtype=np.int64)
        for node in range(self.n, len(self.children)):
            kids = self.children[node]
            if len(kids) < 2:
                raise ValueError(f"node {node} has {len(kids)} child(ren); merges need at least two")
            for c in kids:
                if not 0 <= c < node:
                    raise ValueError(f"node {node}: child id {c} must be smaller than the new id")
                if parent[c] != -1:
                    raise ValueError(f"node {c} is a child of both {parent[c]} and {node}")
                parent[c] = node
        for leaf in range(self.n):
            if self.children[leaf]:
                raise ValueError(f"leaf {leaf} cannot have children")
        orphans = np.flatnonzero(parent[:-1] == -1) if len(self.children) else []
        if len(orphans):
            raise ValueError(f"nodes {list(orphans[:5])} have no parent; the last node must be the only root")
        parent.setflags(write=False)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "_spans", None)

    @property
    def node_count(self) -> int:
        return len(self.children)

    @property
    def root(self) -> int:
        return len(self.children) - 1

    @property
    def internal_count(self) -> int:
        return len(self.children) - self.n

    def is_leaf(self, node: int) -> bool:
        return node < self.n

    def _leaf_spans(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._spans is None:
            order = np.empty(self.n, dtype=np.int64)
            start = np.empty(self.node_count, dtype=np.int64)
            end = np.empty(self.node_count, dtype=np.int64)
            pos = 0
            stack = [(self.root, False)]
            while stack:
                node, done = stack.pop()
                if done:
                    end[node] = pos
                    continue
                start[node] = pos
                if node < self.n:
                    order[pos] = node
                    pos += 1
                    end[node] = pos
                    continue
                stack.append((node, True))
                for c in reversed(self.children[node]):
                    stack.append((c, False))
            for a in (order, start, end):
                a.setflags(write=False)
            object.__setattr__(self, "_spans", (order, start, end))
        return self._spans

    def members(self, node: int) -> np.ndarray:
        """Vertices below ``node``, in left-to-right leaf order."""
        order, start, end = self._leaf_spans()
        return order[start[node]:end[node]]

    def sizes(self) -> np.ndarray:
        _, start, end = self._leaf_spans()
        return end - start

    def postorder(self) -> list[int]:
        # ids are already topologically sorted: children precede parents
        return list(range(self.node_count))

    def cut_partition(self, nodes: Sequence[int]) -> Partition:
        labels = [-1] * self.n
        for i, node in enumerate(nodes):
            for v in self.members(node):
                if labels[v] != -1:
                    raise ValueError(f"cut nodes overlap on vertex {v}")
                labels[v] = i
        if -1 in labels:
            raise ValueError("cut does not cover every vertex")
        return Partition(tuple(labels))

    def depth_sum(self) -> int:
        """Path length: total number of (node, ancestor-or-self) pairs weighted by leaves.

        Equals the sum of community sizes over internal nodes, which bounds the
        piecewise work of the multi-scale recursion.
        """
        return int(self.sizes()[self.n:].sum())


def load_dendrogram(text: str, graph: Graph | None = None) -> Dendrogram:
    """Parse ``n <N>`` followed by ``<new_id> <child> <child> ...`` merge lines.

    Trailing ``key=value`` tokens are kept as node attributes (the reordered
    dendrogram writes ``split_alpha=...`` there). When the merges do not reach a
    single root, a virtual root over the remaining maximal nodes is appended and
    the dendrogram is flagged.
    """
    n: int | None = None
    children: list[tuple[int, ...]] = []
    attrs: list[dict[str, str]] = []
    used: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if n is None:
            if tokens[0] != "n" or len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(f"line {lineno}: expected header 'n <N>', got {raw.strip()!r}")
            n = int(tokens[1])
            if graph is not None and n != graph.n:
                raise ParseError(f"line {lineno}: dendrogram has {n} leaves but the graph has {graph.n} vertices")
            children = [()] * n
            continue
        kv = dict(t.split("=", 1) for t in tokens if "=" in t)
        ids = [t for t in tokens if "=" not in t]
        if not all(t.isdigit() for t in ids) or len(ids) < 3:
            raise ParseError(f"line {lineno}: expected '<new_id> <child_1> ... <child_k>' with k >= 2, got {raw.strip()!r}")
        new_id, kids = int(ids[0]), tuple(int(t) for t in ids[1:])
        if new_id != len(children):
            raise ParseError(f"line {lineno}: id gap, expected new id {len(children)} but got {new_id}")
        for c in kids:
            if c >= new_id:
                raise ParseError(f"line {lineno}: child id {c} is not smaller than new id {new_id}")
            if c in used:
                raise ParseError(f"line {lineno}: node {c} already merged into node {used[c]}")
            used[c] = new_id
        children.append(kids)
        attrs.append(kv)
    if n is None:
        raise ParseError("empty dendrogram document (missing 'n <N>' header)")
    if n == 0:
        raise ParseError("dendrogram must have at least one leaf")
    roots = [v for v in range(len(children)) if v not in used]
    virtual = bool(attrs) and attrs[-1].get("virtual") == "1"
    if len(roots) > 1:
        log.info("dendrogram does not cover V; adding virtual root over %d nodes", len(roots))
        children.append(tuple(roots))
        attrs.append({"virtual": "1"})
        virtual = True
    return Dendrogram(n, tuple(children), virtual_root=virtual, attrs=tuple(attrs))


def dump_dendrogram(d: Dendrogram, extra: Mapping[int, Mapping[str, str]] | None = None) -> str:
    lines = [f"n {d.n}"]
    for node in range(d.n, d.node_count):
        tokens = [str(node), *map(str, d.children[node])]
        kv: dict[str, str] = {}
        if d.attrs:
            kv.update(d.attrs[node - d.n])
        if d.virtual_root and node == d.root:
            kv["virtual"] = "1"
        if extra and node in extra:
            kv.update(extra[node])
        tokens.extend(f"{k}={v}" for k, v in kv.items())
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n"


def from_merges(n: int, merges: Sequence[Sequence[int]], virtual_root: bool = False) -> Dendrogram:
    """Build a dendrogram from merge lists; merge ``i`` creates node ``n + i``."""
    return Dendrogram(n, tuple([()] * n + [tuple(m) for m in merges]), virtual_root=virtual_root)


def straight_cuts(d: Dendrogram) -> list[Partition]:
    """The partitions ``P_0`` (all singletons) through ``P_c`` obtained by replaying merges."""
    return [d.cut_partition(nodes) for nodes in straight_cut_nodes(d)]


def straight_cut_nodes(d: Dendrogram) -> Iterator[list[int]]:
    current = set(range(d.n))
    yield sorted(current)
    for node in range(d.n, d.node_count):
        current.difference_update(d.children[node])
        current.add(node)
        yield sorted(current)


def count_partitions(d: Dendrogram, node: int | None = None) -> int:
    """Size of ``Pi_node`` from ``N(C) = 1 + prod N(C_i)``, ``N(leaf) = 1``."""
    node = d.root if node is None else node
    counts = [1] * d.node_count
    for v in range(d.n, node + 1):
        counts[v] = 1 + math.prod(counts[c] for c in d.children[v])
    return counts[node]


def enumerate_partitions(d: Dendrogram, node: int | None = None, limit: int = ENUMERATION_LIMIT) -> list[tuple[int, ...]]:
    """Every cut of the subtree under ``node`` as a sorted tuple of node ids.

    Brute force, meant as a test oracle for small dendrograms only.
    """
    node = d.root if node is None else node
    total = count_partitions(d, node)
    if total > limit:
        raise EnumerationLimitError(f"subtree of node {node} has {total} cuts, above the limit {limit}")
    n_members = len(d.members(node))
    cuts = _enumerate(d, node)
    for cut in cuts:
        sizes = d.sizes()[list(cut)]
        covered = np.concatenate([d.members(c) for c in cut])
        assert sizes.sum() == n_members and len(np.unique(covered)) == n_members
    return cuts


def _enumerate(d: Dendrogram, node: int) -> list[tuple[int, ...]]:
    if d.is_leaf(node):
        return [(node,)]
    combos: list[tuple[int, ...]] = [()]
    for c in d.children[node]:
        sub = _enumerate(d, c)
        combos = [a + b for a in combos for b in sub]
    return [(node,)] + [tuple(sorted(c)) for c in combos]


def random_dendrogram(n: int, rng: np.random.Generator, max_arity: int = 2) -> Dendrogram:
    """Random agglomeration: merge 2..max_arity randomly chosen current roots until one remains."""
    current = list(range(n))
    merges: list[tuple[int, ...]] = []
    while len(current) > 1:
        k = int(rng.integers(2, min(max_arity, len(current)) + 1))
        picks = sorted(rng.choice(len(current), size=k, replace=False).tolist(), reverse=True)
        kids = tuple(current.pop(i) for i in picks)
        merges.append(tuple(sorted(kids)))
        current.append(n + len(merges) - 1)
    return from_merges(n, merges)


def balanced_dendrogram(n: int, rng: np.random.Generator | None = None) -> Dendrogram:
    """Binary dendrogram of minimal height; leaves shuffled when ``rng`` is given."""
    level = list(range(n)) if rng is None else rng.permutation(n).tolist()
    merges: list[tuple[int, int]] = []
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            merges.append((level[i], level[i + 1]))
            nxt.append(n + len(merges) - 1)
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return from_merges(n, merges)
