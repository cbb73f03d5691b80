"""Greedy modularity agglomeration as a built-in dendrogram producer."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .dendrogram import Dendrogram
from .graph import Graph


@dataclass
class MergeTrace:
    """Merges in order: ``(step, new node, merged nodes, delta Q)``.

    Virtual-root steps carry ``delta Q = None``.
    """

    steps: list[tuple[int, int, tuple[int, ...], float | None]]
    dendrogram: Dendrogram


def greedy_agglomerate(g: Graph) -> MergeTrace:
    """Merge the adjacent pair with the largest modularity gain until none is left.

    The gain ``2(e_ij - a_i a_j)`` is ranked through the exact integer key
    ``2m * edges_ij - deg_i * deg_j`` so ties are genuine and resolve to the
    smallest node ids. Connected components end as separate roots, which are
    then joined under one flagged virtual root.
    """
    if g.m == 0:
        raise ValueError("greedy agglomeration needs at least one edge")
    n, two_m = g.n, 2 * g.m
    deg: dict[int, int] = {v: int(g.degrees[v]) for v in range(n)}
    links: dict[int, dict[int, int]] = {v: {w: 1 for w in g.adjacency[v]} for v in range(n)}
    heap = []
    for u, v in g.edges:
        heap.append((-(two_m - deg[u] * deg[v]), u, v))
    heapq.heapify(heap)
    alive = set(range(n))
    merges: list[tuple[int, int]] = []
    steps = []
    while heap:
        negkey, a, b = heapq.heappop(heap)
        if a not in alive or b not in alive:
            continue
        new = n + len(merges)
        merges.append((a, b))
        steps.append((len(merges), new, (a, b), -negkey / (two_m * two_m / 2)))
        alive.discard(a)
        alive.discard(b)
        la, lb = links.pop(a), links.pop(b)
        la.pop(b, None)
        lb.pop(a, None)
        if len(la) < len(lb):
            la, lb = lb, la
        for k, cnt in lb.items():
            la[k] = la.get(k, 0) + cnt
        deg[new] = deg.pop(a) + deg.pop(b)
        for k, cnt in la.items():
            nb = links[k]
            nb.pop(a, None)
            nb.pop(b, None)
            nb[new] = cnt
            heapq.heappush(heap, (-(two_m * cnt - deg[new] * deg[k]), min(new, k), max(new, k)))
        links[new] = la
        alive.add(new)
    roots = sorted(alive)
    children: list[tuple[int, ...]] = [()] * n + [tuple(sorted(m)) for m in merges]
    virtual = len(roots) > 1
    if virtual:
        children.append(tuple(roots))
        steps.append((len(merges) + 1, len(children) - 1, tuple(roots), None))
    return MergeTrace(steps, Dendrogram(n, tuple(children), virtual_root=virtual))
