"""Additive quality functions and their multi-scale splits.

Every family is written as ``q(C) = h(C) + l(C)`` where ``h`` grows with
community size (superadditive) and ``l`` shrinks with it (subadditive). The
multi-scale version is ``q_alpha(C) = alpha*h(C) + (1-alpha)*l(C)``, so
``q_alpha`` at one half is exactly half of ``q``.

============  ======================  =====================================
family        h(C)                    l(C)
============  ======================  =====================================
modularity    e(C)                    -a(C)**2
performance   2*int(C) / (n(n-1))     (|C|(n-|C|) - cut(C)) / (n(n-1))
similarity    -1/n                    -sigma(C) / sigma(V)
============  ======================  =====================================

``int(C)`` counts edges inside ``C``, ``cut(C)`` edges leaving it,
``e(C) = int(C)/m`` and ``a(C) = deg(C)/(2m)``. All graph quantities are
accumulated as integers and divided once.

sigma(C) sums squared distances over *unordered* pairs of ``C`` and divides
by ``|C|``. Only the ratio ``sigma(C)/sigma(V)`` enters the quality, so the
ordered-pair convention (a factor 2 on both sides) gives identical results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dendrogram import Dendrogram
from .graph import Graph, Partition, SimilarityData

log = logging.getLogger(__name__)

FAMILIES = ("modularity", "performance", "similarity")


class QualityError(ValueError):
    """The requested quality is undefined for this input."""


@dataclass(frozen=True)
class CommunityStats:
    """Integer counters of one community; fractions are derived on demand."""

    size: int
    internal: int
    degree_sum: int
    m: int

    @property
    def e(self) -> float:
        return self.internal / self.m

    @property
    def a(self) -> float:
        return self.degree_sum / (2 * self.m)

    @property
    def cut(self) -> int:
        return self.degree_sum - 2 * self.internal

    def merge(self, other: "CommunityStats", cross_edges: int) -> "CommunityStats":
        return CommunityStats(
            self.size + other.size,
            self.internal + other.internal + cross_edges,
            self.degree_sum + other.degree_sum,
            self.m,
        )


def community_stats(vertices: Iterable[int], g: Graph) -> CommunityStats:
    members = set(int(v) for v in vertices)
    if not members:
        raise ValueError("community must be nonempty")
    internal2 = 0
    deg = 0
    for u in members:
        adj = g.adjacency[u]
        deg += len(adj)
        internal2 += sum(1 for w in adj if w in members)
    return CommunityStats(len(members), internal2 // 2, deg, g.m)


def dendrogram_stats(d: Dendrogram, g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Size, internal edge count and degree sum for every dendrogram node.

    Cross edges at each merge are counted small-to-large: only vertices of the
    non-largest children are scanned, against a running group label.
    """
    if d.n != g.n:
        raise ValueError(f"dendrogram has {d.n} leaves but graph has {g.n} vertices")
    N = d.node_count
    sizes = d.sizes().astype(np.int64)
    internal = np.zeros(N, dtype=np.int64)
    degsum = np.zeros(N, dtype=np.int64)
    degsum[: d.n] = g.degrees
    label = list(range(d.n))
    rep = list(range(d.n)) + [0] * (N - d.n)
    adjacency = g.adjacency
    for node in range(d.n, N):
        kids = d.children[node]
        big = max(kids, key=lambda c: (sizes[c], -c))
        target = rep[big]
        cross = 0
        for c in kids:
            if c == big:
                continue
            members = d.members(c).tolist()
            for u in members:
                for w in adjacency[u]:
                    if label[w] == target:
                        cross += 1
            for u in members:
                label[u] = target
        internal[node] = sum(int(internal[c]) for c in kids) + cross
        degsum[node] = sum(int(degsum[c]) for c in kids)
        rep[node] = target
    return sizes, internal, degsum


class NodeTerms:
    """Per-node ``h`` and ``l`` values of a quality family on one dendrogram.

    ``evaluations`` counts calls to the ``q`` accessors, which is how callers
    verify that each node's quality is requested exactly once.
    """

    def __init__(self, h: Sequence[float], l: Sequence[float], family: str = "custom"):
        self.h = np.asarray(h, dtype=float)
        self.l = np.asarray(l, dtype=float)
        if self.h.shape != self.l.shape:
            raise ValueError("h and l must have the same length")
        self.family = family
        self.evaluations = 0

    def __len__(self) -> int:
        return len(self.h)

    def q(self, node: int) -> float:
        self.evaluations += 1
        return float(self.h[node] + self.l[node])

    def q_alpha(self, node: int, alpha: float) -> float:
        self.evaluations += 1
        return float(alpha * self.h[node] + (1.0 - alpha) * self.l[node])

    def line(self, node: int) -> tuple[float, float]:
        """``(q_0, q_1)``: the affine function ``alpha -> q_alpha`` by its end values."""
        self.evaluations += 1
        return float(self.l[node]), float(self.h[node])

    def cut_value(self, nodes: Iterable[int], alpha: float | None = None) -> float:
        """Sum of per-node values over a cut, without touching ``evaluations``."""
        nodes = list(nodes)
        if alpha is None:
            return float(sum(self.h[v] + self.l[v] for v in nodes))
        return float(sum(alpha * self.h[v] + (1.0 - alpha) * self.l[v] for v in nodes))


class QualityModel:
    family = "abstract"

    def terms(self, vertices: Iterable[int]) -> tuple[float, float]:
        """``(h(C), l(C))`` evaluated directly on a vertex set."""
        raise NotImplementedError

    def node_terms(self, d: Dendrogram) -> NodeTerms:
        raise NotImplementedError

    def q(self, vertices: Iterable[int]) -> float:
        h, l = self.terms(vertices)
        return h + l

    def q_alpha(self, vertices: Iterable[int], alpha: float) -> float:
        return multiscale_q(vertices, alpha, self)

    def value(self, partition: Partition, alpha: float | None = None) -> float:
        """Additive value: the sum of per-community contributions."""
        if alpha is None:
            return float(sum(self.q(c) for c in partition.communities))
        return float(sum(self.q_alpha(c, alpha) for c in partition.communities))


class ModularityModel(QualityModel):
    family = "modularity"

    def __init__(self, graph: Graph):
        if graph.m == 0:
            raise QualityError("modularity is undefined on a graph without edges")
        self.graph = graph

    def terms(self, vertices):
        s = community_stats(vertices, self.graph)
        return s.e, -s.a * s.a

    def node_terms(self, d: Dendrogram) -> NodeTerms:
        _, internal, degsum = dendrogram_stats(d, self.graph)
        m = self.graph.m
        a = degsum / (2 * m)
        terms = NodeTerms(internal / m, -(a * a), self.family)
        _check_shape(d, terms)
        return terms

    def global_value(self, partition: Partition) -> float:
        """Whole-partition modularity from the adjacency matrix (independent of ``q``)."""
        A = self.graph.adjacency_matrix().astype(float)
        k = A.sum(axis=1)
        two_m = 2.0 * self.graph.m
        labels = np.asarray(partition.community_of)
        same = labels[:, None] == labels[None, :]
        return float(((A - np.outer(k, k) / two_m) * same).sum() / two_m)


class PerformanceModel(QualityModel):
    family = "performance"

    def __init__(self, graph: Graph):
        if graph.n < 2:
            raise QualityError("performance needs at least two vertices")
        self.graph = graph
        self.norm = graph.n * (graph.n - 1)

    def terms(self, vertices):
        s = community_stats(vertices, self.graph)
        n = self.graph.n
        return 2 * s.internal / self.norm, (s.size * (n - s.size) - s.cut) / self.norm

    def node_terms(self, d: Dendrogram) -> NodeTerms:
        sizes, internal, degsum = dendrogram_stats(d, self.graph)
        n = self.graph.n
        cut = degsum - 2 * internal
        terms = NodeTerms(2 * internal / self.norm, (sizes * (n - sizes) - cut) / self.norm, self.family)
        _check_shape(d, terms)
        return terms

    def global_value(self, partition: Partition) -> float:
        """Fraction of correctly classified vertex pairs, counted pair by pair."""
        g = self.graph
        lab = partition.community_of
        good = 0
        for u in range(g.n):
            for v in range(u + 1, g.n):
                same = lab[u] == lab[v]
                good += same == g.has_edge(u, v)
        return good / (g.n * (g.n - 1) / 2)


class SimilarityModel(QualityModel):
    family = "similarity"

    def __init__(self, data: SimilarityData):
        self.data = data
        self.n = data.n
        self.sigma_max = sigma(range(data.n), data)
        if self.sigma_max <= 0:
            raise QualityError("degenerate similarity data: all vertices are at distance zero")

    def terms(self, vertices):
        return -1.0 / self.n, -sigma(vertices, self.data) / self.sigma_max

    def node_terms(self, d: Dendrogram) -> NodeTerms:
        sig = dendrogram_sigma(d, self.data)
        terms = NodeTerms(np.full(d.node_count, -1.0 / self.n), -sig / self.sigma_max, self.family)
        _check_shape(d, terms)
        return terms

    def global_value(self, partition: Partition) -> float:
        """``-c(P)/n - sum sigma(C)/sigma_max`` with sigma from explicit pair loops."""
        total = 0.0
        for comm in partition.communities:
            pair = sum(self.data.sq_distance(i, j) for k, i in enumerate(comm) for j in comm[k + 1:])
            total += pair / len(comm)
        return -partition.community_count / self.n - total / self.sigma_max


def _check_shape(d: Dendrogram, terms: NodeTerms) -> None:
    if log.isEnabledFor(logging.DEBUG):
        report = check_merge_inequalities(d, terms)
        for node, kind, gap in report:
            log.debug("node %d violates %s by %.3g", node, kind, gap)


def check_merge_inequalities(d: Dendrogram, terms: NodeTerms, tol: float = 1e-12) -> list[tuple[int, str, float]]:
    """Nodes where ``h`` fails superadditivity or ``l`` fails subadditivity over the children."""
    bad = []
    for node in range(d.n, d.node_count):
        kids = list(d.children[node])
        gap_h = terms.h[kids].sum() - terms.h[node]
        gap_l = terms.l[node] - terms.l[kids].sum()
        if gap_h > tol:
            bad.append((node, "h superadditivity", float(gap_h)))
        if gap_l > tol:
            bad.append((node, "l subadditivity", float(gap_l)))
    return bad


def modularity_q(vertices: Iterable[int], g: Graph) -> float:
    return ModularityModel(g).q(vertices)


def performance_q(vertices: Iterable[int], g: Graph) -> float:
    return PerformanceModel(g).q(vertices)


def sigma(vertices: Iterable[int], s: SimilarityData) -> float:
    """Mean square pair distance: ``(1/|C|) * sum_{i<j in C} d_ij**2``."""
    idx = np.fromiter((int(v) for v in vertices), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("community must be nonempty")
    if np.any(idx < 0) or np.any(idx >= s.n):
        raise ValueError("vertex without a distance entry")
    if s.coords is not None:
        # sum_{i<j} |x_i - x_j|^2 = |C| * sum_i |x_i - mean|^2
        x = s.coords[idx]
        centered = x - x.mean(axis=0)
        return float((centered * centered).sum())
    sub = s.sq_distances[np.ix_(idx, idx)]
    return float(sub.sum() / 2.0 / idx.size)


def dendrogram_sigma(d: Dendrogram, s: SimilarityData) -> np.ndarray:
    """sigma for every node, built bottom-up from the children.

    Euclidean mode keeps (count, centroid, within sum of squares) per node and
    merges with the between-group term ``sum_i n_i |mean_i - mean|^2`` (for two
    children this is ``n1 n2 / (n1 + n2) * |mean_1 - mean_2|^2``: one extra
    distance). Matrix mode adds the cross-pair block sums.
    """
    if d.n != s.n:
        raise ValueError(f"dendrogram has {d.n} leaves but similarity data covers {s.n} vertices")
    N = d.node_count
    sizes = d.sizes()
    out = np.zeros(N)
    if s.coords is not None:
        means = np.zeros((N, s.coords.shape[1]))
        means[: d.n] = s.coords
        for node in range(d.n, N):
            kids = list(d.children[node])
            w = sizes[kids].astype(float)
            mu = (w[:, None] * means[kids]).sum(axis=0) / w.sum()
            dev = means[kids] - mu
            out[node] = out[kids].sum() + float((w * (dev * dev).sum(axis=1)).sum())
            means[node] = mu
        return out
    pair = np.zeros(N)
    D2 = s.sq_distances
    for node in range(d.n, N):
        kids = d.children[node]
        total = sum(pair[c] for c in kids)
        mems = [d.members(c) for c in kids]
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                total += D2[np.ix_(mems[i], mems[j])].sum()
        pair[node] = total
    return pair / sizes


def similarity_q(vertices: Iterable[int], s: SimilarityData, n: int | None = None, sigma_max: float | None = None) -> float:
    n = s.n if n is None else n
    smax = sigma(range(s.n), s) if sigma_max is None else sigma_max
    if smax <= 0:
        raise QualityError("degenerate similarity data: all vertices are at distance zero")
    return -1.0 / n - sigma(vertices, s) / smax


def multiscale_q(vertices: Iterable[int], alpha: float, model: QualityModel) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"scale factor {alpha} outside [0, 1]")
    h, l = model.terms(vertices)
    return alpha * h + (1.0 - alpha) * l


def expected_modularity(d_in: float, d_out: float, c: int) -> float:
    """Expected modularity of a planted partition with ``c`` equal blocks."""
    if c < 2:
        raise ValueError("need at least two communities")
    if d_in < 0 or d_out < 0 or d_in + d_out <= 0:
        raise ValueError("degrees must be non-negative with a positive total")
    return d_in / (d_in + d_out) - 1.0 / c


def d_out_for_modularity(d_in: float, target: float, c: int) -> float:
    """Invert :func:`expected_modularity` for the external degree."""
    frac = target + 1.0 / c
    if not 0 < frac <= 1:
        raise ValueError(f"expected modularity {target} unreachable with {c} communities")
    return d_in / frac - d_in


def make_model(family: str, graph: Graph | None = None, similarity: SimilarityData | None = None) -> QualityModel:
    if family == "modularity":
        return ModularityModel(graph)
    if family == "performance":
        return PerformanceModel(graph)
    if family == "similarity":
        if similarity is None:
            raise QualityError("similarity quality needs an embedding or a distance matrix")
        return SimilarityModel(similarity)
    raise QualityError(f"unknown quality family {family!r}; choose from {', '.join(FAMILIES)}")
