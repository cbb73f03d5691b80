"""Undirected graphs, vertex partitions and per-vertex similarity data.

Vertices are dense 0-based integers everywhere; every algorithm in the package
indexes arrays by vertex id.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed input document; the message names the offending line."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph."""

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        ordered = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            nbrs[u].append(v)
            nbrs[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in nbrs)
        degrees = np.array([len(a) for a in adjacency], dtype=np.int64)
        degrees.setflags(write=False)
        return cls(n, ordered, adjacency, degrees)

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adjacency[u]
        i = bisect_left(a, v)
        return i < len(a) and a[i] == v

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1
            a[e[:, 1], e[:, 0]] = 1
        return a

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))


def load_graph(text: str) -> Graph:
    """Parse an edge-list document.

    One ``u v`` pair per line, ``#`` starts a comment. An optional ``n <N>``
    header fixes the vertex count (otherwise max id + 1), which is how
    isolated trailing vertices survive a round trip.
    """
    n_header: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "n":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(f"line {lineno}: malformed header {raw.strip()!r}")
            n_header = int(tokens[1])
            continue
        if len(tokens) == 3:
            raise ParseError(f"line {lineno}: weighted edges are not supported: {raw.strip()!r}")
        if len(tokens) != 2 or not all(t.isdigit() for t in tokens):
            raise ParseError(f"line {lineno}: expected 'u v' with non-negative integers, got {raw.strip()!r}")
        u, v = int(tokens[0]), int(tokens[1])
        if u == v:
            raise ParseError(f"line {lineno}: self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        edges.append(key)
    n = max((v for e in edges for v in e), default=-1) + 1
    if n_header is not None:
        if n_header < n:
            raise ParseError(f"header n {n_header} is smaller than max vertex id + 1 ({n})")
        n = n_header
    return Graph.from_edges(n, edges)


def dump_graph(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Partition:
    """Disjoint communities covering ``0..n-1``.

    Communities are numbered ``0..k-1`` in order of their smallest vertex, so
    two partitions are equal exactly when they group vertices the same way.
    """

    community_of: tuple[int, ...]

    def __post_init__(self) -> None:
        canon = _canonical_labels(self.community_of)
        if canon != self.community_of:
            object.__setattr__(self, "community_of", canon)

    @property
    def n(self) -> int:
        return len(self.community_of)

    @property
    def communities(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.community_count)]
        for v, c in enumerate(self.community_of):
            groups[c].append(v)
        return groups

    @property
    def community_count(self) -> int:
        return max(self.community_of, default=-1) + 1

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        comms = [list(c) for c in communities]
        total = sum(len(c) for c in comms)
        n = total if n is None else n
        labels = [-1] * n
        for i, comm in enumerate(comms):
            if not comm:
                continue
            for v in comm:
                if not 0 <= v < n:
                    raise ValueError(f"vertex {v} outside 0..{n - 1}")
                if labels[v] != -1:
                    raise ValueError(f"vertex {v} belongs to two communities")
                labels[v] = i
        missing = [v for v, lab in enumerate(labels) if lab == -1]
        if missing:
            raise ValueError(f"vertices {missing[:5]} are not covered by any community")
        return cls(tuple(labels))

    def refines(self, other: "Partition") -> bool:
        """True when every community of ``self`` sits inside one of ``other``."""
        if self.n != other.n:
            return False
        image: dict[int, int] = {}
        for a, b in zip(self.community_of, other.community_of):
            if image.setdefault(a, b) != b:
                return False
        return True


def _canonical_labels(labels: Sequence[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(lab, len(relabel)) for lab in labels)


def partition_from_assignment(labels: Sequence[int], n: int | None = None) -> Partition:
    if n is not None and len(labels) != n:
        raise ValueError(f"got {len(labels)} labels for {n} vertices")
    return Partition(tuple(int(x) for x in labels))


def load_partition(text: str, n: int | None = None) -> Partition:
    """Parse ``vertex community_id`` lines; every vertex must appear once."""
    assignment: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2 or not tokens[0].isdigit():
            raise ParseError(f"line {lineno}: expected 'vertex community_id', got {raw.strip()!r}")
        v = int(tokens[0])
        if v in assignment:
            raise ParseError(f"line {lineno}: vertex {v} listed twice")
        assignment[v] = tokens[1]
    size = max(assignment, default=-1) + 1 if n is None else n
    missing = [v for v in range(size) if v not in assignment]
    if missing or len(assignment) != size:
        raise ParseError(f"partition does not cover vertices 0..{size - 1} exactly (missing {missing[:5]})")
    return Partition(tuple(_canonical_labels([assignment[v] for v in range(size)])))


def dump_partition(p: Partition) -> str:
    return "".join(f"{v} {c}\n" for v, c in enumerate(p.community_of))


@dataclass(frozen=True, eq=False)
class SimilarityData:
    """Pairwise dissimilarities between vertices.

    Either Euclidean coordinates (``coords``, shape ``(n, d)``) or an explicit
    symmetric distance matrix. Only squared distances are ever consumed, so the
    explicit matrix is stored squared.
    """

    n: int
    coords: np.ndarray | None = None
    sq_distances: np.ndarray | None = field(default=None, repr=False)

    @property
    def euclidean(self) -> bool:
        return self.coords is not None

    @classmethod
    def from_coordinates(cls, coords) -> "SimilarityData":
        x = np.array(coords, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ValueError("coordinates must be a (n, d) array")
        if not np.all(np.isfinite(x)):
            raise ValueError("coordinates must be finite")
        x.setflags(write=False)
        return cls(x.shape[0], coords=x)

    @classmethod
    def from_distances(cls, dist) -> "SimilarityData":
        d = np.array(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite and non-negative")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        sq = d * d
        sq.setflags(write=False)
        return cls(d.shape[0], sq_distances=sq)

    def sq_distance(self, i: int, j: int) -> float:
        if self.coords is not None:
            diff = self.coords[i] - self.coords[j]
            return float(diff @ diff)
        return float(self.sq_distances[i, j])

    def distance(self, i: int, j: int) -> float:
        return float(np.sqrt(self.sq_distance(i, j)))

    def sq_distance_matrix(self) -> np.ndarray:
        if self.sq_distances is not None:
            return self.sq_distances
        x = self.coords
        g = x @ x.T
        sq = np.diag(g)[:, None] + np.diag(g)[None, :] - 2 * g
        np.maximum(sq, 0.0, out=sq)
        np.fill_diagonal(sq, 0.0)
        return sq


def load_embedding(text: str, n: int | None = None) -> SimilarityData:
    """Parse ``vertex x1 ... xd`` lines into Euclidean similarity data."""
    rows: dict[int, list[float]] = {}
    dim: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            v = int(tokens[0])
            vec = [float(t) for t in tokens[1:]]
        except ValueError:
            raise ParseError(f"line {lineno}: expected 'vertex x1 ... xd', got {raw.strip()!r}") from None
        if v < 0 or not vec:
            raise ParseError(f"line {lineno}: expected 'vertex x1 ... xd', got {raw.strip()!r}")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ParseError(f"line {lineno}: dimension {len(vec)} differs from {dim}")
        if v in rows:
            raise ParseError(f"line {lineno}: vertex {v} listed twice")
        rows[v] = vec
    size = max(rows, default=-1) + 1 if n is None else n
    missing = [v for v in range(size) if v not in rows]
    if missing or len(rows) != size:
        raise ParseError(f"embedding does not cover vertices 0..{size - 1} exactly (missing {missing[:5]})")
    return SimilarityData.from_coordinates([rows[v] for v in range(size)])


def dump_embedding(s: SimilarityData) -> str:
    if s.coords is None:
        raise ValueError("only Euclidean similarity data has an embedding")
    return "".join(f"{v} " + " ".join(repr(float(x)) for x in row) + "\n" for v, row in enumerate(s.coords))


def load_distances(text: str) -> SimilarityData:
    """Parse an ``n`` header line followed by ``n`` rows of ``n`` reals."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].isdigit():
        raise ParseError("line 1: distance file must start with the vertex count")
    n = int(lines[0])
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            row = [float(t) for t in ln.split()]
        except ValueError:
            raise ParseError(f"row {i - 1}: non-numeric entry") from None
        if len(row) != n:
            raise ParseError(f"row {i - 1}: expected {n} entries, found {len(row)}")
        rows.append(row)
    try:
        return SimilarityData.from_distances(rows)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def dump_distances(s: SimilarityData) -> str:
    d = np.sqrt(s.sq_distance_matrix())
    return f"{s.n}\n" + "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in d)
