"""Shared fixtures data and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from denscale.dendrogram import Dendrogram, enumerate_partitions, load_dendrogram, random_dendrogram
from denscale.graph import Graph, SimilarityData, load_graph
from denscale.quality import ModularityModel, PerformanceModel, SimilarityModel

#: PASS/FAIL lines from the acceptance tests, printed at the end of the run
RESULTS: list[str] = []

BARBELL6 = "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3\n"
GOOD_TREE = "n 6\n6 0 1\n7 6 2\n8 3 4\n9 8 5\n10 7 9\n"
BAD_TREE = "n 6\n6 2 3\n7 0 1\n8 4 5\n9 6 7\n10 8 9\n"


def barbell() -> Graph:
    return load_graph(BARBELL6)


def good_tree(g: Graph | None = None) -> Dendrogram:
    return load_dendrogram(GOOD_TREE, g)


def bad_tree(g: Graph | None = None) -> Dendrogram:
    return load_dendrogram(BAD_TREE, g)


def random_graph(rng: np.random.Generator, n: int) -> Graph:
    p = rng.uniform(0.2, 0.7)
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    return Graph.from_edges(n, edges)


def random_instance(rng: np.random.Generator, max_n: int = 12):
    """(graph, dendrogram, {family: model}) with 2..max_n vertices."""
    n = int(rng.integers(2, max_n + 1))
    g = random_graph(rng, n)
    d = random_dendrogram(n, rng, max_arity=int(rng.integers(2, 4)))
    coords = rng.normal(size=(n, 2))
    models = {
        "modularity": ModularityModel(g),
        "performance": PerformanceModel(g),
        "similarity": SimilarityModel(SimilarityData.from_coordinates(coords)),
    }
    return g, d, models


def cut_terms(d: Dendrogram, model) -> list[tuple[tuple[int, ...], float, float]]:
    """Every cut with its (H, L) totals, each community evaluated on its vertex set."""
    out = []
    for cut in enumerate_partitions(d):
        hs, ls = zip(*(model.terms(d.members(v).tolist()) for v in cut))
        out.append((cut, float(sum(hs)), float(sum(ls))))
    return out


def brute_best(d: Dendrogram, model, alpha: float | None = None) -> float:
    if alpha is None:
        return max(h + l for _, h, l in cut_terms(d, model))
    return max(alpha * h + (1 - alpha) * l for _, h, l in cut_terms(d, model))
