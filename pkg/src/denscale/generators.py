"""Random graphs with planted community structure.

Randomness comes from numpy's PCG64 bit generator seeded with an integer, a
fixed algorithm whose streams are identical across platforms. Edges are drawn
block pair by block pair in a fixed order: a binomial edge count, then that
many distinct vertex pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graph import Graph, Partition, SimilarityData


class ConfigError(ValueError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class PlantedConfig:
    n: int
    c: int
    d_in: float
    d_out: float
    seed: int = 0

    @property
    def block_size(self) -> int:
        return self.n // self.c

    @property
    def p_in(self) -> float:
        s = self.block_size
        return self.d_in / (s - 1) if s > 1 else 0.0

    @property
    def p_out(self) -> float:
        rest = self.n - self.block_size
        return self.d_out / rest if rest > 0 else 0.0

    def validate(self) -> None:
        if self.c < 1 or self.n % self.c:
            raise ConfigError(f"c={self.c} must divide n={self.n}")
        if self.d_in < 0 or self.d_out < 0:
            raise ConfigError("average degrees must be non-negative")
        for name, p in (("p_in", self.p_in), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"derived {name}={p:.6g} is not a probability")


@dataclass(frozen=True)
class TwoScaleConfig:
    n: int
    d_in_micro: float
    d_in_macro: float
    d_out: float
    macro: int = 10
    micro: int = 10
    seed: int = 0

    @property
    def macro_size(self) -> int:
        return self.n // self.macro

    @property
    def micro_size(self) -> int:
        return self.n // (self.macro * self.micro)

    @property
    def p_micro(self) -> float:
        s = self.micro_size
        return self.d_in_micro / (s - 1) if s > 1 else 0.0

    @property
    def p_macro(self) -> float:
        rest = self.macro_size - self.micro_size
        return self.d_in_macro / rest if rest > 0 else 0.0

    @property
    def p_out(self) -> float:
        rest = self.n - self.macro_size
        return self.d_out / rest if rest > 0 else 0.0

    def validate(self) -> None:
        if self.macro < 1 or self.micro < 1 or self.n % (self.macro * self.micro):
            raise ConfigError(f"macro*micro={self.macro * self.micro} must divide n={self.n}")
        for name, p in (("p_micro", self.p_micro), ("p_macro", self.p_macro), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"derived {name}={p:.6g} is not a probability")


def _triangle_pair(k: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode row-major indices of the strict upper triangle of an ``s x s`` block."""
    # row i starts at offset i*(2s - i - 1)/2
    b = 2 * s - 1
    i = np.floor((b - np.sqrt(float(b) * b - 8.0 * k)) / 2).astype(np.int64)
    start = i * (2 * s - i - 1) // 2
    # guard the float estimate against off-by-one at row boundaries
    over = start > k
    i[over] -= 1
    start = i * (2 * s - i - 1) // 2
    under = k - start >= s - 1 - i
    i[under] += 1
    start = i * (2 * s - i - 1) // 2
    j = k - start + i + 1
    return i, j


def _sample_blocks(sizes: Sequence[int], prob: Callable[[int, int], float], rng: np.random.Generator) -> list[tuple[int, int]]:
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    edges: list[np.ndarray] = []
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            p = prob(a, b)
            total = sizes[a] * (sizes[a] - 1) // 2 if a == b else sizes[a] * sizes[b]
            if p <= 0 or total == 0:
                continue
            k = int(rng.binomial(total, p))
            if k == 0:
                continue
            idx = np.sort(rng.choice(total, size=k, replace=False))
            if a == b:
                i, j = _triangle_pair(idx, sizes[a])
            else:
                i, j = np.divmod(idx, sizes[b])
            edges.append(np.stack([i + offsets[a], j + offsets[b]], axis=1))
    if not edges:
        return []
    return [tuple(e) for e in np.concatenate(edges).tolist()]


def generate_planted(cfg: PlantedConfig) -> tuple[Graph, Partition]:
    cfg.validate()
    s = cfg.block_size
    rng = make_rng(cfg.seed)
    p_in, p_out = cfg.p_in, cfg.p_out
    edges = _sample_blocks([s] * cfg.c, lambda a, b: p_in if a == b else p_out, rng)
    ref = Partition(tuple(v // s for v in range(cfg.n)))
    return Graph.from_edges(cfg.n, edges), ref


def generate_two_scale(cfg: TwoScaleConfig) -> tuple[Graph, Partition, Partition]:
    """Graph plus its macro and micro reference partitions."""
    cfg.validate()
    s = cfg.micro_size
    per_macro = cfg.micro
    rng = make_rng(cfg.seed)
    p_micro, p_macro, p_out = cfg.p_micro, cfg.p_macro, cfg.p_out

    def prob(a: int, b: int) -> float:
        if a == b:
            return p_micro
        return p_macro if a // per_macro == b // per_macro else p_out

    edges = _sample_blocks([s] * (cfg.macro * cfg.micro), prob, rng)
    macro = Partition(tuple(v // cfg.macro_size for v in range(cfg.n)))
    micro = Partition(tuple(v // s for v in range(cfg.n)))
    return Graph.from_edges(cfg.n, edges), macro, micro


def spectral_embedding(g: Graph, dim: int = 16) -> SimilarityData:
    """Euclidean coordinates from the leading eigenvectors of the normalised adjacency.

    Row ``v`` is ``D^{-1/2} U_k Lambda_k`` at ``v`` (one step of a diffusion
    map); isolated vertices sit at the origin. Used to feed the similarity
    quality when no external embedding is supplied.
    """
    A = g.adjacency_matrix().astype(float)
    deg = A.sum(axis=1)
    inv_sqrt = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
    N = inv_sqrt[:, None] * A * inv_sqrt[None, :]
    vals, vecs = np.linalg.eigh(N)
    k = min(dim, g.n)
    order = np.argsort(-vals, kind="stable")[:k]
    U = vecs[:, order]
    # fix eigenvector signs so the output does not depend on LAPACK's choice
    signs = np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(k)])
    signs[signs == 0] = 1.0
    X = inv_sqrt[:, None] * (U * signs) * vals[order]
    return SimilarityData.from_coordinates(X)


def expected_edges(cfg: PlantedConfig) -> tuple[float, float]:
    """Mean and variance of the planted edge count (a sum of two binomials)."""
    s = cfg.block_size
    n_in = cfg.c * s * (s - 1) // 2
    n_out = cfg.n * (cfg.n - 1) // 2 - n_in
    mean = n_in * cfg.p_in + n_out * cfg.p_out
    var = n_in * cfg.p_in * (1 - cfg.p_in) + n_out * cfg.p_out * (1 - cfg.p_out)
    return mean, var

