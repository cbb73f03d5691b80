"""Corrected Rand index and the method-comparison harness.

Methods, all applied to the same greedy dendrogram of each replicate:

====  ==========================================================
CM    best straight cut for modularity
BM    best cut over all dendrogram cuts for modularity
MM    multi-scale modularity at the most relevant scale(s)
BP    best cut for performance
MP    multi-scale performance at the most relevant scale(s)
BS    best cut for similarity (spectral embedding of the graph)
MS    multi-scale similarity at the most relevant scale(s)
====  ==========================================================
"""

from __future__ import annotations

import json
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .detect import greedy_agglomerate
from .graph import Partition
from .generators import (
    ConfigError,
    PlantedConfig,
    TwoScaleConfig,
    generate_planted,
    generate_two_scale,
    spectral_embedding,
)
from .multiscale import find_multiscale_partitions
from .optimize import best_straight_cut, find_best_partition
from .quality import ModularityModel, NodeTerms, PerformanceModel, SimilarityModel, d_out_for_modularity
from .relevance import relevance_curve, relevant_scales

METHODS = ("CM", "BM", "MM", "BP", "MP", "BS", "MS")
_FAMILY = {"C": "modularity", "M": "modularity", "P": "performance", "S": "similarity"}


def _labels(p: Partition | Sequence[int]) -> np.ndarray:
    if isinstance(p, Partition):
        return np.asarray(p.community_of)
    return np.unique(np.asarray(p), return_inverse=True)[1]


def corrected_rand(p1: Partition | Sequence[int], p2: Partition | Sequence[int]) -> float:
    """Hubert-Arabie adjusted Rand index from the contingency table.

    Evaluated as one ratio of exact integers, so the result is symmetric and
    exact up to the final division. When the correction is undefined (both
    partitions trivial) the result is 1 for equal partitions and 0 otherwise.
    """
    a, b = _labels(p1), _labels(p2)
    if a.shape != b.shape:
        raise ValueError("partitions cover different vertex counts")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two vertices")
    ka, kb = a.max() + 1, b.max() + 1
    table = np.bincount(a * kb + b, minlength=ka * kb)

    def pairs(counts: np.ndarray) -> int:
        return sum(int(x) * (int(x) - 1) // 2 for x in counts if x > 1)

    index = pairs(table)
    sum_a = pairs(np.bincount(a))
    sum_b = pairs(np.bincount(b))
    total = n * (n - 1) // 2
    num = 2 * (index * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        return 1.0 if Partition(tuple(a.tolist())) == Partition(tuple(b.tolist())) else 0.0
    return num / den


@dataclass
class ExperimentSpec:
    generator: str = "planted"
    n: int = 400
    c: int = 4
    d_in: float = 6.0
    d_out: float | None = None
    q_exp: float | None = None
    macro: int = 10
    micro: int = 10
    d_in_micro: float = 6.0
    d_in_macro: float = 3.0
    replicates: int = 20
    seed: int = 0
    methods: tuple[str, ...] = ("CM", "BM", "MM")
    scales: int = 1
    embedding_dim: int = 16

    def __post_init__(self) -> None:
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
        if self.generator not in ("planted", "two-scale"):
            raise ConfigError(f"unknown generator {self.generator!r}")
        if self.generator == "planted" and self.d_out is None and self.q_exp is None:
            raise ConfigError("planted generator needs d_out or q_exp")
        if self.generator == "two-scale" and self.d_out is None:
            raise ConfigError("two-scale generator needs d_out")
        if self.replicates < 1:
            raise ConfigError("replicates must be positive")

    @property
    def resolved_d_out(self) -> float:
        if self.d_out is not None:
            return self.d_out
        return d_out_for_modularity(self.d_in, self.q_exp, self.c)

    @classmethod
    def parse(cls, text: str) -> "ExperimentSpec":
        """Read ``key = value`` lines; ``methods`` is a comma separated list."""
        types = {f.name: f.type for f in fields(cls)}
        kw: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                if key == "methods":
                    kw[key] = tuple(m.strip().upper() for m in value.split(",") if m.strip())
                elif key == "generator":
                    kw[key] = value
                elif types[key] in ("int",):
                    kw[key] = int(value)
                else:
                    kw[key] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
        return cls(**kw)

    def dump(self) -> str:
        out = []
        for k, v in asdict(self).items():
            if v is None:
                continue
            out.append(f"{k} = {','.join(v) if k == 'methods' else v}")
        return "\n".join(out) + "\n"


@dataclass
class MethodResult:
    replicate: int
    method: str
    rank: int
    alpha: float | None
    communities: int
    modularity: float
    ari: dict[str, float]
    seconds: float = 0.0


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list[MethodResult]
    reference_modularity: dict[str, list[float]]
    dominance_violations: list[int] = field(default_factory=list)

    @property
    def references(self) -> list[str]:
        return list(self.reference_modularity)

    def mean_ari(self, method: str, reference: str | None = None, rank: int | None = None) -> float:
        return statistics.fmean(self._ari_values(method, reference, rank))

    def _ari_values(self, method: str, reference: str | None, rank: int | None) -> list[float]:
        ref = reference or self.references[0]
        vals = [r.ari[ref] for r in self.rows if r.method == method and (rank is None or r.rank == rank)]
        if not vals:
            raise KeyError(f"no rows for method {method}")
        return vals

    def summary(self) -> dict:
        out: dict = {"spec": asdict(self.spec), "replicates": self.spec.replicates, "methods": {}}
        out["spec"]["methods"] = list(self.spec.methods)
        out["reference_modularity"] = {k: _fmt(statistics.fmean(v)) for k, v in self.reference_modularity.items()}
        for method in self.spec.methods:
            rows = [r for r in self.rows if r.method == method]
            entry: dict = {
                "modularity_mean": _fmt(statistics.fmean(r.modularity for r in rows)),
                "communities_mean": _fmt(statistics.fmean(r.communities for r in rows)),
            }
            for ref in self.references:
                vals = [r.ari[ref] for r in rows]
                entry[f"ari_{ref}_mean"] = _fmt(statistics.fmean(vals))
                entry[f"ari_{ref}_std"] = _fmt(statistics.pstdev(vals))
            out["methods"][method] = entry
        out["dominance_BM_ge_CM"] = not self.dominance_violations
        return out

    def summary_text(self) -> str:
        s = self.summary()
        lines = [f"# {self.spec.generator} n={self.spec.n} replicates={self.spec.replicates} seed={self.spec.seed}"]
        for ref, q in s["reference_modularity"].items():
            lines.append(f"reference {ref}: Q^M = {q}")
        for method, entry in s["methods"].items():
            lines.append(method + ": " + " ".join(f"{k}={v}" for k, v in entry.items()))
        lines.append(f"BM >= CM on every replicate: {s['dominance_BM_ge_CM']}")
        return "\n".join(lines) + "\n"

    def csv(self, timing: bool = False) -> str:
        refs = self.references
        head = ["replicate", "method", "rank", "alpha", "communities", "modularity", *[f"ari_{r}" for r in refs]]
        if timing:
            head.append("seconds")
        lines = [",".join(head)]
        for r in self.rows:
            cells = [str(r.replicate), r.method, str(r.rank), "" if r.alpha is None else _fmt(r.alpha),
                     str(r.communities), _fmt(r.modularity), *[_fmt(r.ari[x]) for x in refs]]
            if timing:
                cells.append(f"{r.seconds:.6f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _replicate(spec: ExperimentSpec, r: int) -> tuple[list[MethodResult], dict[str, float], bool]:
    seed = spec.seed + r
    if spec.generator == "planted":
        g, ref = generate_planted(PlantedConfig(spec.n, spec.c, spec.d_in, spec.resolved_d_out, seed))
        refs = {"planted": ref}
    else:
        g, macro, micro = generate_two_scale(TwoScaleConfig(
            spec.n, spec.d_in_micro, spec.d_in_macro, spec.d_out, spec.macro, spec.micro, seed))
        refs = {"macro": macro, "micro": micro}
    if g.m == 0:
        raise ConfigError(f"replicate {r} produced a graph without edges")
    d = greedy_agglomerate(g).dendrogram
    mod = ModularityModel(g)
    terms: dict[str, NodeTerms] = {}

    def family_terms(family: str) -> NodeTerms:
        if family not in terms:
            if family == "modularity":
                model = mod
            elif family == "performance":
                model = PerformanceModel(g)
            else:
                model = SimilarityModel(spectral_embedding(g, spec.embedding_dim))
            terms[family] = model.node_terms(d)
        return terms[family]

    rows: list[MethodResult] = []
    values: dict[str, float] = {}

    def record(method: str, rank: int, alpha: float | None, part: Partition, seconds: float) -> None:
        rows.append(MethodResult(r, method, rank, alpha, part.community_count, mod.value(part),
                                 {k: corrected_rand(part, p) for k, p in refs.items()}, seconds))

    for method in spec.methods:
        tick = time.perf_counter()
        terms_f = family_terms(_FAMILY[method[1]])
        if method == "CM":
            res = best_straight_cut(d, terms_f)
            values[method] = res.value
            record(method, 1, None, res.partition, time.perf_counter() - tick)
        elif method[0] == "B":
            res = find_best_partition(d, terms_f)
            values[method] = res.value
            record(method, 1, None, res.partition, time.perf_counter() - tick)
        else:
            profile = find_multiscale_partitions(d, terms_f)
            curve = relevance_curve(profile)
            scales = relevant_scales(curve, spec.scales)
            if not scales:
                scales = relevant_scales(curve, spec.scales, include_trivial=True)
            elapsed = time.perf_counter() - tick
            for rank, (alpha, i) in enumerate(scales, start=1):
                part = profile.partition_at(curve.representative_alpha(i))
                record(method, rank, alpha, part, elapsed)
    ok = not ("BM" in values and "CM" in values and values["BM"] < values["CM"])
    ref_q = {k: mod.value(p) for k, p in refs.items()}
    return rows, ref_q, ok


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DENSCALE_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> ExperimentReport:
    """Run every replicate (seed ``spec.seed + r``) and aggregate in replicate order."""
    workers = _threads() if workers is None else workers
    idx = range(spec.replicates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, [spec] * spec.replicates, idx))
    else:
        results = [_replicate(spec, r) for r in idx]
    rows: list[MethodResult] = []
    ref_q: dict[str, list[float]] = {}
    violations = []
    for r, (rep_rows, rep_q, ok) in zip(idx, results):
        rows.extend(rep_rows)
        for k, v in rep_q.items():
            ref_q.setdefault(k, []).append(v)
        if not ok:
            violations.append(r)
    return ExperimentReport(spec, rows, ref_q, violations)

