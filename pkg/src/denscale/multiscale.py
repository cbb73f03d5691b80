"""Optimal partitions for every scale factor at once.

For ``q_alpha = alpha*h + (1-alpha)*l`` the best value over the cuts of a
subtree is a convex piecewise-affine function of alpha. Going up the
dendrogram, a node's function is ``max(own line, sum of children functions)``;
because the difference between the two is concave, the node keeps itself on a
single interval ``(t, 1]`` and splits below ``t``. The thresholds ``t`` are all
that is needed to recover lifespans, the partitions ``P_alpha`` and the
reordered dendrogram.

Interval convention: community ``C`` belongs to ``P_alpha`` for
``alpha_min(C) < alpha <= alpha_max(C)``. At an exact breakpoint the finer
partition wins, matching the strict keep-self test of the fixed-alpha search.
Leaves also own ``alpha = 0`` and the root is forced at ``alpha = 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .dendrogram import Dendrogram
from .graph import Partition
from .optimize import TIE_TOL, as_terms
from .piecewise import EPS_SNAP, PiecewiseAffine, _max_points, _simplify, pw_max, pw_sum
from .quality import NodeTerms, QualityModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Lifespan:
    node: int
    alpha_min: float
    alpha_max: float
    size: int

    @property
    def width(self) -> float:
        return self.alpha_max - self.alpha_min

    def covers(self, alpha: float) -> bool:
        return self.alpha_min < alpha <= self.alpha_max or (alpha == 0.0 == self.alpha_min < self.alpha_max)


@dataclass
class ScaleProfile:
    dendrogram: Dendrogram
    envelope: PiecewiseAffine
    thresholds: list[float]
    alpha_max: list[float]
    evaluations: int = 0
    path_work: int = 0
    irregular: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.dendrogram.n

    def selected(self, node: int) -> bool:
        return node == self.dendrogram.root or self.thresholds[node] < self.alpha_max[node]

    def lifespans(self) -> list[Lifespan]:
        return lifespans(self)

    def breakpoints(self) -> list[float]:
        """Scale factors where ``P_alpha`` changes, with 0 and 1 added."""
        pts = {0.0, 1.0}
        for node in range(self.dendrogram.node_count):
            if self.thresholds[node] < self.alpha_max[node]:
                pts.add(self.thresholds[node])
                pts.add(self.alpha_max[node])
        return sorted(pts)

    def intervals(self) -> list[tuple[float, float]]:
        b = self.breakpoints()
        return list(zip(b, b[1:]))

    def cut_at(self, alpha: float) -> list[int]:
        d = self.dendrogram
        if alpha >= 1.0:
            return [d.root]
        out = []
        stack = [d.root]
        t = self.thresholds
        while stack:
            node = stack.pop()
            if node < d.n or t[node] < alpha:
                out.append(node)
            else:
                stack.extend(d.children[node])
        return sorted(out)

    def partition_at(self, alpha: float) -> Partition:
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"scale factor {alpha} outside [0, 1]")
        return self.dendrogram.cut_partition(self.cut_at(alpha))

    def partitions(self) -> list[tuple[float, float, list[int]]]:
        """Every distinct ``P_alpha`` as ``(lo, hi, cut nodes)``, ordered by alpha.

        Cost is ``O(n)`` per interval, so this is meant for inspection and
        moderate sizes.
        """
        rows = []
        for lo, hi in self.intervals():
            rows.append((lo, hi, self.cut_at(hi if lo == 0.0 else 0.5 * (lo + hi))))
        return rows

    def split_events(self) -> list[tuple[float, int]]:
        """``(alpha, node)`` for every selected internal node, by increasing alpha.

        Below ``alpha`` the node is replaced by finer communities.
        """
        d = self.dendrogram
        ev = [(self.thresholds[v], v) for v in range(d.n, d.node_count)
              if self.thresholds[v] < self.alpha_max[v]]
        return sorted(ev)

    def split_alpha(self, node: int) -> float:
        """Scale at which the node stops being a single block of ``P_alpha``."""
        return min(self.thresholds[node], self.alpha_max[node])

    def reordered(self) -> tuple[Dendrogram, dict[int, dict[str, str]]]:
        """Dendrogram renumbered so that merges follow their split scale.

        Returns the new dendrogram and per-node attributes (``split_alpha``,
        original id, whether the node is ever selected) for serialisation.
        """
        d = self.dendrogram
        internal = sorted(range(d.n, d.node_count), key=lambda v: (self.split_alpha(v), v))
        new_id = list(range(d.n)) + [0] * d.internal_count
        for i, v in enumerate(internal):
            new_id[v] = d.n + i
        children = [()] * d.n
        attrs: dict[int, dict[str, str]] = {}
        for i, v in enumerate(internal):
            children.append(tuple(new_id[c] for c in d.children[v]))
            attrs[d.n + i] = {
                "split_alpha": f"{self.split_alpha(v):.9g}",
                "orig": str(v),
                "selected": "1" if self.selected(v) else "0",
            }
        return Dendrogram(d.n, tuple(children), virtual_root=d.virtual_root), attrs


def _keep_or_split(S: PiecewiseAffine, at0: float, at1: float, tol: float) -> tuple[PiecewiseAffine, float, bool]:
    """``max(line, S)`` where the line is kept on ``(t, 1]``; returns envelope, ``t``, regularity flag."""
    xs, ys = S.xs, S.ys
    slope = at1 - at0
    diff = [at0 + slope * x - y for x, y in zip(xs, ys)]
    last = len(xs) - 1
    if diff[last] <= tol:
        if any(v > tol for v in diff):
            return pw_max(S, PiecewiseAffine.line(at0, at1)), 1.0, False
        return S, 1.0, True
    j = last
    while j >= 0 and diff[j] > tol:
        j -= 1
    if j < 0:
        return PiecewiseAffine.line(at0, at1), 0.0, True
    regular = not any(v > tol for v in diff[:j])
    if j > 0 and abs(diff[j]) <= tol and abs(diff[j - 1]) <= tol:
        log.debug("own line coincides with the split envelope on [%g, %g]; split preferred", xs[j - 1], xs[j])
    x0, x1 = xs[j], xs[j + 1]
    rise = diff[j + 1] - diff[j]
    # the envelope switches to the line where it crosses S; the node counts as
    # kept only where it wins by more than tol, the same test as the fixed-scale search
    t = x0 + (x1 - x0) * (-diff[j]) / rise if diff[j] < 0 else x0
    keep = x0 + (x1 - x0) * (tol - diff[j]) / rise
    if t - x0 <= EPS_SNAP:
        t = x0
    elif x1 - t <= EPS_SNAP:
        t = x1
    keep = min(max(keep, t), x1)
    if not regular:
        gx, gy, _ = _max_points(S, PiecewiseAffine.line(at0, at1))
        return PiecewiseAffine._trusted(*_simplify(gx, gy)), keep, False
    nx = list(xs[: j + 1])
    ny = list(ys[: j + 1])
    if t > x0:
        nx.append(t)
        ny.append(ys[j] + (ys[j + 1] - ys[j]) * (t - x0) / (x1 - x0))
    if t == 0.0:
        return PiecewiseAffine.line(at0, at1), keep, True
    if nx[-1] < 1.0:
        nx.append(1.0)
        ny.append(at1)
    # the kept prefix of S is already simplified; only the joints next to t can be collinear
    k = max(len(nx) - 4, 0)
    hx, hy = _simplify(nx[k:], ny[k:])
    return PiecewiseAffine._trusted(tuple(nx[:k]) + hx, tuple(ny[:k]) + hy), keep, True


def find_multiscale_partitions(d: Dendrogram, model: QualityModel | NodeTerms, tol: float = TIE_TOL) -> ScaleProfile:
    """Envelope of ``max_P Q_alpha(P)`` over all cuts, with per-node keep thresholds.

    One ``q_alpha`` line is requested per node; the piecewise work at a node is
    linear in the size of its children's envelopes.
    """
    terms = as_terms(d, model)
    before = terms.evaluations
    N = d.node_count
    env: list[PiecewiseAffine | None] = [None] * N
    t = [0.0] * N
    work = 0
    irregular: list[int] = []
    for node in range(N):
        at0, at1 = terms.line(node)
        kids = d.children[node]
        if not kids:
            env[node] = PiecewiseAffine.line(at0, at1)
            continue
        parts = [env[c] for c in kids]
        for c in kids:
            env[c] = None
        work += sum(len(p) for p in parts)
        S = pw_sum(parts)
        env[node], t[node], ok = _keep_or_split(S, at0, at1, tol)
        if not ok:
            irregular.append(node)
    if irregular:
        log.warning("%d node(s) keep themselves on a region not reaching alpha=1; "
                    "the quality is not multi-scale on this input (first: node %d)", len(irregular), irregular[0])
    amax = [1.0] * N
    for node in range(N - 1, d.n - 1, -1):
        cap = min(amax[node], t[node])
        for c in d.children[node]:
            amax[c] = cap
    return ScaleProfile(d, env[d.root], t, amax, terms.evaluations - before, work, irregular)


def lifespans(profile: ScaleProfile) -> list[Lifespan]:
    """One entry per community that appears in some ``P_alpha``; the root is always listed."""
    d = profile.dendrogram
    sizes = d.sizes()
    out = []
    for node in range(d.node_count):
        if profile.selected(node):
            lo = min(profile.thresholds[node], profile.alpha_max[node])
            out.append(Lifespan(node, lo, profile.alpha_max[node], int(sizes[node])))
    return out
