"""Relevance of communities and of scale factors.

A community living on ``(a, b]`` gets the quadratic

    R_alpha(C) = (b - a)/2 + 2 (b - alpha)(alpha - a) / (b - a)

which is ``(b - a)/2`` at both ends and peaks at ``b - a`` on the midpoint
``(a + b)/2``. The global curve ``R(alpha)`` is the size-weighted average over
the communities of ``P_alpha``; it is a quadratic between consecutive
lifespan endpoints, so one sweep that adds a community's coefficients where it
appears and removes them where it disappears yields every piece.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .multiscale import Lifespan, ScaleProfile

log = logging.getLogger(__name__)


def community_relevance(lifespan: Lifespan | tuple[float, float], alpha: float) -> float:
    lo, hi = (lifespan.alpha_min, lifespan.alpha_max) if isinstance(lifespan, Lifespan) else lifespan
    w = hi - lo
    if w <= 0:
        return 0.0
    if not lo <= alpha <= hi:
        raise ValueError(f"alpha={alpha} outside the lifespan [{lo}, {hi}]")
    return w / 2 + 2 * (hi - alpha) * (alpha - lo) / w


def relevance_coefficients(lo: float, hi: float) -> tuple[float, float, float]:
    """``(A, B, C)`` with ``R_alpha = A alpha^2 + B alpha + C`` for the lifespan ``(lo, hi]``."""
    w = hi - lo
    return -2.0 / w, 2.0 * (lo + hi) / w, w / 2 - 2.0 * lo * hi / w


class _Acc:
    """Neumaier-compensated running sum; removals cancel additions to rounding level."""

    __slots__ = ("s", "c")

    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


@dataclass
class RelevanceCurve:
    """Piecewise-quadratic ``R(alpha)`` on the intervals of the event grid.

    ``pieces[i] = (lo, hi, A, B, C)``; interval ``i`` is ``(lo, hi]`` except the
    first, which also owns ``alpha = 0``. ``counts[i]`` is the number of
    communities of the partition on that interval.
    """

    n: int
    pieces: list[tuple[float, float, float, float, float]]
    counts: list[int]
    updates: int
    maxima: list[tuple[float, float, int]] = field(default_factory=list)

    def interval_index(self, alpha: float) -> int:
        for i, (lo, hi, *_) in enumerate(self.pieces):
            if alpha <= hi:
                return i
        raise ValueError(f"alpha={alpha} outside [0, 1]")

    def piece_value(self, i: int, alpha: float) -> float:
        _, _, A, B, C = self.pieces[i]
        return (A * alpha + B) * alpha + C

    def __call__(self, alpha: float) -> float:
        return self.piece_value(self.interval_index(alpha), alpha)

    def representative_alpha(self, i: int) -> float:
        lo, hi = self.pieces[i][:2]
        return hi if lo == 0.0 and hi == 0.0 else 0.5 * (lo + hi)

    def is_trivial(self, i: int) -> bool:
        return self.counts[i] in (1, self.n)


def relevance_curve(profile: ScaleProfile | Sequence[Lifespan], n: int | None = None) -> RelevanceCurve:
    """Sweep the lifespan endpoints once, updating the quadratic coefficients."""
    if isinstance(profile, ScaleProfile):
        spans = profile.lifespans()
        n = profile.n
    else:
        spans = list(profile)
        if n is None:
            raise ValueError("n is required when passing lifespans directly")
    appear: dict[float, list[tuple[float, float, float]]] = defaultdict(list)
    vanish: dict[float, list[tuple[float, float, float]]] = defaultdict(list)
    skipped = 0
    for sp in spans:
        if sp.width <= 0:
            skipped += 1
            continue
        w = sp.size / n
        A, B, C = relevance_coefficients(sp.alpha_min, sp.alpha_max)
        appear[sp.alpha_min].append((A * w, B * w, C * w))
        vanish[sp.alpha_max].append((-A * w, -B * w, -C * w))
    if skipped:
        log.debug("%d zero-width lifespan(s) excluded from relevance", skipped)
    grid = sorted({0.0, 1.0, *appear, *vanish})
    acc = [_Acc(), _Acc(), _Acc()]
    active = 0
    updates = 0
    pieces = []
    counts = []
    for lo, hi in zip(grid, grid[1:]):
        gone = vanish.get(lo, ())
        new = appear.get(lo, ())
        for coefs in (*gone, *new):
            for a, x in zip(acc, coefs):
                a.add(x)
        active += len(new) - len(gone)
        updates += len(new) + len(gone)
        pieces.append((lo, hi, acc[0].value, acc[1].value, acc[2].value))
        counts.append(active)
    curve = RelevanceCurve(n, pieces, counts, updates)
    curve.maxima = _local_maxima(curve)
    return curve


def _local_maxima(curve: RelevanceCurve) -> list[tuple[float, float, int]]:
    """Local maxima ``(alpha, R, interval)`` sorted by decreasing ``R``.

    Candidates are interior vertices of concave pieces and interval ends that
    beat the one-sided limit of the neighbouring piece.
    """
    found = []
    k = len(curve.pieces)
    for i, (lo, hi, A, B, C) in enumerate(curve.pieces):
        if hi <= lo:
            continue
        if A < 0:
            v = -B / (2 * A)
            if lo < v < hi:
                found.append((v, curve.piece_value(i, v), i))
        at_hi = curve.piece_value(i, hi)
        if 2 * A * hi + B >= 0 and (i == k - 1 or at_hi >= curve.piece_value(i + 1, hi)):
            found.append((hi, at_hi, i))
        at_lo = curve.piece_value(i, lo)
        if 2 * A * lo + B <= 0 and (i == 0 or at_lo > curve.piece_value(i - 1, lo)):
            found.append((lo, at_lo, i))
    found.sort(key=lambda r: (-r[1], r[0]))
    return found


def relevant_scales(curve: RelevanceCurve, k: int = 1, include_trivial: bool = False) -> list[tuple[float, int]]:
    """The ``k`` highest local maxima of ``R`` as ``(alpha, interval index)``.

    Intervals whose partition is all singletons or the single block ``{V}``
    are skipped unless ``include_trivial`` is set.
    """
    if k <= 0:
        return []
    out: list[tuple[float, int]] = []
    seen: set[int] = set()
    for alpha, _, i in curve.maxima:
        if i in seen or (not include_trivial and curve.is_trivial(i)):
            continue
        seen.add(i)
        out.append((alpha, i))
        if len(out) == k:
            break
    return out


def direct_relevance(spans: Iterable[Lifespan], n: int, alpha: float) -> float:
    """``(1/n) sum |C| R_alpha(C)`` over the lifespans covering ``alpha``."""
    return sum(sp.size * community_relevance(sp, alpha) for sp in spans if sp.width > 0 and sp.covers(alpha)) / n
