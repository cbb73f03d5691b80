"""Continuous piecewise-affine functions on [0, 1].

A function is stored by its particular points: strictly increasing breakpoints
``xs`` with ``xs[0] == 0`` and ``xs[-1] == 1`` and the values ``ys`` there.
Everything is plain Python floats; the envelopes built here are small and
numerous, so per-call numpy overhead would dominate.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

#: a breakpoint within this distance of the chord through its neighbours is dropped
EPS_COLLINEAR = 1e-12
#: crossings this close to an existing breakpoint are snapped onto it
EPS_SNAP = 1e-12
#: continuity tolerance when building from segments
EPS_CONTINUITY = 1e-9


@dataclass(frozen=True)
class PiecewiseAffine:
    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("need matching breakpoints and values, at least two")
        if self.xs[0] != 0.0 or self.xs[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def line(cls, at0: float, at1: float) -> "PiecewiseAffine":
        return cls._trusted((0.0, 1.0), (float(at0), float(at1)))

    @classmethod
    def _trusted(cls, xs: tuple[float, ...], ys: tuple[float, ...]) -> "PiecewiseAffine":
        # skips validation; for breakpoints produced by this module's own walks
        obj = object.__new__(cls)
        object.__setattr__(obj, "xs", xs)
        object.__setattr__(obj, "ys", ys)
        return obj

    @classmethod
    def from_segments(cls, segments: Iterable[tuple[float, float, float, float]]) -> "PiecewiseAffine":
        """Build from ``(lo, hi, slope, intercept)`` rows covering [0, 1] in order."""
        xs: list[float] = []
        ys: list[float] = []
        prev_hi = None
        for lo, hi, slope, icpt in segments:
            start = slope * lo + icpt
            if prev_hi is None:
                if lo != 0.0:
                    raise ValueError("first segment must start at 0")
                xs.append(0.0)
                ys.append(start)
            else:
                if lo != prev_hi:
                    raise ValueError(f"segments leave a gap at {prev_hi}")
                if abs(start - ys[-1]) > EPS_CONTINUITY:
                    raise ValueError(f"discontinuity of {abs(start - ys[-1]):.3g} at alpha={lo}")
            xs.append(hi)
            ys.append(slope * hi + icpt)
            prev_hi = hi
        if prev_hi != 1.0:
            raise ValueError("last segment must end at 1")
        return cls(*_simplify(xs, ys))

    def __call__(self, alpha: float) -> float:
        xs, ys = self.xs, self.ys
        i = min(max(bisect_right(xs, alpha) - 1, 0), len(xs) - 2)
        x0, x1 = xs[i], xs[i + 1]
        return ys[i] + (ys[i + 1] - ys[i]) * (alpha - x0) / (x1 - x0)

    def __len__(self) -> int:
        return len(self.xs) - 1

    @property
    def slopes(self) -> list[float]:
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]

    def segments(self) -> list[tuple[float, float, float, float]]:
        rows = []
        for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:]):
            slope = (y1 - y0) / (x1 - x0)
            rows.append((x0, x1, slope, y0 - slope * x0))
        return rows

    def is_convex(self, tol: float = 1e-9) -> bool:
        """Nondecreasing slopes, tested as "no breakpoint above its neighbours' chord"."""
        xs, ys = self.xs, self.ys
        return all(y <= y0 + (y1 - y0) * (x - x0) / (x1 - x0) + tol
                   for x0, x, x1, y0, y, y1 in zip(xs, xs[1:], xs[2:], ys, ys[1:], ys[2:]))


def _values_at(f: PiecewiseAffine, points: Sequence[float]) -> list[float]:
    """Evaluate ``f`` at sorted points with one linear walk."""
    xs, ys = f.xs, f.ys
    out = []
    i = 0
    last = len(xs) - 2
    for x in points:
        while i < last and xs[i + 1] < x:
            i += 1
        x0, x1 = xs[i], xs[i + 1]
        if x == x1:
            out.append(ys[i + 1])
        elif x == x0:
            out.append(ys[i])
        else:
            out.append(ys[i] + (ys[i + 1] - ys[i]) * (x - x0) / (x1 - x0))
    return out


def _merged_breakpoints(fs: Sequence[PiecewiseAffine]) -> list[float]:
    if len(fs) == 1:
        return list(fs[0].xs)
    pts = sorted(set().union(*(f.xs for f in fs)))
    out = [pts[0]]
    for x in pts[1:]:
        if x - out[-1] > EPS_SNAP:
            out.append(x)
        elif x == 1.0:
            out[-1] = 1.0
    return out


def _simplify(xs: list[float], ys: list[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Drop interior breakpoints joining segments of equal slope."""
    if len(xs) <= 2:
        return tuple(xs), tuple(ys)
    eps = EPS_COLLINEAR
    kx, ky = [xs[0]], [ys[0]]
    px, py = xs[0], ys[0]
    for x, y, nx, ny in zip(xs[1:-1], ys[1:-1], xs[2:], ys[2:]):
        # distance to the chord, not a slope difference: slopes over tiny
        # segments carry large rounding errors
        if abs(y - py - (ny - py) * (x - px) / (nx - px)) > eps:
            kx.append(x)
            ky.append(y)
            px, py = x, y
    kx.append(xs[-1])
    ky.append(ys[-1])
    return tuple(kx), tuple(ky)


def _sum2(f: PiecewiseAffine, g: PiecewiseAffine) -> tuple[list[float], list[float]]:
    """Merge walk over both breakpoint lists; near-coincident points are snapped."""
    fx, fy, gx, gy = f.xs, f.ys, g.xs, g.ys
    xs = [0.0]
    ys = [fy[0] + gy[0]]
    i = j = 1
    nf, ng = len(fx), len(gx)
    while i < nf and j < ng:
        a, b = fx[i], gx[j]
        if abs(a - b) <= EPS_SNAP:
            x = 1.0 if a == 1.0 or b == 1.0 else a
            y = fy[i] + gy[j]
            i += 1
            j += 1
        elif a < b:
            x = a
            y = fy[i] + gy[j - 1] + (gy[j] - gy[j - 1]) * (a - gx[j - 1]) / (b - gx[j - 1])
            i += 1
        else:
            x = b
            y = gy[j] + fy[i - 1] + (fy[i] - fy[i - 1]) * (b - fx[i - 1]) / (a - fx[i - 1])
            j += 1
        if x - xs[-1] > EPS_SNAP:
            xs.append(x)
            ys.append(y)
        elif x == 1.0:
            xs[-1], ys[-1] = x, y
    return xs, ys


def pw_sum(fs: Sequence[PiecewiseAffine]) -> PiecewiseAffine:
    """Pointwise sum; breakpoints are the merged union, collinear joints removed."""
    if not fs:
        return PiecewiseAffine.line(0.0, 0.0)
    if len(fs) == 1:
        return fs[0]
    acc = fs[0]
    for f in fs[1:]:
        acc = PiecewiseAffine._trusted(*_simplify(*_sum2(acc, f)))
    return acc


def pw_max(f: PiecewiseAffine, g: PiecewiseAffine) -> PiecewiseAffine:
    """Pointwise maximum, with every crossing inserted as a breakpoint."""
    xs, ys, _ = _max_points(f, g)
    return PiecewiseAffine._trusted(*_simplify(xs, ys))


def _max_points(f: PiecewiseAffine, g: PiecewiseAffine) -> tuple[list[float], list[float], list[bool]]:
    """Breakpoints and values of ``max(f, g)`` plus, per segment, whether ``g`` is strictly above."""
    base = _merged_breakpoints([f, g])
    fv = _values_at(f, base)
    gv = _values_at(g, base)
    xs, ys, g_wins = [base[0]], [max(fv[0], gv[0])], []
    for i in range(len(base) - 1):
        x0, x1 = base[i], base[i + 1]
        d0, d1 = gv[i] - fv[i], gv[i + 1] - fv[i + 1]
        if (d0 < 0 < d1) or (d1 < 0 < d0):
            xc = x0 + (x1 - x0) * d0 / (d0 - d1)
            if xc - x0 > EPS_SNAP and x1 - xc > EPS_SNAP:
                yc = fv[i] + (fv[i + 1] - fv[i]) * (xc - x0) / (x1 - x0)
                xs.append(xc)
                ys.append(yc)
                g_wins.append(d0 > 0)
                xs.append(x1)
                ys.append(max(fv[i + 1], gv[i + 1]))
                g_wins.append(d1 > 0)
                continue
        xs.append(x1)
        ys.append(max(fv[i + 1], gv[i + 1]))
        g_wins.append(d0 + d1 > 0 and d0 >= 0 and d1 >= 0)
    return xs, ys, g_wins
