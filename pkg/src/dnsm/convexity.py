"""Polytope regions, significance-based pruning and shape concavity measures.

A pixel belongs to polytope ``i`` when ``g_i >= 0.5`` and the pixel is part
of the input shape.  The significance of a polytope is

    C(i) = (R_unq(i) / R(i)) * (R(i) / R_largest) ** t

where ``R`` counts member pixels and ``R_unq`` those covered by no other
polytope.  The global concavity sums ``C`` over every polytope but the
largest.  Perimeter- and region-based concavities are provided as baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DnsmModel, ShapeRaster, polytope_memberships

DEFAULT_T = 0.25


@dataclass
class RegionStats:
    region_size: int
    unique_size: int
    significance: float | None = None

    def as_dict(self) -> dict:
        return {"region_size": self.region_size, "unique_size": self.unique_size,
                "significance": self.significance}


@dataclass(frozen=True)
class PruneParams:
    """Stopping rule for greedy pruning: exactly one of ``keep_k``/``min_c``."""

    keep_k: int | None = None
    min_c: float | None = None
    t_exponent: float = DEFAULT_T

    def __post_init__(self):
        if (self.keep_k is None) == (self.min_c is None):
            raise ValueError("give exactly one of keep_k or min_c")
        if self.keep_k is not None and self.keep_k < 1:
            raise ValueError("keep_k must be >= 1")
        if self.min_c is not None and not self.min_c > 0:
            raise ValueError("min_c must be positive")
        if not self.t_exponent > 0:
            raise ValueError("t_exponent must be positive")


@dataclass
class ConvexityReport:
    dnsm_concavity: float
    pb_concavity: float
    rb_concavity: float
    per_polytope: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"dnsm_concavity": self.dnsm_concavity,
                "pb_concavity": self.pb_concavity,
                "rb_concavity": self.rb_concavity,
                "per_polytope": [dict(index=i, **s.as_dict())
                                 for i, s in enumerate(self.per_polytope)]}


def membership_masks(m: DnsmModel, shape: ShapeRaster) -> np.ndarray:
    """Boolean ``(N, H*W)`` array: pixel in polytope and in the shape."""
    g = polytope_memberships(m, shape.pixel_points())
    return (g >= 0.5) & shape.values.ravel()


def _stats_from_masks(masks: np.ndarray) -> list:
    cover = masks.sum(axis=0)
    region = masks.sum(axis=1)
    unique = (masks & (cover == 1)).sum(axis=1)
    return [RegionStats(int(r), int(u)) for r, u in zip(region, unique)]


def compute_regions(m: DnsmModel, shape: ShapeRaster) -> list:
    return _stats_from_masks(membership_masks(m, shape))


def significance(stats, t: float = DEFAULT_T) -> list:
    """Fill in ``C(i)``; polytopes with an empty region get 0."""
    largest = max((s.region_size for s in stats), default=0)
    if largest == 0:
        raise ValueError("no polytope covers any shape pixel")
    out = []
    for s in stats:
        if s.region_size == 0:
            c = 0.0
        else:
            c = (s.unique_size / s.region_size) * (s.region_size / largest) ** t
        out.append(RegionStats(s.region_size, s.unique_size, c))
    return out


def largest_index(stats) -> int:
    """Index of the largest region; ties go to the lower index."""
    return int(np.argmax([s.region_size for s in stats]))


def global_concavity(stats) -> float:
    if not stats:
        return 0.0
    k = largest_index(stats)
    return float(sum(s.significance for i, s in enumerate(stats) if i != k))


def prune(m: DnsmModel, shape: ShapeRaster, p: PruneParams):
    """Greedily drop the least significant polytope until ``p`` is satisfied.

    Regions and significances are recomputed over the survivors after every
    single removal.  Returns ``(model, removed, stats)`` where ``removed``
    lists original polytope indices in removal order and ``stats`` describes
    the survivors.
    """
    n = m.n_polytopes
    if p.keep_k is not None and p.keep_k > n:
        raise ValueError(f"keep_k={p.keep_k} exceeds the {n} available polytopes")
    masks = membership_masks(m, shape)
    alive = list(range(n))
    removed = []
    while True:
        stats = significance(_stats_from_masks(masks[alive]), p.t_exponent)
        c = np.array([s.significance for s in stats])
        if p.keep_k is not None:
            if len(alive) <= p.keep_k:
                break
        elif c.min() >= p.min_c or len(alive) == 1:
            break
        victim = int(np.argmin(c))
        removed.append(alive.pop(victim))
    return m.subset(alive), removed, stats


# --- geometry ---------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list:
    """Counterclockwise hull vertices (monotone chain), collinear points dropped.

    Collinear input yields its two extreme points; a single distinct point
    yields itself.
    """
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_perimeter(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        return 0.0
    if len(v) == 2:
        return 2.0 * float(np.hypot(*(v[1] - v[0])))
    return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))


def hull_mask(mask: np.ndarray) -> np.ndarray:
    """Pixels whose centers lie inside or on the hull of the mask's pixel centers."""
    rows, cols = np.nonzero(mask)
    hull = convex_hull(zip(cols.tolist(), rows.tolist()))
    out = np.zeros(mask.shape, dtype=bool)
    if len(hull) < 3:
        out[rows, cols] = True
        if len(hull) == 2:
            (x0, y0), (x1, y1) = hull
            n = max(abs(x1 - x0), abs(y1 - y0))
            t = np.linspace(0.0, 1.0, n + 1)
            out[np.rint(y0 + t * (y1 - y0)).astype(int),
                np.rint(x0 + t * (x1 - x0)).astype(int)] = True
        return out
    yy, xx = np.mgrid[rows.min():rows.max() + 1, cols.min():cols.max() + 1]
    inside = np.ones(yy.shape, dtype=bool)
    for a, b in zip(hull, hull[1:] + hull[:1]):
        inside &= (b[0] - a[0]) * (yy - a[1]) - (b[1] - a[1]) * (xx - a[0]) >= 0
    out[rows.min():rows.max() + 1, cols.min():cols.max() + 1] = inside
    return out


def crack_perimeter(mask: np.ndarray) -> int:
    """Number of pixel edges separating foreground from background."""
    padded = np.pad(np.asarray(mask, dtype=bool), 1)
    return int(np.count_nonzero(padded[1:, :] != padded[:-1, :])
               + np.count_nonzero(padded[:, 1:] != padded[:, :-1]))


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    padded = np.pad(np.asarray(mask, dtype=bool), 1)
    core = padded[1:-1, 1:-1]
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return core & ~interior


def baseline_concavities(shape) -> tuple:
    """Perimeter- and region-based concavities ``(pb, rb)``.

    The shape's perimeter is its crack length and its area its pixel count.
    The hull is taken over the corners of the boundary pixels, so a filled
    rectangle is its own hull and both measures vanish on it.
    """
    mask = shape.values if isinstance(shape, ShapeRaster) else np.asarray(shape, bool)
    rows, cols = np.nonzero(boundary_pixels(mask))
    corners = set()
    for dr in (0, 1):
        for dc in (0, 1):
            corners.update(zip((cols + dc).tolist(), (rows + dr).tolist()))
    hull = convex_hull(corners)
    area = float(np.count_nonzero(mask))
    rb = 1.0 - area / polygon_area(hull)
    pb = 1.0 - polygon_perimeter(hull) / crack_perimeter(mask)
    return max(pb, 0.0), max(rb, 0.0)


def convexity_report(m: DnsmModel, shape: ShapeRaster, t: float = DEFAULT_T,
                     stats=None) -> ConvexityReport:
    """Global DNSM concavity of ``m`` together with the PB/RB baselines."""
    if stats is None:
        stats = significance(compute_regions(m, shape), t)
    pb, rb = baseline_concavities(shape)
    return ConvexityReport(global_concavity(stats), pb, rb, list(stats))


def dice(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    denom = a.sum() + b.sum()
    return 1.0 if denom == 0 else float(2.0 * np.count_nonzero(a & b) / denom)
