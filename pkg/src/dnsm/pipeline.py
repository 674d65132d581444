"""Three-step convex decomposition: overlapping fit, pruning, separating fit."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging

import numpy as np

from .convexity import (PruneParams, ConvexityReport, convexity_report,
                        dice, hull_mask, prune)
from .model import (DEFAULT_RADIUS, DEFAULT_SLOPE, DEFAULT_SPACING, DnsmModel,
                    ModelConfig, ShapeRaster, init_polytopes,
                    polytope_memberships, union)
from .optimize import FitParams, OverlapSign, fit

log = logging.getLogger(__name__)

# Step 1 rewards overlap only on the shape and charges every polytope for
# the background it covers; without both, piled-up polytopes flood the image.
# Its eta is per polytope: it is divided by N - 1 before fitting, so the
# overlap reward a polytope can collect stays comparable to the containment
# charge however dense the initial grid is.
STEP1_DEFAULTS = FitParams(eta=0.3, overlap_sign=OverlapSign.MAXIMIZE,
                           overlap_domain="foreground", containment=1.0)
STEP3_DEFAULTS = FitParams(eta=1.0, overlap_sign=OverlapSign.PENALIZE)


@dataclass(frozen=True)
class PipelineParams:
    radius: float = DEFAULT_RADIUS
    spacing: float = DEFAULT_SPACING
    m_halfspaces: int = 16
    slope: float = DEFAULT_SLOPE
    step1: FitParams = STEP1_DEFAULTS
    prune: PruneParams = PruneParams(min_c=0.2)
    step3: FitParams = STEP3_DEFAULTS
    concavity_on: str = "step1"
    eta1_per_pair: bool = True

    def __post_init__(self):
        if self.step1.overlap_sign is not OverlapSign.MAXIMIZE:
            raise ValueError("step 1 must maximize overlap")
        if self.step3.overlap_sign is not OverlapSign.PENALIZE:
            raise ValueError("step 3 must penalize overlap")
        if self.concavity_on not in ("step1", "final"):
            raise ValueError("concavity_on must be 'step1' or 'final'")


@dataclass
class DecompositionResult:
    model: DnsmModel
    labels: np.ndarray
    connectivity: dict
    diagnostics: dict
    report: ConvexityReport | None = None
    removed: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)

    @property
    def n_parts(self) -> int:
        return self.model.n_polytopes


def label_map(m: DnsmModel, shape: ShapeRaster) -> np.ndarray:
    """Part index per pixel: ``1 + argmax_i g_i`` where ``f >= 0.5``, else 0."""
    g = polytope_memberships(m, shape.pixel_points())
    labels = np.argmax(g, axis=0) + 1
    labels[union(g) < 0.5] = 0
    return labels.reshape(shape.values.shape)


def connectivity(labels: np.ndarray) -> dict:
    """Adjacency of parts sharing a 4-neighbour pixel boundary."""
    labels = np.asarray(labels)
    parts = [int(v) for v in np.unique(labels) if v != 0]
    graph = {p: set() for p in parts}
    for a, b in ((labels[1:, :], labels[:-1, :]), (labels[:, 1:], labels[:, :-1])):
        touching = (a != b) & (a != 0) & (b != 0)
        for u, v in set(zip(a[touching].tolist(), b[touching].tolist())):
            graph[u].add(v)
            graph[v].add(u)
    return {p: sorted(nbrs) for p, nbrs in graph.items()}


def _dilate(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def part_hull_excess(labels: np.ndarray, part: int) -> float:
    """How far a labeled part is from convex.

    Counts pixels of the part's convex hull that stay outside the part even
    after growing it by one pixel (4-neighbourhood), relative to the part's
    size.  Rasterized convex parts score 0 or close to it.
    """
    mask = np.asarray(labels) == part
    size = np.count_nonzero(mask)
    if size == 0:
        raise ValueError(f"part {part} has no pixels")
    return np.count_nonzero(hull_mask(mask) & ~_dilate(mask)) / size


def diagnostics(m: DnsmModel, shape: ShapeRaster) -> dict:
    """Overlap, gap and Dice agreement of the model's hard foreground."""
    g = polytope_memberships(m, shape.pixel_points())
    fg = (union(g) >= 0.5).reshape(shape.values.shape)
    overlap = int(np.count_nonzero((g >= 0.5).sum(axis=0) >= 2))
    gaps = int(np.count_nonzero(shape.values & ~fg))
    return {"gap_pixel_count": gaps, "overlap_pixel_count": overlap,
            "dice_vs_input": dice(fg, shape.values),
            "foreground_pixel_count": int(np.count_nonzero(shape.values))}


def overlap_fit(shape: ShapeRaster, p: PipelineParams):
    """Dense disc initialization followed by the overlap-rewarding fit."""
    cfg = ModelConfig(1, p.m_halfspaces, 2, p.slope)
    init = init_polytopes(shape, p.radius, p.spacing, cfg)
    log.info("initialized %d polytopes", init.n_polytopes)
    fit_params = p.step1
    if p.eta1_per_pair and init.n_polytopes > 1:
        fit_params = replace(fit_params, eta=fit_params.eta / (init.n_polytopes - 1))
    fitted, trace = fit(init, shape, fit_params)
    return init, fitted, trace


def decompose(shape: ShapeRaster, p: PipelineParams | None = None) -> DecompositionResult:
    p = p or PipelineParams()
    init, step1, trace1 = overlap_fit(shape, p)
    pruned, removed, stats = prune(step1, shape, p.prune)
    log.info("pruning kept %d of %d polytopes", pruned.n_polytopes, step1.n_polytopes)
    if pruned.n_polytopes == 0:
        raise ValueError("pruning left no polytopes")
    final, trace3 = fit(pruned, shape, p.step3)
    if p.concavity_on == "step1":
        report = convexity_report(pruned, shape, p.prune.t_exponent, stats)
    else:
        report = convexity_report(final, shape, p.prune.t_exponent)
    labels = label_map(final, shape)
    diag = diagnostics(final, shape)
    diag["after_prune"] = diagnostics(pruned, shape)
    return DecompositionResult(
        model=final, labels=labels, connectivity=connectivity(labels),
        diagnostics=diag, report=report, removed=removed,
        traces={"step1": trace1, "step3": trace3},
        stages={"init": init, "step1": step1, "pruned": pruned})
