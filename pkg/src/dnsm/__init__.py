"""Convex decomposition and convexity measures with disjunctive normal shape models."""

from .model import (DnsmModel, Discriminant, ModelConfig, Polytope, ShapeRaster,
                    eval_halfspace, eval_model, eval_polytope, init_polytopes)
from .optimize import FitParams, FitTrace, OverlapSign, energy, fit, gradient
from .convexity import (ConvexityReport, PruneParams, RegionStats,
                        baseline_concavities, compute_regions, convex_hull,
                        global_concavity, prune, significance)
from .pipeline import (DecompositionResult, PipelineParams, decompose, label_map,
                       part_hull_excess)

__version__ = "0.1.0"
