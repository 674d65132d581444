"""Disjunctive normal shape model: half-spaces, polytopes and their union.

A model holds ``N`` convex polytopes, each the intersection of ``M`` smoothed
half-spaces.  Parameters live in a single ``(N, M, D + 1)`` array whose last
axis is ``(w_1, ..., w_D, b)``.  Points are expressed in the normalized frame
of a :class:`ShapeRaster` (longest image side maps to ``[0, 1]``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import _kernels


DEFAULT_SLOPE = 60.0
DEFAULT_RADIUS = 0.08
DEFAULT_SPACING = 0.08


def sigmoid(z):
    """Logistic function ``1 / (1 + exp(-z))``, overflow-safe."""
    z = np.asarray(z, dtype=float)
    return np.exp(-np.logaddexp(0.0, -z))


def log_sigmoid(z):
    return -np.logaddexp(0.0, -np.asarray(z, dtype=float))


@dataclass(frozen=True)
class ModelConfig:
    n_polytopes: int
    m_halfspaces: int = 16
    dimension: int = 2
    slope: float = DEFAULT_SLOPE

    def __post_init__(self):
        if self.n_polytopes < 1:
            raise ValueError("n_polytopes must be >= 1")
        if self.m_halfspaces < 3:
            raise ValueError("m_halfspaces must be >= 3 to bound a 2D region")
        if self.dimension != 2:
            raise ValueError("only dimension 2 is supported")
        if not self.slope > 0:
            raise ValueError("slope must be positive")


@dataclass(frozen=True)
class Discriminant:
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if not (np.all(np.isfinite(w)) and math.isfinite(self.bias)):
            raise ValueError("discriminant parameters must be finite")


@dataclass(frozen=True)
class Polytope:
    discriminants: tuple

    @classmethod
    def from_array(cls, params) -> "Polytope":
        params = np.asarray(params, dtype=float)
        return cls(tuple(Discriminant(row[:-1].copy(), float(row[-1]))
                         for row in params))

    def to_array(self) -> np.ndarray:
        return np.array([np.append(d.weights, d.bias)
                         for d in self.discriminants])


@dataclass
class DnsmModel:
    """Union of smoothed convex polytopes.

    ``params[i, j]`` holds the weights and bias of half-space ``j`` of
    polytope ``i``.
    """

    config: ModelConfig
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        n, m, d = self.config.n_polytopes, self.config.m_halfspaces, self.config.dimension
        if self.params.shape != (n, m, d + 1):
            raise ValueError(
                f"params shape {self.params.shape} does not match config "
                f"({n}, {m}, {d + 1})")
        if not np.all(np.isfinite(self.params)):
            raise ValueError("model parameters must be finite")

    @classmethod
    def from_polytopes(cls, polytopes, slope: float = DEFAULT_SLOPE) -> "DnsmModel":
        arrays = [p.to_array() for p in polytopes]
        params = np.stack(arrays)
        cfg = ModelConfig(params.shape[0], params.shape[1], params.shape[2] - 1, slope)
        return cls(cfg, params)

    @property
    def n_polytopes(self) -> int:
        return self.params.shape[0]

    @property
    def polytopes(self) -> list:
        return [Polytope.from_array(p) for p in self.params]

    def copy(self) -> "DnsmModel":
        return DnsmModel(self.config, self.params.copy())

    def subset(self, indices) -> "DnsmModel":
        """Model made of the polytopes at ``indices`` (in that order)."""
        indices = list(indices)
        if not indices:
            raise ValueError("a model needs at least one polytope")
        cfg = replace(self.config, n_polytopes=len(indices))
        return DnsmModel(cfg, self.params[indices].copy())

    @property
    def n_parameters(self) -> int:
        return self.params.size


# --- raster -----------------------------------------------------------------

@dataclass(frozen=True)
class ShapeRaster:
    """Binary shape image with a normalized, aspect-preserving frame.

    Pixel ``(row, col)`` has its center at normalized point
    ``((col + 0.5) / L, (row + 0.5) / L)`` with ``L = max(height, width)``.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("shape raster must be a non-empty 2D array")
        v = v.astype(bool)
        if not v.any():
            raise ValueError("shape raster has an empty foreground")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def scale(self) -> int:
        return max(self.height, self.width)

    @property
    def pixel_area(self) -> float:
        return 1.0 / self.scale ** 2

    def to_normalized(self, rows, cols):
        s = self.scale
        return np.stack([(np.asarray(cols, dtype=float) + 0.5) / s,
                         (np.asarray(rows, dtype=float) + 0.5) / s], axis=-1)

    def to_pixel(self, points):
        """Inverse of :meth:`to_normalized`; returns float ``(rows, cols)``."""
        p = np.asarray(points, dtype=float)
        s = self.scale
        return p[..., 1] * s - 0.5, p[..., 0] * s - 0.5

    def pixel_points(self) -> np.ndarray:
        """Normalized centers of all pixels, row-major, shape ``(H*W, 2)``."""
        rows, cols = np.indices(self.values.shape)
        return self.to_normalized(rows.ravel(), cols.ravel())

    def flat_values(self) -> np.ndarray:
        return self.values.ravel().astype(float)


# --- evaluation -------------------------------------------------------------

def eval_halfspace(d: Discriminant, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return sigmoid(x @ d.weights + d.bias)


def eval_polytope(p, x) -> np.ndarray:
    """Polytope membership ``g(x)``: product of its half-space sigmoids.

    ``p`` may be a :class:`Polytope` or an ``(M, D + 1)`` parameter array.
    """
    params = p.to_array() if isinstance(p, Polytope) else np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(x)
    z = np.einsum("jk,pk->jp", params[:, :-1], pts) + params[:, -1:]
    g = np.exp(log_sigmoid(z).sum(axis=0))
    return g[0] if x.ndim == 1 else g


def polytope_memberships(m: DnsmModel, points) -> np.ndarray:
    """``g_i`` for every polytope and point, shape ``(N, P)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return _kernels.memberships(np.ascontiguousarray(m.params),
                                np.ascontiguousarray(pts))


def union(g: np.ndarray) -> np.ndarray:
    """``1 - prod_i (1 - g_i)`` along the first axis."""
    return 1.0 - np.prod(1.0 - g, axis=0)


def eval_model(m: DnsmModel, x) -> np.ndarray:
    """Model value ``f(x)``; the shape interior is ``f >= 0.5``."""
    x = np.asarray(x, dtype=float)
    f = union(polytope_memberships(m, x))
    return f[0] if x.ndim == 1 else f


# --- initialization ---------------------------------------------------------

def disc_polytope(center, radius: float, m: int, slope: float) -> np.ndarray:
    """Regular ``m``-gon around ``center`` with apothem ``radius``.

    Half-space ``j`` has inward unit normal at angle ``2*pi*j/m``; its
    discriminant is ``slope * (n_j . (x - c) + radius)``.
    """
    theta = 2.0 * np.pi * np.arange(m) / m
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    c = np.asarray(center, dtype=float)
    params = np.empty((m, 3))
    params[:, :2] = slope * normals
    params[:, 2] = slope * (radius - normals @ c)
    return params


def grid_centers(shape: ShapeRaster, spacing: float) -> np.ndarray:
    """Square grid of normalized points kept where the pixel is foreground.

    The grid is symmetric about the foreground bounding-box center with
    ``max(1, floor(extent / spacing))`` points per axis.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    rows, cols = np.nonzero(shape.values)
    s = shape.scale
    axes = []
    for lo, hi in ((cols.min(), cols.max() + 1), (rows.min(), rows.max() + 1)):
        extent = (hi - lo) / s
        center = 0.5 * (hi + lo) / s
        n = max(1, int(math.floor(extent / spacing + 1e-9)))
        axes.append(center + (np.arange(n) - (n - 1) / 2.0) * spacing)
    gx, gy = np.meshgrid(axes[0], axes[1])
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    r, c = shape.to_pixel(pts)
    r = np.floor(r + 0.5).astype(int)
    c = np.floor(c + 0.5).astype(int)
    inside = (r >= 0) & (r < shape.height) & (c >= 0) & (c < shape.width)
    keep = np.zeros(len(pts), dtype=bool)
    keep[inside] = shape.values[r[inside], c[inside]]
    return pts[keep]


def init_polytopes(shape: ShapeRaster, radius: float = DEFAULT_RADIUS,
                   spacing: float = DEFAULT_SPACING,
                   cfg: ModelConfig | None = None) -> DnsmModel:
    """Dense disc initialization over the body of the shape.

    The number of polytopes is set by the grid; ``cfg.n_polytopes`` is
    ignored.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    cfg = cfg or ModelConfig(1)
    centers = grid_centers(shape, spacing)
    if len(centers) == 0:
        raise ValueError(
            "no initialization center falls on the foreground; "
            "reduce the spacing")
    params = np.stack([disc_polytope(c, radius, cfg.m_halfspaces, cfg.slope)
                       for c in centers])
    return DnsmModel(replace(cfg, n_polytopes=len(centers)), params)
