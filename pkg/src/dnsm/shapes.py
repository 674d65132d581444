"""Synthetic binary shapes used by the tests and demos."""

import numpy as np

from .model import DnsmModel, ModelConfig, ShapeRaster


def disc(size=64, radius=None, center=None):
    radius = 0.35 * size if radius is None else radius
    cy, cx = ((size - 1) / 2.0,) * 2 if center is None else center
    yy, xx = np.mgrid[:size, :size]
    return ShapeRaster((yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2)


def rectangle(size, top, left, height, width):
    img = np.zeros((size, size) if np.isscalar(size) else size, dtype=bool)
    img[top:top + height, left:left + width] = True
    return img


def square(size=64, margin=None):
    margin = size // 5 if margin is None else margin
    return ShapeRaster(rectangle(size, margin, margin, size - 2 * margin,
                                 size - 2 * margin))


def l_shape(size=96):
    """Two overlapping bars: a vertical stem and a horizontal foot."""
    s = size / 96.0
    stem = rectangle(size, round(12 * s), round(14 * s), round(72 * s), round(24 * s))
    foot = rectangle(size, round(60 * s), round(14 * s), round(24 * s), round(68 * s))
    return ShapeRaster(stem | foot)


def plus_sign(size=96):
    s = size / 96.0
    bar_h = rectangle(size, round(36 * s), round(8 * s), round(24 * s), round(80 * s))
    bar_v = rectangle(size, round(8 * s), round(36 * s), round(80 * s), round(24 * s))
    return ShapeRaster(bar_h | bar_v)


def square_with_slit(size=100, slit_length=40):
    """Filled square with a one-pixel-wide slit cut in from the top edge."""
    img = np.ones((size, size), dtype=bool)
    img[:slit_length, size // 2] = False
    return ShapeRaster(img)


def upscale(shape: ShapeRaster, factor=2) -> ShapeRaster:
    v = np.repeat(np.repeat(shape.values, factor, axis=0), factor, axis=1)
    return ShapeRaster(v)


def box_model(boxes, size, m=4):
    """Sharp model with one axis-aligned box polytope per ``(top, left, h, w)``.

    Boxes are in pixel units of a ``size``-square raster; the sigmoid ramp is
    steep enough that every pixel center is firmly inside or outside.
    """
    scale = float(size)
    slope = 40.0 * scale
    params = np.empty((len(boxes), m, 3))
    for i, (top, left, h, w) in enumerate(boxes):
        x0, x1 = left / scale, (left + w) / scale
        y0, y1 = top / scale, (top + h) / scale
        faces = [(1.0, 0.0, -x0), (-1.0, 0.0, x1), (0.0, 1.0, -y0), (0.0, -1.0, y1)]
        for j in range(m):
            params[i, j] = faces[j % 4]
    params *= slope
    return DnsmModel(ModelConfig(len(boxes), m, 2, slope), params)


def two_part_configurations(size=100):
    """Pair of two-box shapes with a similar outline but unlike second parts.

    In ``a`` box 2 sticks out of box 1 with a thin overlap, so most of it is
    unique; in ``b`` it reaches deep into box 1.  Returns
    ``{"a": (shape, model), "b": (shape, model)}``.
    """
    s = size / 100.0
    base = (round(30 * s), round(20 * s), round(40 * s), round(40 * s))
    second = {"a": (round(40 * s), round(58 * s), round(20 * s), round(22 * s)),
              "b": (round(40 * s), round(22 * s), round(20 * s), round(56 * s))}
    out = {}
    for key, box in second.items():
        model = box_model([base, box], size)
        mask = np.zeros((size, size), dtype=bool)
        for top, left, h, w in (base, box):
            mask[top:top + h, left:left + w] = True
        out[key] = (ShapeRaster(mask), model)
    return out
