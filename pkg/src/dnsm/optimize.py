"""Energy functionals for fitting a model to a binary shape, and their descent.

Both functionals share a squared-error data term.  The pairwise overlap term
``sum_i sum_{r != i} integral g_i g_r`` is subtracted when polytopes should
pile onto each other (first fit, exposes redundant polytopes) and added when
they should separate (final fit).  Integrals are pixel sums times pixel area.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import enum
import logging

import numpy as np

from . import _kernels
from .model import DnsmModel, ShapeRaster

log = logging.getLogger(__name__)

WINDOW = 10
MAX_HALVINGS = 20


class OverlapSign(enum.Enum):
    MAXIMIZE = -1
    PENALIZE = 1


class FitDivergedError(FloatingPointError):
    """Energy became non-finite and no step-size reduction recovered it."""

    def __init__(self, iteration: int, energy: float):
        super().__init__(
            f"energy is non-finite ({energy}) at iteration {iteration}; "
            "reduce the step size")
        self.iteration = iteration


@dataclass(frozen=True)
class FitParams:
    eta: float = 0.01
    step_size: float = 1000.0
    max_iters: int = 500
    rel_tol: float = 1e-6
    overlap_sign: OverlapSign = OverlapSign.MAXIMIZE
    overlap_domain: str = "image"
    containment: float = 0.0
    adapt: bool = True

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be nonnegative")
        if self.containment < 0:
            raise ValueError("containment must be nonnegative")
        if self.overlap_domain not in ("image", "foreground"):
            raise ValueError("overlap_domain must be 'image' or 'foreground'")


@dataclass
class FitTrace:
    total: list = field(default_factory=list)
    data: list = field(default_factory=list)
    overlap: list = field(default_factory=list)
    containment: list = field(default_factory=list)
    step: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations_run(self) -> int:
        return len(self.total)

    def as_dict(self) -> dict:
        return {"iterations_run": self.iterations_run,
                "converged": self.converged,
                "total": list(self.total), "data": list(self.data),
                "overlap": list(self.overlap),
                "containment": list(self.containment), "step": list(self.step)}


class _Problem:
    """Pixel centers and target values of one shape."""

    def __init__(self, shape: ShapeRaster, p: FitParams):
        self.points = np.ascontiguousarray(shape.pixel_points())
        self.target = shape.flat_values()
        if p.overlap_domain == "foreground":
            self.overlap_weight = self.target
        else:
            self.overlap_weight = np.ones_like(self.target)
        self.spill_weight = p.containment * (1.0 - self.target)
        self.area = shape.pixel_area
        self.signed_eta = p.overlap_sign.value * p.eta

    def evaluate(self, params, want_grad=True):
        """``(total, data, overlap, spill, grad)`` at ``params``."""
        data, overlap, spill, grad = _kernels.evaluate(
            np.ascontiguousarray(params, dtype=float), self.points, self.target,
            self.overlap_weight, self.spill_weight, self.area, self.signed_eta,
            want_grad)
        return data + self.signed_eta * overlap + spill, data, overlap, spill, grad


def energy(m: DnsmModel, shape: ShapeRaster, p: FitParams):
    """Return ``(total, data_term, overlap_term)``.

    ``total = data + sign * eta * overlap`` with ``sign = -1`` when overlap is
    maximized and ``+1`` when it is penalized.
    """
    return _Problem(shape, p).evaluate(m.params, want_grad=False)[:3]


def gradient(m: DnsmModel, shape: ShapeRaster, p: FitParams) -> np.ndarray:
    """Analytic gradient with the same ``(N, M, D + 1)`` layout as the params."""
    return _Problem(shape, p).evaluate(m.params)[4]


def fit(m: DnsmModel, shape: ShapeRaster, p: FitParams):
    """Gradient descent on the energy; returns ``(fitted_model, trace)``.

    A trial step that raises the energy (by more than 1e-12) or makes it or
    the parameters non-finite is retried with half the step, up to 20 times.  With
    ``p.adapt`` the step grows by 10% after each accepted iteration, never
    beyond ``p.step_size``.  Stops when the relative energy change over the
    last 10 iterations drops below ``p.rel_tol``.
    """
    prob = _Problem(shape, p)
    params = m.params.copy()
    trace = FitTrace()
    e, d, o, c, grad = prob.evaluate(params)
    if not np.isfinite(e):
        raise FitDivergedError(0, e)
    history = [e]
    step = p.step_size
    for it in range(1, p.max_iters + 1):
        for _ in range(MAX_HALVINGS + 1):
            trial = params - step * grad
            if not np.all(np.isfinite(trial)):
                e_new = np.inf
                step *= 0.5
                continue
            e_new, d_new, o_new, c_new, trial_grad = prob.evaluate(trial)
            if np.isfinite(e_new) and e_new <= e + 1e-12:
                break
            step *= 0.5
        else:
            if not np.isfinite(e_new):
                raise FitDivergedError(it, e_new)
            log.debug("no descent step found at iteration %d", it)
            trace.converged = True
            break
        params, e, d, o, c, grad = trial, e_new, d_new, o_new, c_new, trial_grad
        trace.total.append(e)
        trace.data.append(d)
        trace.overlap.append(o)
        trace.containment.append(c)
        trace.step.append(step)
        history.append(e)
        if p.adapt:
            step = min(step * 1.1, p.step_size)
        if len(history) > WINDOW:
            old = history[-1 - WINDOW]
            if abs(old - e) <= p.rel_tol * abs(old):
                trace.converged = True
                break
    fitted = DnsmModel(m.config, params)
    return fitted, trace
