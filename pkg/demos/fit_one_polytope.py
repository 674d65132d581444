# Fit a single smoothed polytope to a square and watch the energy fall.
#
#     python demos/fit_one_polytope.py

import numpy as np

from dnsm import DnsmModel, FitParams, ModelConfig, energy, fit, gradient, shapes
from dnsm.convexity import dice
from dnsm.model import disc_polytope, eval_model

shape = shapes.square(40, margin=8)

# A 16-sided disc in the middle, far smaller than the square
start = DnsmModel(ModelConfig(1, 16), disc_polytope((0.5, 0.5), 0.1, 16, 60.0)[None])

p = FitParams(eta=0.0, max_iters=200)
print("start energy", energy(start, shape, p)[0])

# The analytic gradient agrees with a central difference on any entry
h = 1e-6
bumped = start.params.copy()
bumped[0, 3, 2] += h
lower = start.params.copy()
lower[0, 3, 2] -= h
fd = (energy(DnsmModel(start.config, bumped), shape, p)[0]
      - energy(DnsmModel(start.config, lower), shape, p)[0]) / (2 * h)
print("d/d bias of face 3: analytic", gradient(start, shape, p)[0, 3, 2], " numeric", fd)

fitted, trace = fit(start, shape, p)
print(trace.iterations_run, "iterations, converged:", trace.converged)
print("energy every 25 iterations:", np.round(trace.total[::25], 5))

inside = eval_model(fitted, shape.pixel_points()).reshape(40, 40) >= 0.5
print("Dice with the square", round(dice(inside, shape.values), 3))
