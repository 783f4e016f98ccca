"""Gradient extraction helpers shared by the MLP and acceptance tests.

The trainer updates parameters in place, so the analytic gradient of one
example is recovered by cloning the model, applying a single update with
learning rate 1, and differencing the parameters.  The numeric side is a
plain central finite difference of the half-squared-error loss.
"""

import numpy as np

from specsep.mlp import Mlp, _backprop_example


def loss_of(model, x, target):
    err = model.forward(x) - target
    return 0.5 * float(err @ err)


def clone(model):
    return Mlp(
        [w.copy() for w in model.weights],
        [b.copy() for b in model.biases],
        seed=model.seed,
    )


def analytic_gradients(model, x, target):
    """Per-parameter gradients as the trainer computes them.

    Returns (weight_grads, bias_grads); bias_grads covers hidden layers only,
    since the output bias is pinned and never updated.
    """
    work = clone(model)
    w_before = [w.copy() for w in work.weights]
    b_before = [b.copy() for b in work.biases]
    _backprop_example(work, x, target, learning_rate=1.0)
    gw = [before - after for before, after in zip(w_before, work.weights)]
    gb = [before - after for before, after in zip(b_before[:-1], work.biases[:-1])]
    return gw, gb


def numeric_gradients(model, x, target, step=1e-5):
    """Central finite differences over every weight and hidden bias."""
    work = clone(model)
    gw = []
    for w in work.weights:
        g = np.zeros_like(w)
        for idx in np.ndindex(*w.shape):
            saved = w[idx]
            w[idx] = saved + step
            plus = loss_of(work, x, target)
            w[idx] = saved - step
            minus = loss_of(work, x, target)
            w[idx] = saved
            g[idx] = (plus - minus) / (2.0 * step)
        gw.append(g)
    gb = []
    for b in work.biases[:-1]:
        g = np.zeros_like(b)
        for i in range(b.shape[0]):
            saved = b[i]
            b[i] = saved + step
            plus = loss_of(work, x, target)
            b[i] = saved - step
            minus = loss_of(work, x, target)
            b[i] = saved
            g[i] = (plus - minus) / (2.0 * step)
        gb.append(g)
    return gw, gb


def max_relative_error(model, x, target, step=1e-5):
    """Worst relative disagreement between the two gradient routes."""
    aw, ab = analytic_gradients(model, x, target)
    nw, nb = numeric_gradients(model, x, target, step)
    worst = 0.0
    for a, n in zip(aw + ab, nw + nb):
        rel = np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), 1e-6)
        worst = max(worst, float(rel.max()))
    return worst
