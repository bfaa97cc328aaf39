from __future__ import annotations

import numpy as np

from .tape import Tape, Var


def loss_grad(loss_fn, params, batch):
    """Value and exact gradient of ``loss_fn(theta, batch)`` at the flat vector ``params``.

    ``loss_fn`` receives ``theta`` as a tape variable and must return a scalar
    built from recorded operations.
    """
    params = np.asarray(params, dtype=np.float64)
    tape = Tape()
    theta = tape.variable(params)
    loss = loss_fn(theta, batch)
    if not isinstance(loss, Var):
        # loss does not depend on theta
        return float(np.asarray(loss)), np.zeros_like(params)
    (g,) = tape.gradient(loss, [theta])
    return float(loss.value), g
