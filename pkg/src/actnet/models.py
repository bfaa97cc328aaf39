"""Model registry and helpers shared by every network family."""

from __future__ import annotations

import numpy as np

from .autodiff import jet as J
from .network import ActNet, ArchSpec
from .siren import Siren, SirenSpec

FAMILIES = ("actnet", "siren")


def build_model(family: str, spec: dict):
    """Instantiate a model from its family name and a spec dictionary."""
    if family == "actnet":
        return ActNet(ArchSpec(**spec))
    if family == "siren":
        return Siren(SirenSpec(**spec))
    raise ValueError(f"unknown model family {family!r}; expected one of {FAMILIES}")


def directional_jet(model, theta, x, coord: int, order: int) -> J.Jet:
    """Taylor jet of the first network output along input coordinate ``coord``.

    ``x`` is a point or a batch of points with a trailing feature axis; the
    returned jet holds plain arrays with the batch shape.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= coord < x.shape[-1]:
        raise IndexError(f"coord {coord} out of range for inputs of dimension {x.shape[-1]}")
    out = model.apply(theta, J.seed(x, [coord], order))
    if not isinstance(out, J.Jet):
        return J.Jet([out[..., 0]])
    taylor = [out.taylor[0][..., 0]] + [np.asarray(c)[0, ..., 0] for c in out.taylor[1:]]
    return J.Jet(taylor)
