"""Taylor jets for input derivatives and a tape for parameter gradients."""

from .grad import loss_grad
from .jet import MAX_ORDER, Jet, SingularityError, seed
from .tape import CapabilityError, Tape, Var

__all__ = [
    "CapabilityError",
    "Jet",
    "MAX_ORDER",
    "SingularityError",
    "Tape",
    "Var",
    "loss_grad",
    "seed",
]
