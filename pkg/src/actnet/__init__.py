"""ActNet layers with normalized sinusoidal bases, Taylor-jet derivatives and
a physics-informed training harness, all in numpy."""

__version__ = "0.1.0"

from .basis import EPS, SinBasis, eval_basis, mu, sigma
from .core import DimensionError, make_rng
from .models import FAMILIES, build_model, directional_jet
from .network import (
    ActLayerParams,
    ActNet,
    ActNetParams,
    ArchSpec,
    FormatError,
    actlayer_forward,
    actlayer_jacobian,
    actnet_forward,
    flatten_params,
    flop_estimate,
    init_actlayer,
    init_actnet,
    param_count,
    unflatten_params,
)
from .siren import Siren, SirenSpec

__all__ = [
    "ActLayerParams",
    "ActNet",
    "ActNetParams",
    "ArchSpec",
    "DimensionError",
    "EPS",
    "FAMILIES",
    "FormatError",
    "SinBasis",
    "Siren",
    "SirenSpec",
    "actlayer_forward",
    "actlayer_jacobian",
    "actnet_forward",
    "build_model",
    "directional_jet",
    "eval_basis",
    "flatten_params",
    "flop_estimate",
    "init_actlayer",
    "init_actnet",
    "make_rng",
    "mu",
    "param_count",
    "sigma",
    "unflatten_params",
]
