"""Generalized divergences, strong-converse bounds and their numerical checks."""

from .channels import KrausChannel, erasure_channel
from .converses import BoundReport
from .derived import KValue, k_c_cq, k_q
from .divergences import HockeyStick, Quasi, Renyi, hockey_stick, quasi, renyi
from .states import CqEnsemble, DensityMatrix, max_entangled

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CqEnsemble",
    "DensityMatrix",
    "HockeyStick",
    "KValue",
    "KrausChannel",
    "Quasi",
    "Renyi",
    "erasure_channel",
    "hockey_stick",
    "k_c_cq",
    "k_q",
    "max_entangled",
    "quasi",
    "renyi",
]
