"""Linear and nonlinear instability of stratified shear flows in a channel."""
from .errors import *  # noqa: F401,F403
from .profiles import (
    StratifiedEquilibrium,
    build_friedlander,
    couette_stable,
    miles_howard_check,
    richardson,
    tanh_shear,
)

__version__ = "0.1.0"
