"""Structure analysis of finite-dimensional Lindblad generators."""
from .errors import (
    CertificationError,
    DegenerateBaseError,
    DegenerateBeyondOrderError,
    DimensionError,
    LindstructError,
    NotAProjectorError,
    NotInRangeError,
    NotUnitaryError,
    UnknownFixtureError,
)
from .generator import LindbladGenerator, validate
from .kernels import BACKEND
from .linop import DEFAULT_TOL, Superoperator, Tolerance
from .perturbation import PerturbedGenerator, expand, expand_degenerate, expand_unique
from .spectral import decompose, stationary_states
from .structure import analyze

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CertificationError",
    "DEFAULT_TOL",
    "DegenerateBaseError",
    "DegenerateBeyondOrderError",
    "DimensionError",
    "LindbladGenerator",
    "LindstructError",
    "NotAProjectorError",
    "NotInRangeError",
    "NotUnitaryError",
    "PerturbedGenerator",
    "Superoperator",
    "Tolerance",
    "UnknownFixtureError",
    "analyze",
    "decompose",
    "expand",
    "expand_degenerate",
    "expand_unique",
    "stationary_states",
    "validate",
]
