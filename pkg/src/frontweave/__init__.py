"""Front propagation by weaving fast marching with sideways solves."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
