"""Figure rendering for nmon toolkit output files."""

from .figures import KINDS, FigureSpec, render
from .schemas import SchemaError

__version__ = "0.1.0"

__all__ = ["FigureSpec", "KINDS", "SchemaError", "render", "__version__"]
