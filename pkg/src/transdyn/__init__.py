"""Numerical dynamics of transcendental entire functions: escape classes, log transforms, hairs and raster topology."""

__version__ = "0.1.0"

from .catalog import FunctionSpec, cosine, expaffine, fatou, format_spec, parse_spec, quadexp, scaled  # noqa: E402
from .errors import TransdynError  # noqa: E402
from .grid import RasterGrid  # noqa: E402

__all__ = [
    "FunctionSpec",
    "RasterGrid",
    "TransdynError",
    "cosine",
    "expaffine",
    "fatou",
    "format_spec",
    "parse_spec",
    "quadexp",
    "scaled",
]
