"""Fabry-Perot resonances of a small cylindrical hole in a sound-hard plate.

Modules: ``special`` (Bessel roots and mode norms), ``greens`` (Green's
functions), ``operators`` (Galerkin aperture operators and alpha),
``resonance`` (p, q and their roots), ``fields`` (aperture solve and the
fields it generates), ``cli`` (command line).
"""
__version__ = "0.1.0"

from .greens import Geometry, Truncation  # noqa: E402
