"""Equivariant constant-mean-curvature tori in the 3-sphere.

Spectral data of genus <= 1 curves, the genus-one Whitham flow, the integer
triple classification of flat tori with a double point, explicit surface and
profile-curve synthesis, and connectivity of the moduli graph.
"""

__version__ = "0.1.0"
