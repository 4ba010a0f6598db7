"""Discrete spectrum of the Dirichlet Laplacian on generalized parabolic layers.

Modules
-------
geometry     meridian arc-length parametrization, curvature tables, injectivity gate
potentials   metric factor, effective potentials and boundary couplings on the strip
spec1d       half-line Schrodinger operators, Sturm counting, counting asymptote
fiber2d      fiber operators on the straightened strip and the weighted meridian
asymptotics  counting law and the one-dimensional ratio study
cli          command-line front end (``paralayer``)
"""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402,F401
