"""Pseudospectral simulator and verification lab for fourth-order NLS on the torus.

The package is organized as a numpy library:

- ``fields``       Fourier-side representation of periodic fields, transforms, norms.
- ``conserved``    Equation coefficients, structural conditions, conserved functionals.
- ``phase``        Linear symbol and interaction phase functions, resonance certificates.
- ``multipliers``  Combinator language for frequency multipliers and the L/M catalog.
- ``lam``          Multilinear convolution operators (brute force and composed).
- ``normalform``   Assembly of the transformed evolution identity and its checks.
- ``bounds``       Sampled verification of pointwise multiplier bounds.
- ``solver``       Time integration, gauge transforms, well-posedness experiments.
- ``cli``          Experiment runner with machine-readable CSV reports.
"""

from fournls.fields import PhysicalField, SpectralField
from fournls.conserved import ConditionFlags, EquationParams

__all__ = ["SpectralField", "PhysicalField", "EquationParams", "ConditionFlags"]
__version__ = "0.1.0"
