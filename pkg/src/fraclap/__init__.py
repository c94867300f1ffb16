"""Self-adjoint realizations of the restricted fractional Laplacian on an interval.

The package builds a spectral Galerkin model of the Dirichlet realization,
evaluates the Weyl function of the associated boundary triplet and uses it to
compute spectra of arbitrary self-adjoint boundary conditions. A closed-form
treatment of the classical Laplacian serves as reference.
"""

__version__ = "0.1.0"

from fraclap.core import (  # noqa: E402
    BoundaryCondition,
    ExtensionClassification,
    FractionalOrder,
    Interval,
    TraceVector,
    compare_theta,
    preset_bc,
    validate_bc,
)

__all__ = [
    "BoundaryCondition",
    "ExtensionClassification",
    "FractionalOrder",
    "Interval",
    "TraceVector",
    "__version__",
    "compare_theta",
    "preset_bc",
    "validate_bc",
]
