"""Resolvent and principal-operator laboratory for the 2+1 dimensional Lee model.

Modules
-------
manifold     mode catalogs and heat kernels on tori and spheres
fock         occupation bases and the boson coupling
principal    the renormalized principal operator ``Phi(E)``
spectral     eigenvalue flow, ground-state root and wavefunction
hamiltonian  explicit truncated Hamiltonian and block resolvent
bounds       analytic upper and lower ground-state bounds
lightfront   continuum light-front estimates by quadrature
cli          command-line runner with a result cache
"""

__version__ = "0.1.0"

from .errors import (CeilingError, ConvergenceError, DomainError, LeeLabError,
                     NoBoundStateError, SingularError)
from .fock import ModelParams, enumerate_sector
from .manifold import ManifoldSpec, build_catalog

__all__ = [
    "__version__",
    "LeeLabError",
    "DomainError",
    "CeilingError",
    "ConvergenceError",
    "SingularError",
    "NoBoundStateError",
    "ManifoldSpec",
    "ModelParams",
    "build_catalog",
    "enumerate_sector",
]
