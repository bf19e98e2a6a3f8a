"""Exact simulator of a one-dimensional fermionic quantum cellular automaton.

The automaton evolves occupation states on a ring or open chain of L cells,
each with two internal sites, by one shift-then-coin unitary per time step.
Subpackages cover the sparse Fock-space representation (`lattice`), the gate
evolution (`evolution`), fermionic ladder operators (`fermion`), momentum
modes, dispersion and the Dirac sea (`spectral`), an independent one-particle
quantum-walk oracle (`walk`), and a mechanized obstruction to extending the
local sign rules to two dimensions (`nogo`). `cli` exposes the experiment
runner installed as the `fqca` command.
"""

from .lattice import (
    Boundary,
    Eps,
    FockState,
    LatticeConfig,
    basis_state,
    inner_product,
    vacuum,
)
from .evolution import evolve, step

__version__ = "1.0.0"

__all__ = [
    "Boundary",
    "Eps",
    "FockState",
    "LatticeConfig",
    "basis_state",
    "inner_product",
    "vacuum",
    "evolve",
    "step",
    "__version__",
]
