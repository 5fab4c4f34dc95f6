"""
Engineered reservoirs for the motional mode of a trapped ion: state synthesis and protection
by repeated laser-driven collisions, the electronic reset, and a quantum Otto cycle run with
the engineered states.
"""

__version__ = "0.1.0"

from .collision import evolve, liouvillian, steady_state
from .fock import DensityMatrix, FockSpace
from .metrics import fidelity, mean_occupation

__all__ = ["DensityMatrix", "FockSpace", "evolve", "fidelity", "liouvillian", "mean_occupation", "steady_state"]
