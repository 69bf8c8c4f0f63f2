"""Circuit-to-Hamiltonian compiler, adiabatic evolution and spectral certificates
for the 5-local, 3-local and 2D-grid clock constructions."""

from .circuit import Circuit, Gate, GridLayoutCircuit, bell_circuit, gate, history_state, simulate
from .errors import GuardError, NumericalError, ValidationError
from .grid6 import build_grid_program
from .kitaev3 import build_3local
from .kitaev5 import build_5local
from .local_hamiltonian import AdiabaticProgram, HamiltonianSum, LocalTerm, assemble, at

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Gate", "GridLayoutCircuit", "bell_circuit", "gate", "history_state", "simulate",
    "GuardError", "NumericalError", "ValidationError",
    "build_grid_program", "build_3local", "build_5local",
    "AdiabaticProgram", "HamiltonianSum", "LocalTerm", "assemble", "at",
]
