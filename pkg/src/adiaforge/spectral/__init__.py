"""Eigenanalysis, restriction to history subspaces, Markov-chain machinery and
lemma certificates."""

from .eigen import Spectrum, eigen_low, fix_phase
from .lemmas import AngleReport, LeakReport, angle_certify, ground_space, leak_certify
from .markov import (
    ConductanceReport,
    GerschgorinReport,
    MarkovChain,
    check_monotone,
    conductance,
    gerschgorin,
    perron_chain,
)
from .profile import GapProfile, gap_profile, worker_count
from .restrict import (
    BlockDecomposition,
    RestrictedOperator,
    SubspaceBasis,
    block_decompose_S,
    gamma_basis_5local,
    history_basis,
    invariance_residual,
    legal_clock_basis,
    restrict,
    restricted_endpoints,
    s0_closed_form,
)

__all__ = [
    "Spectrum", "eigen_low", "fix_phase",
    "AngleReport", "LeakReport", "angle_certify", "ground_space", "leak_certify",
    "ConductanceReport", "GerschgorinReport", "MarkovChain", "check_monotone", "conductance",
    "gerschgorin", "perron_chain",
    "GapProfile", "gap_profile", "worker_count",
    "BlockDecomposition", "RestrictedOperator", "SubspaceBasis", "block_decompose_S",
    "gamma_basis_5local", "history_basis", "invariance_residual", "legal_clock_basis",
    "restrict", "restricted_endpoints", "s0_closed_form",
]
