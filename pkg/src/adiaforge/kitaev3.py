"""Three-local construction: the propagation terms keep only the middle clock
qubit in their hopping part, and the clock penalty is scaled by a large J."""

from __future__ import annotations

import logging

import numpy as np

from .circuit import ensure_min_length
from .errors import GuardError, ValidationError
from .kitaev5 import (
    MAX_PARTICLES,
    _basis_ketbra,
    _sum,
    clock_term,
    clockinit_term,
    input_term,
    propagation_clock_states,
)
from .local_hamiltonian import NOMINAL_K, AdiabaticProgram, HamiltonianSum, LocalTerm, make_term, norm_bound

__all__ = ["propagation_term_3", "build_3local", "default_J", "J_WARN"]

log = logging.getLogger(__name__)

J_WARN = 1e8


def default_J(epsilon, L, power=6, constant=1.0):
    """constant * epsilon^-2 * L^power (power 6 by default, 5 as the tighter option)."""
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    if power not in (5, 6):
        raise ValidationError(f"J power must be 5 or 6, got {power}")
    return constant * epsilon ** -2 * float(L) ** power


def propagation_term_3(ell, gate, L, n):
    """H'_l: clock-only identifiers plus hopping -U (x) |1><0|_l - h.c."""
    if max(gate.targets) >= n:
        raise ValidationError(f"gate targets {gate.targets} outside {n} computation qubits")
    clocks, before, after = propagation_clock_states(ell, L)
    csites = tuple(n + c - 1 for c in clocks)
    ident_before = LocalTerm(csites, _basis_ketbra(before, before), 1.0, f"prop3:{ell}:before")
    ident_after = LocalTerm(csites, _basis_ketbra(after, after), 1.0, f"prop3:{ell}:after")
    u = gate.unitary
    raise_ = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    hop = -np.kron(u, raise_) - np.kron(u.conj().T, raise_.T)
    hop_term = make_term(tuple(gate.targets) + (n + ell - 1,), hop, 2, 1.0, f"prop3:{ell}:hop")
    return HamiltonianSum(n + L, 2, [ident_before, ident_after, hop_term])


def build_3local(circuit, epsilon, J=None, L_original=None, J_power=6):
    """Compile ``circuit`` to the three-local program.

    ``J`` defaults to epsilon^-2 L^J_power. Any J must exceed twice the norm
    bound of the non-clock part (the hypothesis of the leak lemma).
    """
    circuit = ensure_min_length(circuit)
    n, L = circuit.n, circuit.L
    if n + L > MAX_PARTICLES:
        raise GuardError("max_particles", f"n+L = {n + L} exceeds {MAX_PARTICLES}")
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    N = n + L
    h_input = input_term(n, L)
    init_rest = _sum(N, [clockinit_term(L, n), h_input])
    props = _sum(N, [propagation_term_3(l, g, L, n) for l, g in enumerate(circuit.gates, 1)], 0.5)
    final_rest = props + h_input
    K = max(norm_bound(init_rest), norm_bound(final_rest))
    if J is None:
        J = default_J(epsilon, L, J_power)
    J = float(J)
    if J <= 2 * K:
        raise ValidationError(f"J = {J} must exceed 2K = {2 * K} (K bounds the non-clock part)")
    if J > J_WARN:
        log.warning("J = %.3g exceeds %.0e; double-precision conditioning degrades", J, J_WARN)
    h_clock = clock_term(L, n).scaled(J)
    h_init = init_rest + h_clock
    h_final = final_rest + h_clock
    return AdiabaticProgram(
        "3local",
        h_init,
        h_final,
        n=n,
        L=L,
        k=NOMINAL_K["3local"],
        epsilon=epsilon,
        J=J,
        L_original=L_original if L_original is not None else L,
        circuit=circuit,
    )
