"""Five-local construction on n computation qubits plus L unary clock qubits.

H_init  = H_clockinit + H_input + H_clock
H_final = 1/2 sum_l H_l + H_input + H_clock

Clock qubit ``c`` (1-based) is particle ``n + c - 1``.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, ensure_min_length
from .errors import GuardError, ValidationError
from .local_hamiltonian import NOMINAL_K, AdiabaticProgram, HamiltonianSum, LocalTerm, make_term, projector

__all__ = [
    "clock_term",
    "input_term",
    "clockinit_term",
    "propagation_term",
    "propagation_clock_states",
    "build_5local",
    "MAX_PARTICLES",
]

MAX_PARTICLES = 40

P0 = projector(2, 0)
P1 = projector(2, 1)


def _basis_ketbra(bits_out, bits_in):
    """|bits_out><bits_in| on len(bits) qubits."""
    k = len(bits_out)
    m = np.zeros((2 ** k, 2 ** k), dtype=complex)
    m[int("".join(map(str, bits_out)), 2), int("".join(map(str, bits_in)), 2)] = 1.0
    return m


def _check_L(L):
    if L < 2:
        raise ValidationError(f"clock needs L >= 2 qubits, got L={L}")


def clock_term(L, n=0):
    """sum_{l=1}^{L-1} |01><01| on clock qubits (l, l+1)."""
    _check_L(L)
    p01 = _basis_ketbra((0, 1), (0, 1))
    terms = [LocalTerm((n + c - 1, n + c), p01, 1.0, "clock") for c in range(1, L)]
    return HamiltonianSum(n + L, 2, terms)


def input_term(n, L):
    """sum_i |1><1|_i (x) |0><0| on the first clock qubit."""
    _check_L(L)
    m = np.kron(P1, P0)
    terms = [LocalTerm((i, n), m, 1.0, "input") for i in range(n)]
    return HamiltonianSum(n + L, 2, terms)


def clockinit_term(L, n=0):
    """|1><1| on the first clock qubit."""
    _check_L(L)
    return HamiltonianSum(n + L, 2, [LocalTerm((n,), P1, 1.0, "clockinit")])


def propagation_clock_states(ell, L):
    """(clock qubits, before bits, after bits) identifying the step ell-1 -> ell."""
    _check_L(L)
    if not 1 <= ell <= L:
        raise ValidationError(f"propagation index {ell} outside [1, {L}]")
    if ell == 1:
        return (1, 2), (0, 0), (1, 0)
    if ell == L:
        return (L - 1, L), (1, 0), (1, 1)
    return (ell - 1, ell, ell + 1), (1, 0, 0), (1, 1, 0)


def propagation_term(ell, gate, L, n):
    """H_l = I(x)|b><b| - U(x)|a><b| - U^dag(x)|b><a| + I(x)|a><a| with b/a the
    clock patterns before/after step l, as a single term on gate + clock qubits."""
    if max(gate.targets) >= n:
        raise ValidationError(f"gate targets {gate.targets} outside {n} computation qubits")
    clocks, before, after = propagation_clock_states(ell, L)
    u = gate.unitary
    eye = np.eye(u.shape[0])
    m = (
        np.kron(eye, _basis_ketbra(before, before))
        - np.kron(u, _basis_ketbra(after, before))
        - np.kron(u.conj().T, _basis_ketbra(before, after))
        + np.kron(eye, _basis_ketbra(after, after))
    )
    sites = tuple(gate.targets) + tuple(n + c - 1 for c in clocks)
    term = make_term(sites, m, 2, 1.0, f"prop:{ell}")
    return HamiltonianSum(n + L, 2, [term])


def _sum(N, parts, coefficient=1.0):
    terms = []
    for p in parts:
        terms.extend(t.with_coefficient(coefficient * t.coefficient) for t in p.terms)
    return HamiltonianSum(N, 2, terms)


def build_5local(circuit, L_original=None, epsilon=None):
    """Compile ``circuit`` to the five-local program (L = 1 is padded to 2).

    ``epsilon`` is recorded as metadata only.
    """
    circuit = ensure_min_length(circuit)
    n, L = circuit.n, circuit.L
    if n + L > MAX_PARTICLES:
        raise GuardError("max_particles", f"n+L = {n + L} exceeds {MAX_PARTICLES}")
    N = n + L
    h_clock = clock_term(L, n)
    h_input = input_term(n, L)
    h_init = _sum(N, [clockinit_term(L, n), h_input, h_clock])
    props = _sum(N, [propagation_term(l, g, L, n) for l, g in enumerate(circuit.gates, 1)], 0.5)
    h_final = props + _sum(N, [h_input, h_clock])
    return AdiabaticProgram(
        "5local",
        h_init,
        h_final,
        n=n,
        L=L,
        k=NOMINAL_K["5local"],
        epsilon=epsilon,
        L_original=L_original if L_original is not None else L,
        circuit=circuit,
    )
