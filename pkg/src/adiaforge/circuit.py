"""Quantum circuits: gates, state-vector simulation, history states, padding
and routing onto the round-based nearest-neighbour layout used by the grid
construction.

Basis convention used everywhere in the package: qubit 0 is the most
significant digit of a computational index, and clock registers are appended
after the computation qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, ValidationError

__all__ = [
    "Gate",
    "Circuit",
    "CircuitStateTrace",
    "GridLayoutCircuit",
    "STANDARD_GATES",
    "gate",
    "identity_gate",
    "random_unitary",
    "random_circuit",
    "simulate",
    "history_state",
    "clock_index",
    "pad_identities",
    "ensure_min_length",
    "to_grid_layout",
    "bell_circuit",
]

UNITARY_TOL = 1e-12
HISTORY_MAX_QUBITS = 24

_SQ2 = 1.0 / math.sqrt(2.0)

STANDARD_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


@dataclass(frozen=True)
class Gate:
    """A one- or two-qubit unitary.

    For two-qubit gates ``targets[0]`` is the more significant qubit of
    ``unitary``'s row/column index.
    """

    targets: tuple
    unitary: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        u = np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", u)
        if len(targets) not in (1, 2):
            raise ValidationError(f"gate {self.name}: arity must be 1 or 2, got {len(targets)}")
        if len(set(targets)) != len(targets):
            raise ValidationError(f"gate {self.name}: repeated target in {targets}")
        if min(targets) < 0:
            raise ValidationError(f"gate {self.name}: negative target in {targets}")
        side = 2 ** len(targets)
        if u.shape != (side, side):
            raise ValidationError(
                f"gate {self.name}: matrix shape {u.shape} does not match arity {len(targets)}"
            )
        err = np.max(np.abs(u.conj().T @ u - np.eye(side)))
        if err > UNITARY_TOL:
            raise ValidationError(f"gate {self.name}: not unitary (|U^dag U - I| = {err:.3e})")

    @property
    def arity(self):
        return len(self.targets)

    def is_identity(self, tol=1e-12):
        return bool(np.max(np.abs(self.unitary - np.eye(self.unitary.shape[0]))) <= tol)


def gate(name, *targets, matrix=None):
    """Build a named gate; ``matrix`` is required only for ``name="custom"``."""
    if name == "custom":
        if matrix is None:
            raise ValidationError("custom gate requires a matrix")
        return Gate(tuple(targets), matrix, "custom")
    if name not in STANDARD_GATES:
        raise ValidationError(f"unknown gate name {name!r}")
    u = STANDARD_GATES[name]
    if name == "I" and len(targets) == 2:
        u = np.eye(4, dtype=complex)
    return Gate(tuple(targets), u, name)


def identity_gate(*targets):
    return Gate(tuple(targets), np.eye(2 ** len(targets), dtype=complex), "I")


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise ValidationError(f"circuit needs at least one qubit, got n={self.n}")
        if len(self.gates) < 1:
            raise ValidationError("circuit needs at least one gate")
        for g in self.gates:
            if max(g.targets) >= self.n:
                raise ValidationError(
                    f"gate {g.name} targets {g.targets} outside [0, {self.n})"
                )

    @property
    def L(self):
        return len(self.gates)

    def final_state(self):
        return simulate(self).states[-1]


@dataclass(frozen=True)
class CircuitStateTrace:
    """alpha(0), ..., alpha(L) for some input basis state."""

    states: tuple

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]


def apply_gate(state, g, n):
    """Apply ``g`` to a 2**n state vector (or a batch with trailing axis)."""
    k = g.arity
    extra = state.shape[1:]
    psi = state.reshape((2,) * n + extra)
    u = g.unitary.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(g.targets)))
    out = np.moveaxis(out, list(range(k)), list(g.targets))
    return out.reshape(state.shape)


def simulate(circuit, input_index=0):
    """State after each gate, starting from the basis state ``input_index``."""
    dim = 2 ** circuit.n
    if not 0 <= input_index < dim:
        raise ValidationError(f"input index {input_index} outside [0, {dim})")
    psi = np.zeros(dim, dtype=complex)
    psi[input_index] = 1.0
    states = [psi]
    for g in circuit.gates:
        if max(g.targets) >= circuit.n:
            raise ValidationError(f"gate {g.name} does not fit on {circuit.n} qubits")
        psi = apply_gate(psi, g, circuit.n)
        states.append(psi)
    return CircuitStateTrace(tuple(states))


def clock_index(ell, L):
    """Index of the unary clock state 1^ell 0^(L-ell) (first clock qubit most significant)."""
    return (1 << L) - (1 << (L - ell))


def history_state(circuit, input_index=0):
    """Uniform superposition of alpha(ell) (x) |1^ell 0^(L-ell)> over ell = 0..L."""
    n, L = circuit.n, circuit.L
    if n + L > HISTORY_MAX_QUBITS:
        raise GuardError(
            "history_qubits", f"n+L = {n + L} exceeds {HISTORY_MAX_QUBITS} for a dense history state"
        )
    trace = simulate(circuit, input_index)
    eta = np.zeros((2 ** n, 2 ** L), dtype=complex)
    for ell, alpha in enumerate(trace.states):
        eta[:, clock_index(ell, L)] = alpha
    return eta.reshape(-1) / math.sqrt(L + 1)


def padding_count(L, epsilon):
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    # (2/eps - 1) L can land a hair above an integer in floating point
    return max(0, math.ceil((2.0 / epsilon - 1.0) * L - 1e-9))


def pad_identities(circuit, epsilon):
    """Append ceil((2/epsilon - 1) L) identity gates on qubit 0."""
    extra = padding_count(circuit.L, epsilon)
    return Circuit(circuit.n, circuit.gates + tuple(identity_gate(0) for _ in range(extra)))


def ensure_min_length(circuit, minimum=2):
    """Pad with identities so the clock has at least ``minimum`` qubits."""
    if circuit.L >= minimum:
        return circuit
    extra = tuple(identity_gate(0) for _ in range(minimum - circuit.L))
    return Circuit(circuit.n, circuit.gates + extra)


def random_unitary(dim, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    # re-orthonormalise to keep |U^dag U - I| well under the gate tolerance
    u, _, vh = np.linalg.svd(q)
    return u @ vh


def random_circuit(n, L, rng, two_qubit_fraction=0.5):
    gates = []
    for _ in range(L):
        if n >= 2 and rng.random() < two_qubit_fraction:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate((int(a), int(b)), random_unitary(4, rng)))
        else:
            q = int(rng.integers(n))
            gates.append(Gate((q,), random_unitary(2, rng)))
    return Circuit(n, gates)


def bell_circuit():
    return Circuit(2, (gate("H", 0), gate("CNOT", 0, 1)))


# --------------------------------------------------------------------------
# grid layout


@dataclass(frozen=True)
class GridLayoutCircuit:
    """R rounds of 2n gates: a one-qubit gate on qubit 0, two-qubit gates on
    (i-1, i) for i = 1..n-1, then identities on qubits n-1, ..., 0."""

    n: int
    R: int
    gates: tuple

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        n, R = self.n, self.R
        if n < 1 or R < 1:
            raise ValidationError(f"grid layout needs n >= 1 and R >= 1, got n={n}, R={R}")
        if len(self.gates) != 2 * n * R:
            raise ValidationError(f"grid layout needs {2 * n * R} gates, got {len(self.gates)}")
        for pos, g in enumerate(self.gates):
            expected = slot_targets(pos % (2 * n), n)
            if g.targets != expected:
                raise ValidationError(
                    f"gate {pos} targets {g.targets}, layout requires {expected}"
                )
            if pos % (2 * n) >= n and not g.is_identity():
                raise ValidationError(f"gate {pos} must be the identity in the upward stage")

    @property
    def L(self):
        return len(self.gates)

    def as_circuit(self):
        return Circuit(self.n, self.gates)


def slot_targets(slot, n):
    """Targets of the 0-based ``slot`` inside a round of the grid layout."""
    if slot == 0:
        return (0,)
    if slot < n:
        return (slot - 1, slot)
    return (2 * n - 1 - slot,)


def _swap_conjugate(u):
    sw = STANDARD_GATES["SWAP"]
    return sw @ u @ sw


class _RoundBuilder:
    def __init__(self, n):
        self.n = n
        self.rounds = []
        self.cursor = n  # forces a fresh round on first placement

    def place(self, candidates):
        """candidates: list of (slot, Gate) alternatives realising the same action."""
        ok = [c for c in candidates if c[0] >= self.cursor]
        if not ok or not self.rounds:
            self.rounds.append([None] * (2 * self.n))
            ok = candidates
        slot, g = min(ok, key=lambda c: c[0])
        self.rounds[-1][slot] = g
        self.cursor = slot + 1

    def gates(self):
        out = []
        for rnd in self.rounds:
            for slot, g in enumerate(rnd):
                out.append(g if g is not None else identity_gate(*slot_targets(slot, self.n)))
        return out


def _one_qubit_candidates(u, p, n, name):
    cands = []
    if p == 0:
        cands.append((0, Gate((0,), u, name)))
        if n >= 2:
            cands.append((1, Gate((0, 1), np.kron(u, np.eye(2)), name)))
    else:
        cands.append((p, Gate((p - 1, p), np.kron(np.eye(2), u), name)))
        if p + 1 < n:
            cands.append((p + 1, Gate((p, p + 1), np.kron(u, np.eye(2)), name)))
    return cands


def to_grid_layout(circuit):
    """Route ``circuit`` onto the round layout with greedy adjacent swaps.

    Gates keep their order; unused slots become identities. Any qubit
    permutation left by routing is undone with trailing swaps, so the output
    computes the same final state on the same qubit labels.
    """
    n = circuit.n
    builder = _RoundBuilder(n)
    phys = list(range(n))  # logical -> physical wire

    def swap_adjacent(p):
        builder.place([(p + 1, Gate((p, p + 1), STANDARD_GATES["SWAP"], "SWAP"))])
        a, b = phys.index(p), phys.index(p + 1)
        phys[a], phys[b] = p + 1, p

    for g in circuit.gates:
        if g.arity == 1:
            builder.place(_one_qubit_candidates(g.unitary, phys[g.targets[0]], n, g.name))
            continue
        a, b = g.targets
        while abs(phys[a] - phys[b]) > 1:
            pb = phys[b]
            swap_adjacent(pb - 1 if phys[a] < pb else pb)
        pa, pb = phys[a], phys[b]
        u = g.unitary if pa < pb else _swap_conjugate(g.unitary)
        lo = min(pa, pb)
        builder.place([(lo + 1, Gate((lo, lo + 1), u, g.name))])

    # undo the residual permutation (bubble sort on physical wires)
    for _ in range(n):
        for p in range(n - 1):
            if phys.index(p) > phys.index(p + 1):
                swap_adjacent(p)

    gates = builder.gates()
    return GridLayoutCircuit(n, len(gates) // (2 * n), tuple(gates))
