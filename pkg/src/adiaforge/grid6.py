"""Six-state particles on an n x (R+1) grid: legal shapes, the pairwise rule
table, the history basis and the nearest-neighbour program.

Sites are addressed as (row, col) with rows 1..n top-down and columns 0..R
left-right; the particle index is row-major, ``(row - 1) * (R + 1) + col``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .circuit import GridLayoutCircuit, simulate
from .errors import GuardError, ValidationError
from .kitaev3 import J_WARN, default_J
from .local_hamiltonian import NOMINAL_K, AdiabaticProgram, HamiltonianSum, LocalTerm, norm_bound, projector

__all__ = [
    "Phase",
    "ParticleState",
    "GridShape",
    "GridProgram",
    "RULES",
    "legal_shape",
    "passes_rules",
    "enumerate_legal",
    "rule_pass_set",
    "shape_discrepancy",
    "grid_gamma_basis",
    "grid_gamma_indices",
    "build_grid_program",
    "pad_grid_rounds",
    "shape_of_index",
    "site_index",
    "RULE_SET_MAX_SITES",
]

RULE_SET_MAX_SITES = 10
VECTOR_CAP = 6 ** 8


class Phase(IntEnum):
    UNBORN = 0
    FIRST = 1
    SECOND = 2
    DEAD = 3

    @property
    def char(self):
        return "OFSD"[self]


class ParticleState(IntEnum):
    UNBORN = 0
    UP = 1
    DOWN = 2
    UP2 = 3
    DOWN2 = 4
    DEAD = 5

    @property
    def phase(self):
        return _STATE_PHASE[self]


_STATE_PHASE = {
    ParticleState.UNBORN: Phase.UNBORN,
    ParticleState.UP: Phase.FIRST,
    ParticleState.DOWN: Phase.FIRST,
    ParticleState.UP2: Phase.SECOND,
    ParticleState.DOWN2: Phase.SECOND,
    ParticleState.DEAD: Phase.DEAD,
}
PHASE_LEVELS = {
    Phase.UNBORN: (ParticleState.UNBORN,),
    Phase.FIRST: (ParticleState.UP, ParticleState.DOWN),
    Phase.SECOND: (ParticleState.UP2, ParticleState.DOWN2),
    Phase.DEAD: (ParticleState.DEAD,),
}
# state code of a qubit value inside an active particle
ACTIVE_LEVEL = {
    Phase.FIRST: (ParticleState.UP, ParticleState.DOWN),
    Phase.SECOND: (ParticleState.UP2, ParticleState.DOWN2),
}

O, F, S, D = Phase.UNBORN, Phase.FIRST, Phase.SECOND, Phase.DEAD

# (group, orientation, pairs); horizontal pairs read (left, right), vertical (top, bottom)
RULES = (
    (1, "h", ((O, F), (O, S), (O, D))),
    (2, "h", ((O, D), (F, D), (S, D))),
    (3, "h", ((O, D), (D, O))),
    (4, "h", ((F, F), (F, S), (S, F), (S, S))),
    (5, "v", ((O, S), (F, S), (D, S))),
    (6, "v", ((F, O), (F, S), (F, D))),
    (7, "v", ((O, D), (D, O))),
    (8, "v", ((S, O), (D, F))),
)


def _forbidden(orientation):
    out = []
    for _, o, pairs in RULES:
        if o == orientation:
            out.extend(p for p in pairs if p not in out)
    return tuple(out)


FORBIDDEN_H = _forbidden("h")
FORBIDDEN_V = _forbidden("v")


@dataclass(frozen=True)
class GridShape:
    phases: tuple  # n rows of R+1 Phase values

    def __post_init__(self):
        rows = tuple(tuple(Phase(p) for p in row) for row in self.phases)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValidationError("shape rows must be non-empty and of equal length")
        object.__setattr__(self, "phases", rows)

    @property
    def n(self):
        return len(self.phases)

    @property
    def R(self):
        return len(self.phases[0]) - 1

    def __getitem__(self, rc):
        row, col = rc
        return self.phases[row - 1][col]

    def rows(self):
        return ["".join(p.char for p in row) for row in self.phases]

    def __str__(self):
        return "/".join(self.rows())

    def active_sites(self):
        """(row, col) of first/second phase particles, top to bottom."""
        return [
            (i + 1, c)
            for i, row in enumerate(self.phases)
            for c, p in enumerate(row)
            if p in (F, S)
        ]

    @classmethod
    def from_rows(cls, rows):
        return cls(tuple(tuple(Phase("OFSD".index(ch)) for ch in row) for row in rows))


def site_index(row, col, R):
    return (row - 1) * (R + 1) + col


def legal_shape(ell, n, R):
    """Shape of clock value ``ell`` in the snake enumeration."""
    L = 2 * n * R
    if not 0 <= ell <= L:
        raise ValidationError(f"clock value {ell} outside [0, {L}]")
    r, rem = divmod(ell, 2 * n)
    grid = [[O] * (R + 1) for _ in range(n)]
    for i in range(n):
        for c in range(r):
            grid[i][c] = D
    if rem <= n:
        k = rem
        for i in range(n):
            grid[i][r] = S if i < k else F
    else:
        k = rem - n
        for i in range(n):
            if i < n - k:
                grid[i][r] = S
            else:
                grid[i][r] = D
                grid[i][r + 1] = F
    return GridShape(tuple(tuple(row) for row in grid))


def enumerate_legal(n, R):
    return [legal_shape(ell, n, R) for ell in range(2 * n * R + 1)]


def _adjacent_pairs(n, R):
    """Yield (orientation, (row, col), (row, col)) over all neighbouring sites."""
    for i in range(1, n + 1):
        for c in range(R):
            yield "h", (i, c), (i, c + 1)
    for i in range(1, n):
        for c in range(R + 1):
            yield "v", (i, c), (i + 1, c)


def passes_rules(shape):
    """(ok, violations) where each violation is (group, orientation, site_a, site_b, pair)."""
    violations = []
    for orient, a, b in _adjacent_pairs(shape.n, shape.R):
        pair = (shape[a], shape[b])
        for group, o, pairs in RULES:
            if o == orient and pair in pairs:
                violations.append((group, orient, a, b, tuple(p.char for p in pair)))
    return (not violations, violations)


def rule_pass_set(n, R):
    """Every phase assignment that avoids all forbidden pairs (brute force)."""
    sites = n * (R + 1)
    if sites > RULE_SET_MAX_SITES:
        raise GuardError("rule_set_sites", f"n(R+1) = {sites} exceeds {RULE_SET_MAX_SITES}")
    codes = np.arange(4 ** sites, dtype=np.int64)
    digits = np.empty((codes.size, sites), dtype=np.int8)
    rem = codes
    for p in range(sites - 1, -1, -1):
        digits[:, p] = rem % 4
        rem = rem // 4
    bad_h = np.zeros((4, 4), dtype=bool)
    for a, b in FORBIDDEN_H:
        bad_h[a, b] = True
    bad_v = np.zeros((4, 4), dtype=bool)
    for a, b in FORBIDDEN_V:
        bad_v[a, b] = True
    bad = np.zeros(codes.size, dtype=bool)
    for orient, a, b in _adjacent_pairs(n, R):
        table = bad_h if orient == "h" else bad_v
        bad |= table[digits[:, site_index(*a, R)], digits[:, site_index(*b, R)]]
    out = set()
    for row in digits[~bad]:
        out.add(GridShape(tuple(tuple(int(x) for x in row[i * (R + 1):(i + 1) * (R + 1)]) for i in range(n))))
    return out


def shape_discrepancy(n, R):
    """Shapes passing every pairwise rule that are not in the ell-enumeration."""
    legal = set(enumerate_legal(n, R))
    extra = rule_pass_set(n, R) - legal
    return sorted(extra, key=str)


# ---------------------------------------------------------------------------
# history basis


def _shape_base_index(shape):
    """Global index with inactive sites set and active sites at level 0 of their phase,
    plus the per-active-site (offset for bit 1) list, top to bottom."""
    n, R = shape.n, shape.R
    N = n * (R + 1)
    base = 0
    bit_offsets = []
    for i in range(1, n + 1):
        for c in range(R + 1):
            ph = shape[i, c]
            weight = 6 ** (N - 1 - site_index(i, c, R))
            if ph in (F, S):
                lo, hi = ACTIVE_LEVEL[ph]
                base += int(lo) * weight
                bit_offsets.append((int(hi) - int(lo)) * weight)
            else:
                base += int(PHASE_LEVELS[ph][0]) * weight
    return base, bit_offsets


def _shape_indices(shape):
    """Global indices of the 2^n basis states of ``shape``, ordered by the
    computational index read top to bottom (first active row most significant)."""
    base, offs = _shape_base_index(shape)
    n = len(offs)
    idx = np.full(2 ** n, base, dtype=np.int64)
    for x in range(2 ** n):
        for t, off in enumerate(offs):
            if (x >> (n - 1 - t)) & 1:
                idx[x] += off
    return idx


def grid_gamma_indices(grid_circuit, j):
    """Sparse form of the history basis: per ell, (indices, amplitudes)."""
    n, R = grid_circuit.n, grid_circuit.R
    trace = simulate(grid_circuit.as_circuit(), j)
    out = []
    for ell, alpha in enumerate(trace.states):
        out.append((_shape_indices(legal_shape(ell, n, R)), alpha))
    return out


def grid_gamma_basis(grid_circuit, j):
    """gamma^j_0..gamma^j_L as dense 6^(n(R+1)) vectors (columns of the returned array)."""
    n, R = grid_circuit.n, grid_circuit.R
    if not 0 <= j < 2 ** n:
        raise ValidationError(f"input index {j} outside [0, {2 ** n})")
    dim = 6 ** (n * (R + 1))
    if dim > VECTOR_CAP:
        raise GuardError("grid_vector_cap", f"dimension {dim} exceeds {VECTOR_CAP}")
    cols = grid_gamma_indices(grid_circuit, j)
    B = np.zeros((dim, len(cols)), dtype=complex)
    for ell, (idx, amp) in enumerate(cols):
        B[idx, ell] = amp
    return B


def shape_of_index(index, n, R):
    """Phase shape and active-bit readout of a global basis index."""
    N = n * (R + 1)
    states = []
    for _ in range(N):
        states.append(index % 6)
        index //= 6
    states.reverse()
    phases = [_STATE_PHASE[ParticleState(s)] for s in states]
    shape = GridShape(tuple(tuple(phases[i * (R + 1):(i + 1) * (R + 1)]) for i in range(n)))
    return shape, states


# ---------------------------------------------------------------------------
# Hamiltonian


def _site_proj(*levels):
    return projector(6, *[int(x) for x in levels])


def _phase_proj(phase):
    return _site_proj(*PHASE_LEVELS[phase])


def _pair_proj(top, bottom):
    return np.kron(_phase_proj(top), _phase_proj(bottom))


def _ket(a, b=None):
    v = np.zeros(6 if b is None else 36, dtype=complex)
    v[int(a) if b is None else int(a) * 6 + int(b)] = 1.0
    return v


@dataclass(frozen=True)
class GridProgram(AdiabaticProgram):
    """Grid flavour program; ``R`` columns beyond column 0."""

    def site_index(self, row, col):
        return site_index(row, col, self.R)


class _Terms:
    def __init__(self, R):
        self.R = R
        self.items = []

    def one(self, site, m, label, c=1.0):
        self.items.append(LocalTerm((site_index(*site, self.R),), m, c, label))

    def two(self, a, b, m, label, c=1.0):
        ia, ib = site_index(*a, self.R), site_index(*b, self.R)
        if ia > ib:
            raise ValidationError("pair terms must be given in increasing site order")
        self.items.append(LocalTerm((ia, ib), m, c, label))


def _hopping(before, after, u):
    """Hermitian block with <after_q'|H|before_q> = -U[q', q] on the given kets."""
    dim = before[0].size
    m = np.zeros((dim, dim), dtype=complex)
    for q in range(len(before)):
        for qp in range(len(after)):
            m += -u[qp, q] * np.outer(after[qp], before[q].conj())
    return m + m.conj().T


def _downward_terms(ts, ell, k, r, n, u):
    lab = f"prop:{ell}"
    # before identifier: top k-1 of column r second, row k first
    if k == 1:
        ts.one((1, r), _phase_proj(F), lab + ":before")
    else:
        ts.two((k - 1, r), (k, r), _pair_proj(S, F), lab + ":before")
    if k == n:
        ts.one((n, r), _phase_proj(S), lab + ":after")
    else:
        ts.two((k, r), (k + 1, r), _pair_proj(S, F), lab + ":after")
    UP, DN, UP2, DN2 = ParticleState.UP, ParticleState.DOWN, ParticleState.UP2, ParticleState.DOWN2
    if k == 1:
        before = [_ket(UP), _ket(DN)]
        after = [_ket(UP2), _ket(DN2)]
        ts.one((1, r), _hopping(before, after, u), lab + ":hop")
    else:
        before = [_ket(t, b) for t in (UP2, DN2) for b in (UP, DN)]
        after = [_ket(t, b) for t in (UP2, DN2) for b in (UP2, DN2)]
        ts.two((k - 1, r), (k, r), _hopping(before, after, u), lab + ":hop")


def _upward_terms(ts, ell, k, r, n):
    lab = f"prop:{ell}"
    i = n - k + 1
    if k == 1:
        ts.one((n, r), _phase_proj(S), lab + ":before")
    else:
        ts.two((i, r), (i + 1, r), _pair_proj(S, D), lab + ":before")
    if k == n:
        ts.one((1, r + 1), _phase_proj(F), lab + ":after")
    else:
        ts.two((i - 1, r + 1), (i, r + 1), _pair_proj(O, F), lab + ":after")
    UNB, UP, DN, UP2, DN2, DEAD = list(ParticleState)
    before = [_ket(UP2, UNB), _ket(DN2, UNB)]
    after = [_ket(DEAD, UP), _ket(DEAD, DN)]
    ts.two((i, r), (i, r + 1), _hopping(before, after, np.eye(2)), lab + ":hop")


def _clock_terms(ts, n, R, J):
    for orient, a, b in _adjacent_pairs(n, R):
        for pa, pb in FORBIDDEN_H if orient == "h" else FORBIDDEN_V:
            ts.two(a, b, _pair_proj(pa, pb), f"clock:{orient}:{pa.char}{pb.char}", J)


def build_grid_program(grid_circuit, epsilon=1.0, J=None, L_original=None, J_power=6):
    """Nearest-neighbour program on 6-state particles for a grid-layout circuit."""
    if not isinstance(grid_circuit, GridLayoutCircuit):
        raise ValidationError("build_grid_program needs a GridLayoutCircuit (see to_grid_layout)")
    n, R, L = grid_circuit.n, grid_circuit.R, grid_circuit.L
    if L < 2:
        raise ValidationError(f"grid program needs L >= 2, got {L}")
    N = n * (R + 1)
    if N > 40:
        raise GuardError("max_particles", f"n(R+1) = {N} exceeds 40")

    init_rest = _Terms(R)
    init_rest.one((1, 0), np.eye(6) - _site_proj(ParticleState.UP, ParticleState.DOWN), "clockinit")
    inputs = _Terms(R)
    for i in range(1, n + 1):
        inputs.one((i, 0), _site_proj(ParticleState.DOWN), "input")
    props = _Terms(R)
    for ell, g in enumerate(grid_circuit.gates, 1):
        r, rem = divmod(ell - 1, 2 * n)
        k = rem + 1
        if k <= n:
            _downward_terms(props, ell, k, r, n, g.unitary)
        else:
            _upward_terms(props, ell, k - n, r, n)

    h_in = HamiltonianSum(N, 6, inputs.items)
    h_init_rest = HamiltonianSum(N, 6, init_rest.items) + h_in
    h_final_rest = HamiltonianSum(N, 6, props.items).scaled(0.5) + h_in
    K = max(norm_bound(h_init_rest), norm_bound(h_final_rest))
    if J is None:
        J = default_J(epsilon, L, J_power)
    J = float(J)
    if J <= 2 * K:
        raise ValidationError(f"J = {J} must exceed 2K = {2 * K}")
    if J > J_WARN:
        import logging

        logging.getLogger(__name__).warning("J = %.3g exceeds %.0e", J, J_WARN)
    clock = _Terms(R)
    _clock_terms(clock, n, R, J)
    h_clock = HamiltonianSum(N, 6, clock.items)
    h_init = h_init_rest + h_clock
    h_final = h_final_rest + h_clock
    return GridProgram(
        "grid",
        h_init,
        h_final,
        n=n,
        L=L,
        k=NOMINAL_K["grid"],
        epsilon=epsilon,
        J=J,
        L_original=L_original if L_original is not None else L,
        circuit=grid_circuit,
        R=R,
    )


def pad_grid_rounds(grid_circuit, epsilon):
    """Append whole identity rounds covering at least ceil((2/eps - 1) L) gates."""
    from .circuit import identity_gate, padding_count, slot_targets

    n = grid_circuit.n
    extra = padding_count(grid_circuit.L, epsilon)
    rounds = -(-extra // (2 * n))
    gates = list(grid_circuit.gates)
    for _ in range(rounds):
        gates.extend(identity_gate(*slot_targets(s, n)) for s in range(2 * n))
    return GridLayoutCircuit(n, grid_circuit.R + rounds, tuple(gates))
