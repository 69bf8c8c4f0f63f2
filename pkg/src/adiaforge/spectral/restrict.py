"""History-state bases, restriction B^dag H B and the closed-form S0 matrices.

A basis is stored sparsely: the coordinate indices it touches and the
coefficient block on them, so restrictions of huge spaces stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..circuit import clock_index, simulate
from ..errors import GuardError, ValidationError
from ..local_hamiltonian import HamiltonianSum, apply, at, compress

__all__ = [
    "SubspaceBasis",
    "RestrictedOperator",
    "s0_closed_form",
    "history_basis",
    "gamma_basis_5local",
    "legal_clock_basis",
    "restrict",
    "invariance_residual",
    "block_decompose_S",
    "BlockDecomposition",
    "restricted_endpoints",
]

ORTHO_TOL = 1e-10
DENSE_VECTOR_CAP = 2 ** 22


@dataclass(frozen=True)
class SubspaceBasis:
    dim: int
    indices: np.ndarray  # coordinates touched, strictly increasing not required
    coeffs: np.ndarray  # (len(indices), m)
    labels: tuple = ()

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != idx.size:
            raise ValidationError("coefficient block does not match index list")
        if np.unique(idx).size != idx.size:
            raise ValidationError("basis indices must be distinct")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", c)
        gram = c.conj().T @ c
        err = np.max(np.abs(gram - np.eye(c.shape[1])), initial=0.0)
        if err > ORTHO_TOL:
            raise ValidationError(f"basis is not orthonormal (max Gram error {err:.3g})")

    @property
    def m(self):
        return self.coeffs.shape[1]

    def dense(self):
        if self.dim > DENSE_VECTOR_CAP:
            raise GuardError("dense_vector_cap", f"dimension {self.dim} exceeds {DENSE_VECTOR_CAP}")
        B = np.zeros((self.dim, self.m), dtype=complex)
        B[self.indices] = self.coeffs
        return B

    def columns(self, cols):
        cols = list(cols)
        return SubspaceBasis(self.dim, self.indices, self.coeffs[:, cols], tuple(self.labels[c] for c in cols) if self.labels else ())

    def project(self, v):
        """Coordinates B^dag v of a full vector (or (dim, k) block)."""
        return self.coeffs.conj().T @ np.asarray(v)[self.indices]

    def lift(self, x):
        """B x as a full vector."""
        out = np.zeros((self.dim,) + np.shape(x)[1:], dtype=complex)
        out[self.indices] = self.coeffs @ x
        return out


@dataclass(frozen=True)
class RestrictedOperator:
    basis: SubspaceBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10 * scale:
            raise ValidationError("restricted matrix is not Hermitian")


def s0_closed_form(s, L):
    """(1-s) diag(0,1,...,1) + s * (random-walk Laplacian with 1/2 corners)."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s must lie in [0, 1], got {s}")
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    init = np.eye(L + 1)
    init[0, 0] = 0.0
    fin = np.eye(L + 1) - 0.5 * (np.eye(L + 1, k=1) + np.eye(L + 1, k=-1))
    fin[0, 0] = fin[L, L] = 0.5
    return (1.0 - s) * init + s * fin


def _clock_positions(program):
    """Per clock value, the global indices of all computational states (ordered by comp index)."""
    n, L = program.n, program.L
    if program.flavor == "grid":
        from ..grid6 import _shape_indices, legal_shape

        return [_shape_indices(legal_shape(ell, n, program.R)) for ell in range(L + 1)]
    comp = np.arange(2 ** n, dtype=np.int64) * 2 ** L
    return [comp + clock_index(ell, L) for ell in range(L + 1)]


def _circuit_of(program):
    c = program.circuit
    if c is None:
        raise ValidationError("program carries no circuit; history basis unavailable")
    return c.as_circuit() if hasattr(c, "as_circuit") else c


def history_basis(program, j=None):
    """gamma^j_0..gamma^j_L (one j) or all j (j-major), stored on the legal-clock coordinates."""
    n, L = program.n, program.L
    circ = _circuit_of(program)
    pos = _clock_positions(program)
    indices = np.concatenate(pos)
    js = range(2 ** n) if j is None else [j]
    if j is not None and not 0 <= j < 2 ** n:
        raise ValidationError(f"input index {j} outside [0, {2 ** n})")
    blocks, labels = [], []
    w = 2 ** n
    for jj in js:
        trace = simulate(circ, jj)
        c = np.zeros((indices.size, L + 1), dtype=complex)
        for ell, alpha in enumerate(trace.states):
            c[ell * w:(ell + 1) * w, ell] = alpha
        blocks.append(c)
        labels.extend((jj, ell) for ell in range(L + 1))
    return SubspaceBasis(program.dim, indices, np.hstack(blocks), tuple(labels))


def gamma_basis_5local(circuit, j=0):
    """History basis for a bare circuit on n + L qubits (no program needed)."""
    from ..kitaev5 import build_5local

    return history_basis(build_5local(circuit), j)


def legal_clock_basis(program):
    """Coordinate basis of every computational state paired with every legal clock value."""
    indices = np.concatenate(_clock_positions(program))
    return SubspaceBasis(program.dim, indices, np.eye(indices.size), ())


def restrict(H, basis):
    """B^dag H B for H given as HamiltonianSum, sparse or dense matrix."""
    if isinstance(H, HamiltonianSum):
        if H.dim != basis.dim:
            raise ValidationError("operator and basis dimensions differ")
        C = compress(H, basis.indices)
    else:
        if H.shape[0] != basis.dim:
            raise ValidationError("operator and basis dimensions differ")
        sub = H[np.ix_(basis.indices, basis.indices)]
        C = sub.toarray() if sp.issparse(sub) else np.asarray(sub)
    M = basis.coeffs.conj().T @ C @ basis.coeffs
    return RestrictedOperator(basis, 0.5 * (M + M.conj().T))


def invariance_residual(H, basis):
    """Spectral norm of (I - B B^dag) H B."""
    if isinstance(H, HamiltonianSum):
        HB = apply(H, basis.dense())
    else:
        cols = H[:, basis.indices]
        HB = np.asarray(cols @ basis.coeffs)
    HB = np.asarray(HB)
    inside = np.zeros_like(HB)
    inside[basis.indices] = basis.coeffs @ (basis.coeffs.conj().T @ HB[basis.indices])
    return float(np.linalg.norm(HB - inside, 2))


def restricted_endpoints(program, basis):
    """(B^dag H_init B, B^dag H_final B); H_S(s) interpolates linearly between them."""
    return restrict(program.h_init, basis).matrix, restrict(program.h_final, basis).matrix


@dataclass(frozen=True)
class BlockDecomposition:
    s: float
    blocks: tuple  # RestrictedOperator per input j
    off_block_norm: float


def block_decompose_S(program, s):
    """Split H_S(s) into the per-input blocks and measure the cross-block residue."""
    basis = history_basis(program)
    full = restrict(at(program, s), basis).matrix
    w = program.L + 1
    nb = 2 ** program.n
    off = full.copy()
    blocks = []
    for j in range(nb):
        sl = slice(j * w, (j + 1) * w)
        blocks.append(RestrictedOperator(basis.columns(range(j * w, (j + 1) * w)), full[sl, sl]))
        off[sl, sl] = 0.0
    return BlockDecomposition(float(s), tuple(blocks), float(np.linalg.norm(off, 2)) if off.size else 0.0)
