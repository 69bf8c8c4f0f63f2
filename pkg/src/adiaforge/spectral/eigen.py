"""Low-lying eigenpairs of Hermitian operators given densely, sparsely or matrix-free."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NumericalError, ValidationError
from ..local_hamiltonian import HamiltonianSum, apply, assemble

__all__ = ["Spectrum", "eigen_low", "fix_phase", "as_operator", "DENSE_MAX", "DEGENERACY_TOL", "RESIDUAL_TOL"]

DENSE_MAX = 4096
DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residuals: np.ndarray | None = None
    degeneracy_tol: float = DEGENERACY_TOL

    @property
    def ground_energy(self):
        return float(self.eigenvalues[0])

    @property
    def gap(self):
        if self.eigenvalues.size < 2:
            raise ValidationError("gap needs at least two eigenvalues")
        d = float(self.eigenvalues[1] - self.eigenvalues[0])
        return 0.0 if d < self.degeneracy_tol else d

    @property
    def degenerate(self):
        return self.gap == 0.0

    @property
    def ground_state(self):
        if self.eigenvectors is None:
            raise ValidationError("spectrum computed without eigenvectors")
        return self.eigenvectors[:, 0]


def fix_phase(v):
    """Rotate so the largest-magnitude entry (lowest index on ties) is real positive."""
    v = np.asarray(v, dtype=complex)
    i = int(np.argmax(np.abs(v)))
    if abs(v[i]) == 0:
        return v
    return v * (abs(v[i]) / v[i])


def as_operator(H):
    """(dimension, matvec on blocks, dense-or-None getter) for supported inputs."""
    if isinstance(H, HamiltonianSum):
        return H.dim, lambda x: apply(H, x), lambda: assemble(H).toarray()
    if sp.issparse(H):
        return H.shape[0], lambda x: H @ x, lambda: H.toarray()
    if isinstance(H, spla.LinearOperator):
        return H.shape[0], lambda x: H @ x, None
    a = np.asarray(H)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"operator must be square, got shape {a.shape}")
    return a.shape[0], lambda x: a @ x, lambda: a


def eigen_low(H, k=2, vectors=True, dense_max=DENSE_MAX, tol=RESIDUAL_TOL):
    """Lowest ``k`` eigenpairs, dense below ``dense_max`` and Lanczos above.

    The residual check is relative to max(1, |lambda|) so that large penalty
    scales do not trip it on roundoff alone.
    """
    dim, matvec, getter = as_operator(H)
    k = min(k, dim)
    if k < 1:
        raise ValidationError("k must be at least 1")
    if dim <= dense_max and getter is not None:
        a = getter()
        if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(a), initial=0.0)):
            raise ValidationError("operator is not Hermitian")
        if vectors:
            w, v = np.linalg.eigh(a)
            w, v = w[:k], v[:, :k]
        else:
            return Spectrum(np.linalg.eigvalsh(a)[:k])
    else:
        op = spla.LinearOperator((dim, dim), matvec=matvec, matmat=matvec, dtype=complex)
        ncv = min(dim, max(2 * k + 1, 20))
        try:
            w, v = spla.eigsh(op, k=k, which="SA", tol=tol * 1e-2, maxiter=10 * dim, ncv=ncv)
        except spla.ArpackNoConvergence as exc:
            raise NumericalError(f"iterative eigensolver did not converge: {exc}") from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    v = np.column_stack([fix_phase(v[:, i]) for i in range(v.shape[1])])
    res = np.linalg.norm(matvec(v) - v * w[None, :], axis=0)
    limit = tol * np.maximum(1.0, np.abs(w))
    if np.any(res > limit):
        raise NumericalError(f"eigen residuals {res.tolist()} exceed {tol:g} (relative)")
    return Spectrum(np.asarray(w, dtype=float), v if vectors else None, res)
