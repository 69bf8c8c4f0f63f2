"""k-local Hermitian terms, their sums, sparse assembly and matrix-free action.

A ``HamiltonianSum`` lives on ``N`` particles of dimension ``d``; particle 0
is the most significant digit of the global index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import GuardError, ValidationError

__all__ = [
    "LocalTerm",
    "HamiltonianSum",
    "AdiabaticProgram",
    "make_term",
    "projector",
    "assemble",
    "dense",
    "apply",
    "at",
    "norm_bound",
    "compress",
    "ASSEMBLY_CAP",
    "NOMINAL_K",
]

HERMITIAN_TOL = 1e-12
ASSEMBLY_CAP = 2 ** 20
NNZ_CAP = 60_000_000
FLAVORS = ("5local", "3local", "grid")
NOMINAL_K = {"5local": 5, "3local": 3, "grid": 2}


@dataclass(frozen=True)
class LocalTerm:
    support: tuple
    matrix: np.ndarray = field(repr=False)
    coefficient: float = 1.0
    label: str = ""

    def __post_init__(self):
        support = tuple(int(x) for x in self.support)
        object.__setattr__(self, "support", support)
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "coefficient", float(self.coefficient))
        if list(support) != sorted(set(support)):
            raise ValidationError(f"term {self.label!r}: support {support} must be sorted and distinct")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"term {self.label!r}: matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValidationError(f"term {self.label!r}: matrix is not Hermitian")

    @property
    def k(self):
        return len(self.support)

    def with_coefficient(self, c):
        return LocalTerm(self.support, self.matrix, c, self.label)

    def key(self):
        return (self.support, self.label, self.matrix.shape, self.matrix.tobytes())


def make_term(sites, matrix, d=2, coefficient=1.0, label=""):
    """Build a term from ``matrix`` given in the order of ``sites`` (any order).

    The matrix is permuted so that its tensor factors follow sorted support.
    """
    sites = tuple(int(s) for s in sites)
    k = len(sites)
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (d ** k, d ** k):
        raise ValidationError(f"matrix shape {m.shape} does not fit {k} particles of dimension {d}")
    order = sorted(range(k), key=lambda t: sites[t])
    if order != list(range(k)):
        t = m.reshape((d,) * (2 * k))
        t = t.transpose(order + [k + o for o in order])
        m = t.reshape(d ** k, d ** k)
    return LocalTerm(tuple(sites[o] for o in order), m, coefficient, label)


def projector(d, *levels):
    """Diagonal projector onto the given single-particle levels."""
    p = np.zeros((d, d), dtype=complex)
    for lv in levels:
        p[lv, lv] = 1.0
    return p


@dataclass(frozen=True)
class HamiltonianSum:
    N: int
    d: int
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.support and t.support[-1] >= self.N:
                raise ValidationError(f"term {t.label!r} support {t.support} outside [0, {self.N})")
            if t.matrix.shape[0] != self.d ** t.k:
                raise ValidationError(
                    f"term {t.label!r} matrix side {t.matrix.shape[0]} != {self.d}^{t.k}"
                )

    @property
    def dim(self):
        return self.d ** self.N

    @property
    def locality(self):
        return max((t.k for t in self.terms), default=0)

    def __add__(self, other):
        if (self.N, self.d) != (other.N, other.d):
            raise ValidationError("cannot add sums on different spaces")
        return HamiltonianSum(self.N, self.d, self.terms + other.terms)

    def scaled(self, c):
        return HamiltonianSum(self.N, self.d, tuple(t.with_coefficient(c * t.coefficient) for t in self.terms))

    def select(self, predicate):
        return HamiltonianSum(self.N, self.d, tuple(t for t in self.terms if predicate(t)))


@dataclass(frozen=True)
class AdiabaticProgram:
    """The pair (H_init, H_final) and construction metadata.

    ``k`` is the declared locality: every term acts on at most k particles
    (short circuits can come out below the flavour's nominal value).

    ``circuit`` is the (padded) circuit the program was compiled from, when
    known; the spectral and evolution modules use it to build the history
    basis. ``L_original`` is the gate count before identity padding.
    """

    flavor: str
    h_init: HamiltonianSum
    h_final: HamiltonianSum
    n: int
    L: int
    k: int
    epsilon: float | None = None
    J: float | None = None
    L_original: int | None = None
    circuit: object = None
    R: int | None = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValidationError(f"unknown flavor {self.flavor!r}")
        a, b = self.h_init, self.h_final
        if (a.N, a.d) != (b.N, b.d):
            raise ValidationError("h_init and h_final live on different spaces")
        actual = max(a.locality, b.locality)
        if actual > self.k:
            raise ValidationError(f"declared locality {self.k} but a term acts on {actual} particles")
        if self.L_original is None:
            object.__setattr__(self, "L_original", self.L)

    @property
    def N(self):
        return self.h_init.N

    @property
    def d(self):
        return self.h_init.d

    @property
    def dim(self):
        return self.h_init.dim


# ---------------------------------------------------------------------------


def _digit_offsets(support, N, d):
    return np.array([d ** (N - 1 - s) for s in support], dtype=np.int64)


def _rest_indices(support, N, d):
    """Global indices of all configurations with the support digits set to 0."""
    rest = [p for p in range(N) if p not in set(support)]
    idx = np.zeros(1, dtype=np.int64)
    for p in rest:
        idx = (idx[:, None] + np.arange(d, dtype=np.int64)[None, :] * d ** (N - 1 - p)).reshape(-1)
    return idx


def _local_offsets(k, offsets, d):
    """Global offset contributed by each local basis index of a k-site term."""
    loc = np.zeros(1, dtype=np.int64)
    for t in range(k):
        loc = (loc[:, None] + np.arange(d, dtype=np.int64)[None, :] * offsets[t]).reshape(-1)
    return loc


def assemble(h, cap=ASSEMBLY_CAP):
    """Sparse CSR matrix of ``h`` on the full d**N space."""
    dim = h.dim
    if dim > cap:
        raise GuardError("assembly_cap", f"dimension {dim} exceeds assembly cap {cap}; use apply()")
    nnz_est = sum(int(np.count_nonzero(t.matrix)) * (dim // t.matrix.shape[0]) for t in h.terms)
    if nnz_est > NNZ_CAP:
        raise GuardError("assembly_density", f"~{nnz_est} nonzeros exceeds density guard {NNZ_CAP}")
    rows, cols, vals = [], [], []
    for t in h.terms:
        if t.coefficient == 0.0:
            continue
        base = _rest_indices(t.support, h.N, h.d)
        loc = _local_offsets(t.k, _digit_offsets(t.support, h.N, h.d), h.d)
        a, b = np.nonzero(t.matrix)
        for i, j in zip(a, b):
            rows.append(base + loc[i])
            cols.append(base + loc[j])
            vals.append(np.full(base.size, t.coefficient * t.matrix[i, j]))
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=complex)
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return m.tocsr()  # duplicates are summed


def dense(h, cap=4096):
    if h.dim > cap:
        raise GuardError("dense_cap", f"dimension {h.dim} exceeds dense cap {cap}")
    return assemble(h).toarray()


def apply(h, v):
    """Matrix-free ``h @ v`` for a vector or a (dim, m) block of vectors."""
    v = np.asarray(v)
    if v.shape[0] != h.dim:
        raise ValidationError(f"vector length {v.shape[0]} != space dimension {h.dim}")
    extra = v.shape[1:]
    psi = v.astype(complex, copy=False).reshape((h.d,) * h.N + extra)
    out = np.zeros_like(psi)
    for t in h.terms:
        if t.coefficient == 0.0:
            continue
        k = t.k
        if k == 0:
            out += t.coefficient * t.matrix[0, 0] * psi
            continue
        m = t.matrix.reshape((h.d,) * (2 * k))
        r = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), list(t.support)))
        out += t.coefficient * np.moveaxis(r, list(range(k)), list(t.support))
    return out.reshape(v.shape)


def compress(h, indices):
    """Dense matrix of ``h`` compressed onto the coordinate subspace spanned
    by the given global basis indices (rows/cols in the order given)."""
    idx = np.asarray(indices, dtype=np.int64)
    m = idx.size
    digits = np.empty((m, h.N), dtype=np.int64)
    rem = idx.copy()
    for p in range(h.N - 1, -1, -1):
        digits[:, p] = rem % h.d
        rem //= h.d
    out = np.zeros((m, m), dtype=complex)
    for t in h.terms:
        if t.coefficient == 0.0:
            continue
        sup = list(t.support)
        others = [p for p in range(h.N) if p not in set(sup)]
        loc = np.zeros(m, dtype=np.int64)
        for s in sup:
            loc = loc * h.d + digits[:, s]
        if others:
            o = digits[:, others]
            agree = np.all(o[:, None, :] == o[None, :, :], axis=2)
        else:
            agree = np.ones((m, m), dtype=bool)
        out += t.coefficient * np.where(agree, t.matrix[np.ix_(loc, loc)], 0.0)
    return out


def at(program, s):
    """H(s) = (1-s) H_init + s H_final, merging terms shared by both ends."""
    if not (0.0 <= s <= 1.0):
        raise ValidationError(f"s must lie in [0, 1], got {s}")
    merged = {}
    order = []
    for w, h in ((1.0 - s, program.h_init), (s, program.h_final)):
        for t in h.terms:
            key = t.key()
            if key not in merged:
                merged[key] = [t, 0.0]
                order.append(key)
            merged[key][1] += w * t.coefficient
    terms = tuple(merged[k][0].with_coefficient(merged[k][1]) for k in order if merged[k][1] != 0.0)
    return HamiltonianSum(program.h_init.N, program.h_init.d, terms)


def norm_bound(h):
    """Triangle-inequality bound sum |c| ||term|| on the operator norm."""
    total = 0.0
    for t in h.terms:
        if t.coefficient:
            total += abs(t.coefficient) * float(np.linalg.norm(t.matrix, 2))
    return total
