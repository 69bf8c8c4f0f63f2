"""Perron mapping from Hamiltonians to Markov chains, conductance, monotonicity
and Gerschgorin discs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ValidationError
from .eigen import fix_phase

__all__ = [
    "MarkovChain",
    "perron_chain",
    "ConductanceReport",
    "conductance",
    "check_monotone",
    "GerschgorinReport",
    "gerschgorin",
    "EXHAUSTIVE_MAX",
]

EXHAUSTIVE_MAX = 20
NEG_TOL = 1e-12
TIE_TOL = 1e-12


@dataclass(frozen=True)
class MarkovChain:
    P: np.ndarray
    pi: np.ndarray
    mu: float
    alphas: np.ndarray
    Z: float
    lambda0: float

    @property
    def dim(self):
        return self.P.shape[0]

    def eigenvalues(self):
        """Spectrum of P, descending.

        The chain is reversible, so D P D^-1 with D = diag(sqrt(pi)) is
        symmetric; diagonalising that avoids the poor conditioning of P itself
        when pi spans many orders of magnitude.
        """
        r = np.sqrt(self.pi)
        S = r[:, None] * self.P / r[None, :]
        return np.linalg.eigvalsh(0.5 * (S + S.T))[::-1]

    def gap(self):
        w = self.eigenvalues()
        return float(w[0] - w[1])


def _primitive(G):
    """Wielandt: an irreducible nonnegative matrix is primitive iff G^((n-1)^2+1) > 0."""
    n = G.shape[0]
    A = (G > NEG_TOL).astype(np.int64)
    power = (n - 1) ** 2 + 1
    R = np.eye(n, dtype=np.int64)
    base = A
    while power:
        if power & 1:
            R = np.minimum(R @ base, 1)
        base = np.minimum(base @ base, 1)
        power >>= 1
    return bool(np.all(R > 0))


def _perron_vector(G, mu, anchor, rounds=3):
    """Perron vector with small entries accurate in the relative sense.

    Eigensolver output is only accurate relative to the largest entry, which
    ruins the ratios alpha_j / alpha_i once the vector decays geometrically.
    Instead fix alpha[anchor] = 1 and solve the remaining rows of
    (mu I - G) alpha = 0; that block is a nonsingular M-matrix, so the solution
    is positive. Repeating the solve on the diagonally rescaled matrix removes
    the residual scale imbalance.
    """
    n = G.shape[0]
    keep = np.array([i for i in range(n) if i != anchor], dtype=np.int64)
    alpha = np.ones(n)
    for _ in range(rounds):
        Gs = G * alpha[None, :] / alpha[:, None]
        x = np.ones(n)
        if keep.size:
            A = mu * np.eye(keep.size) - Gs[np.ix_(keep, keep)]
            x[keep] = np.linalg.solve(A, Gs[keep, anchor])
        if not np.all(np.isfinite(x)) or x.min() <= 0:
            raise NumericalError("Perron vector has non-positive entries")
        alpha = alpha * x
        alpha /= np.linalg.norm(alpha)
    return alpha


def perron_chain(M):
    """Chain P_ij = alpha_j G_ij / (mu alpha_i) for G = I - M."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("perron_chain needs a square matrix")
    if np.iscomplexobj(M) and np.max(np.abs(M.imag), initial=0.0) > NEG_TOL:
        raise ValidationError("perron_chain needs a real symmetric matrix")
    M = np.real(M)
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-10:
        raise ValidationError("perron_chain needs a symmetric matrix")
    G = np.eye(M.shape[0]) - M
    if G.min() < -NEG_TOL:
        i, j = np.unravel_index(np.argmin(G), G.shape)
        raise ValidationError(f"G = I - M has negative entry {G[i, j]:.3g} at ({i}, {j})")
    G = np.clip(G, 0.0, None)
    if not _primitive(G):
        raise ValidationError("G = I - M is not primitive (reducible or periodic)")
    w, v = np.linalg.eigh(G)
    mu = float(w[-1])
    if mu <= 0:
        raise NumericalError(f"Perron eigenvalue {mu} is not positive")
    alpha = _perron_vector(G, mu, int(np.argmax(np.abs(v[:, -1]))))
    P = (G * alpha[None, :]) / (mu * alpha[:, None])
    Z = float(alpha @ alpha)
    pi = alpha ** 2 / Z
    return MarkovChain(P, pi, mu, alpha, Z, float(1.0 - mu))


@dataclass(frozen=True)
class ConductanceReport:
    phi: float
    witness: tuple
    flow: float
    pi_B: float
    mode: str

    @property
    def bound(self):
        return 0.5 * self.phi ** 2

    def to_dict(self):
        return {"phi": self.phi, "witness_B": list(self.witness), "flow": self.flow, "bound": self.bound, "mode": self.mode}


def _best(masks, flows, weights, best):
    """Fold a chunk of subsets into the running (ratio, mask, flow, weight) minimum;
    near-ties go to the lowest mask."""
    ok = weights <= 0.5 + 1e-12
    if not np.any(ok):
        return best
    ratio = np.where(ok, flows / np.where(weights > 0, weights, 1.0), np.inf)
    near = np.nonzero(ratio <= ratio.min() + TIE_TOL)[0]
    k = int(near[np.argmin(masks[near])])
    cand = (float(ratio[k]), int(masks[k]), float(flows[k]), float(weights[k]))
    if best is None or cand[0] < best[0] - TIE_TOL:
        return cand
    return best


def conductance(chain, mode="exhaustive", chunk=1 << 16):
    """phi(P) = min F(B)/pi(B) over nonempty B with pi(B) <= 1/2.

    ``exhaustive`` scans all subsets (dimension <= 20); ``prefix`` only the
    cuts {0..k} and {k..d-1}, which upper-bounds phi.
    """
    P, pi = chain.P, chain.pi
    d = P.shape[0]
    Q = pi[:, None] * P
    if mode == "exhaustive":
        if d > EXHAUSTIVE_MAX:
            raise ValidationError(f"exhaustive conductance limited to dimension {EXHAUSTIVE_MAX}, got {d}")
        best = None
        bits = 1 << np.arange(d, dtype=np.int64)
        total = 1 << d
        for start in range(1, total - 1, chunk):
            masks = np.arange(start, min(start + chunk, total - 1), dtype=np.int64)
            X = ((masks[:, None] & bits[None, :]) != 0).astype(float)
            flows = np.einsum("mi,ij,mj->m", X, Q, 1.0 - X)
            weights = X @ pi
            best = _best(masks, flows, weights, best)
        phi, mask, flow, wB = best
        witness = tuple(i for i in range(d) if mask >> i & 1)
    elif mode == "prefix":
        cands = []
        for k in range(1, d):
            for B in (tuple(range(k)), tuple(range(d - k, d))):
                x = np.zeros(d)
                x[list(B)] = 1.0
                wB = float(x @ pi)
                if wB <= 0.5 + 1e-12:
                    f = float(x @ Q @ (1.0 - x))
                    cands.append((f / wB, sum(1 << i for i in B), B, f, wB))
        if not cands:
            raise ValidationError("no admissible prefix cut")
        phi, _, witness, flow, wB = min(cands, key=lambda c: (c[0], c[1]))
    else:
        raise ValidationError(f"unknown conductance mode {mode!r}")
    return ConductanceReport(float(phi), tuple(witness), float(flow), float(wB), mode)


def check_monotone(v, tol=1e-9):
    """Non-increasing and non-negative within ``tol`` after phase fixing."""
    v = fix_phase(np.asarray(v))
    if np.max(np.abs(v.imag), initial=0.0) > tol:
        return False
    r = v.real
    return bool(np.all(r >= -tol) and np.all(np.diff(r) <= tol))


@dataclass(frozen=True)
class GerschgorinReport:
    centers: np.ndarray
    radii: np.ndarray
    components: tuple  # (lo, hi, disc indices, eigenvalue count)
    contained: bool


def gerschgorin(H):
    """Discs of a Hermitian matrix (intervals on the real line) and their components."""
    H = np.asarray(H)
    c = np.real(np.diag(H))
    r = np.sum(np.abs(H), axis=1) - np.abs(np.diag(H))
    order = np.argsort(c - r, kind="stable")
    comps = []
    for i in order:
        lo, hi = c[i] - r[i], c[i] + r[i]
        if comps and lo <= comps[-1][1]:
            plo, phi_, idx = comps[-1]
            comps[-1] = (plo, max(phi_, hi), idx + [int(i)])
        else:
            comps.append((lo, hi, [int(i)]))
    ev = np.linalg.eigvalsh(H)
    slack = 1e-10 * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    out = []
    placed = 0
    for lo, hi, idx in comps:
        cnt = int(np.sum((ev >= lo - slack) & (ev <= hi + slack)))
        placed += cnt
        out.append((float(lo), float(hi), tuple(sorted(idx)), cnt))
    return GerschgorinReport(c, r, tuple(out), placed == ev.size)
