"""Numerical certificates for the penalty (leak) lemma and the two-Hamiltonian
angle lemma."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .eigen import DEGENERACY_TOL

__all__ = ["LeakReport", "leak_certify", "AngleReport", "angle_certify", "ground_space", "SLACK"]

SLACK = 1e-9


def _herm(a):
    a = np.asarray(a.toarray() if hasattr(a, "toarray") else a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("expected a square matrix")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class LeakReport:
    a: float
    b: float
    a_full: float
    b_full: float
    K: float
    J: float
    overlap: float
    shift: float  # K^2 / (J - 2K)
    overlap_bound: float
    hypothesis: bool

    @property
    def lower_ok(self):
        return self.a - self.shift - SLACK <= self.a_full <= self.a + SLACK

    @property
    def second_ok(self):
        return self.b_full >= self.b - self.shift - SLACK

    @property
    def overlap_ok(self):
        return self.overlap >= self.overlap_bound - SLACK

    @property
    def holds(self):
        return self.hypothesis and self.lower_ok and self.second_ok and self.overlap_ok

    def to_dict(self):
        return {
            "a": self.a, "b": self.b, "a_prime": self.a_full, "b_prime": self.b_full,
            "K": self.K, "J": self.J, "overlap": self.overlap, "overlap_bound": self.overlap_bound,
            "hypothesis": self.hypothesis, "holds": self.holds,
        }


def leak_certify(H1, S, J, H2=None):
    """Compare the spectrum of H1 restricted to span(S) with that of H1 + H2.

    ``S`` holds orthonormal columns. ``H2`` defaults to J (I - Pi_S); a given
    H2 must vanish on S and be at least J on its complement.
    """
    H1 = _herm(H1)
    S = np.asarray(S, dtype=complex)
    dim = H1.shape[0]
    if S.shape[0] != dim or S.shape[1] < 2:
        raise ValidationError("S needs at least two orthonormal columns of the operator dimension")
    if np.max(np.abs(S.conj().T @ S - np.eye(S.shape[1]))) > 1e-10:
        raise ValidationError("S columns are not orthonormal")
    J = float(J)
    Pi = S @ S.conj().T
    if H2 is None:
        H2 = J * (np.eye(dim) - Pi)
    else:
        H2 = _herm(H2)
        scale = max(1.0, J)
        if np.linalg.norm(H2 @ S, 2) > 1e-10 * scale:
            raise ValidationError("H2 does not vanish on S")
        comp = np.eye(dim) - Pi
        w = np.linalg.eigvalsh(comp @ H2 @ comp + J * Pi)
        if w[0] < J * (1 - 1e-10):
            raise ValidationError("H2 is below J on the complement of S")
    K = float(np.linalg.norm(H1, 2))
    hyp = J > 2 * K
    if not hyp:
        raise ValidationError(f"leak lemma needs J > 2K, got J={J}, K={K}")
    r_w, r_v = np.linalg.eigh(S.conj().T @ H1 @ S)
    f_w, f_v = np.linalg.eigh(H1 + H2)
    a, b = float(r_w[0]), float(r_w[1])
    shift = K * K / (J - 2 * K)
    xi = S @ r_v[:, 0]
    overlap = float(abs(np.vdot(xi, f_v[:, 0])) ** 2)
    bound = 1.0 - K * K / ((b - a) * (J - 2 * K)) if b - a > DEGENERACY_TOL else -np.inf
    return LeakReport(a, b, float(f_w[0]), float(f_w[1]), K, J, overlap, shift, float(bound), hyp)


def ground_space(H, tol=DEGENERACY_TOL):
    """(ground energy, ground-space columns, splitting to the next eigenvalue)."""
    w, v = np.linalg.eigh(_herm(H))
    m = int(np.sum(w <= w[0] + tol))
    split = float(w[m] - w[0]) if m < w.size else np.inf
    return float(w[0]), v[:, :m], split


@dataclass(frozen=True)
class AngleReport:
    a1: float
    a2: float
    Lambda: float
    theta: float
    bound: float
    actual: float

    @property
    def cos_theta(self):
        return float(np.cos(self.theta))

    @property
    def holds(self):
        return self.actual >= self.bound - 1e-12

    def to_dict(self):
        return {"a1": self.a1, "a2": self.a2, "Lambda": self.Lambda, "theta": self.theta,
                "bound": self.bound, "actual": self.actual, "holds": self.holds}


def angle_certify(H1, H2, Lambda=None, tol=DEGENERACY_TOL):
    """Lower bound a1 + a2 + 2 Lambda sin^2(theta/2) on the ground energy of H1 + H2.

    theta is the smallest principal angle between the two ground spaces.
    Lambda defaults to the smaller of the two ground splittings; a supplied
    value must not exceed either.
    """
    a1, V1, g1 = ground_space(H1, tol)
    a2, V2, g2 = ground_space(H2, tol)
    floor = min(g1, g2)
    if Lambda is None:
        Lambda = floor
    elif Lambda > floor + tol:
        raise ValidationError(f"Lambda = {Lambda} exceeds the ground splittings ({g1}, {g2})")
    if not np.isfinite(Lambda):
        raise ValidationError("both operators are multiples of the identity; Lambda is undefined")
    sv = np.linalg.svd(V1.conj().T @ V2, compute_uv=False)
    theta = float(np.arccos(min(1.0, float(sv[0]))))
    bound = a1 + a2 + 2.0 * Lambda * np.sin(theta / 2.0) ** 2
    actual = float(np.linalg.eigvalsh(_herm(H1) + _herm(H2))[0])
    return AngleReport(a1, a2, float(Lambda), theta, float(bound), actual)
