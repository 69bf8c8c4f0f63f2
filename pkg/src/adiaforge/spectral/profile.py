"""Gap profiles of H(s) along the interpolation, on the full space or on S / S0."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..local_hamiltonian import assemble
from .eigen import eigen_low
from .restrict import history_basis, restricted_endpoints, s0_closed_form

__all__ = ["GapProfile", "gap_profile", "worker_count", "MODES"]

MODES = ("full", "S", "S0")


def worker_count():
    """Thread cap from ADIAFORGE_THREADS, else the CPU count."""
    raw = os.environ.get("ADIAFORGE_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValidationError(f"ADIAFORGE_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValidationError("ADIAFORGE_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GapProfile:
    mode: str
    s: np.ndarray
    lambda0: np.ndarray
    lambda1: np.ndarray

    @property
    def gap(self):
        return self.lambda1 - self.lambda0

    @property
    def min_gap(self):
        return float(self.gap.min())

    @property
    def argmin_s(self):
        return float(self.s[int(np.argmin(self.gap))])

    def rows(self):
        return list(zip(self.s.tolist(), self.lambda0.tolist(), self.lambda1.tolist(), self.gap.tolist()))


def _samples(s_samples):
    if isinstance(s_samples, int):
        if s_samples < 2:
            raise ValidationError("need at least 2 s-samples")
        return np.linspace(0.0, 1.0, s_samples)
    s = np.asarray(s_samples, dtype=float)
    if s.ndim != 1 or s.size == 0 or s.min() < 0 or s.max() > 1:
        raise ValidationError("s-samples must be a non-empty list inside [0, 1]")
    return s


def gap_profile(program, mode="S0", s_samples=101, threads=None):
    """Two lowest eigenvalues of H(s) per sample.

    ``program`` may be an AdiabaticProgram, or an int L for the closed-form S0
    matrices. S and S0 modes interpolate the restricted endpoint matrices,
    which is exact since restriction is linear.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    s = _samples(s_samples)
    if isinstance(program, (int, np.integer)):
        if mode != "S0":
            raise ValidationError("a bare L only supports mode S0")
        L = int(program)
        A = s0_closed_form(0.0, L)
        B = s0_closed_form(1.0, L)
    elif mode == "full":
        A = assemble(program.h_init)
        B = assemble(program.h_final)
    else:
        basis = history_basis(program, 0 if mode == "S0" else None)
        A, B = restricted_endpoints(program, basis)

    def one(x):
        sp_ = eigen_low((1.0 - x) * A + x * B, k=2, vectors=False)
        return sp_.eigenvalues[0], sp_.eigenvalues[1]

    workers = threads or worker_count()
    if workers > 1 and s.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(one, s))
    else:
        vals = [one(x) for x in s]
    lam = np.array(vals, dtype=float)
    return GapProfile(mode, s, lam[:, 0], lam[:, 1])
