"""Property suite run by ``adiaforge verify`` on a single circuit."""

from __future__ import annotations

import numpy as np

from .circuit import ensure_min_length, simulate, to_grid_layout
from .errors import GuardError
from .kitaev3 import build_3local
from .kitaev5 import build_5local
from .local_hamiltonian import assemble, at, compress
from .spectral import (
    angle_certify,
    check_monotone,
    conductance,
    eigen_low,
    gap_profile,
    history_basis,
    leak_certify,
    legal_clock_basis,
    perron_chain,
    restrict,
    s0_closed_form,
)
from .spectral.markov import EXHAUSTIVE_MAX

__all__ = ["run_suite"]

S_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def _check(results, name, fn):
    try:
        ok, detail = fn()
    except GuardError as exc:
        ok, detail = True, f"skipped ({exc})"
    results.append((name, bool(ok), detail))


def run_suite(circuit, seed=0, epsilon=0.5):
    circuit = ensure_min_length(circuit)
    L = circuit.L
    p5 = build_5local(circuit)
    rng = np.random.default_rng(seed)
    legal = legal_clock_basis(p5)
    hist = history_basis(p5, 0)
    # both bases live on the same coordinates; express the history basis inside the legal frame
    pos = {int(g): i for i, g in enumerate(legal.indices)}
    B = np.zeros((legal.m, hist.m), dtype=complex)
    B[[pos[int(g)] for g in hist.indices]] = hist.coeffs
    results = []

    def ground_claims():
        Hi = compress(p5.h_init, legal.indices)
        Hf = compress(p5.h_final, legal.indices)
        r0 = float(np.linalg.norm(Hi @ B[:, 0]))
        eta = B.sum(axis=1) / np.sqrt(L + 1)
        r1 = float(np.linalg.norm(Hf @ eta))
        return max(r0, r1) <= 1e-10, f"|H_init g0|={r0:.2e} |H_final eta|={r1:.2e}"

    def closed_form():
        worst = 0.0
        p3 = build_3local(circuit, epsilon)
        for prog in (p5, p3):
            basis = history_basis(prog, 0)
            for s in S_GRID:
                d = np.abs(restrict(at(prog, s), basis).matrix - s0_closed_form(s, L)).max()
                worst = max(worst, float(d))
        return worst <= 1e-10, f"max deviation {worst:.2e} (5-local and 3-local)"

    def invariance():
        worst = 0.0
        for s in S_GRID:
            C = compress(at(p5, s), legal.indices)
            CB = C @ B
            worst = max(worst, float(np.linalg.norm(CB - B @ (B.conj().T @ CB), 2)))
        return worst <= 1e-10, f"max residual {worst:.2e}"

    def gap_floor():
        prof = gap_profile(L, "S0", 101)
        floor = 1.0 / (144 * L * L)
        return prof.min_gap >= floor, f"min gap {prof.min_gap:.4g} >= {floor:.4g}"

    def markov():
        if L + 1 > EXHAUSTIVE_MAX:
            return True, f"skipped (chain dimension {L + 1} > {EXHAUSTIVE_MAX})"
        worst = np.inf
        for s in (1 / 3, 0.5, 0.75, 1.0):
            M = s0_closed_form(s, L)
            ch = perron_chain(M)
            rep = conductance(ch)
            w = np.linalg.eigvalsh(M)
            if abs(ch.gap() * (1 - w[0]) - (w[1] - w[0])) > 1e-9 or ch.gap() < rep.bound - 1e-12:
                return False, f"Perron/conductance identity failed at s={s:.3g}"
            worst = min(worst, rep.phi * 6 * L)
        return worst >= 1.0, f"min phi*6L = {worst:.4g}"

    def monotone():
        bad = [s for s in np.linspace(0, 1, 21) if not check_monotone(eigen_low(s0_closed_form(s, L)).ground_state)]
        return not bad, "all monotone" if not bad else f"fails at s={bad}"

    def leak():
        p3 = build_3local(circuit, epsilon)
        if p3.dim > 4096:
            raise GuardError("dense_cap", f"dimension {p3.dim} too large for the leak check")
        S = legal_clock_basis(p3).dense()
        out = []
        for s in (0.0, 0.5, 1.0):
            H = at(p3, s)
            H1 = assemble(H.select(lambda t: t.label != "clock")).toarray()
            H2 = assemble(H.select(lambda t: t.label == "clock")).toarray()
            rep = leak_certify(H1, S, p3.J, H2)
            out.append(rep.holds)
        return all(out), f"J={p3.J:.4g}"

    def angle():
        fails = 0
        for _ in range(5):
            d = int(rng.integers(2, 7))
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            rep = angle_certify(a + a.conj().T, b + b.conj().T)
            fails += not rep.holds
        M = np.zeros((L + 1, L + 1))
        M[0, 0] = 1.0
        for s in (0.25, 0.5, 1.0):
            fails += not angle_certify(s0_closed_form(s, L), M).holds
        return fails == 0, f"{fails} violations"

    def layout():
        lay = to_grid_layout(circuit)
        err = float(np.max(np.abs(simulate(lay.as_circuit()).states[-1] - simulate(circuit).states[-1])))
        return err <= 1e-10, f"R={lay.R}, output deviation {err:.2e}"

    _check(results, "ground states of H_init and H_final", ground_claims)
    _check(results, "closed-form S0 restriction", closed_form)
    _check(results, "invariance of S0 under the 5-local H(s)", invariance)
    _check(results, "S0 gap floor 1/(144 L^2)", gap_floor)
    _check(results, "Perron chain and conductance", markov)
    _check(results, "monotone S0 ground states", monotone)
    _check(results, "leak lemma on the 3-local program", leak)
    _check(results, "angle lemma", angle)
    _check(results, "grid layout preserves the output", layout)
    return results
