import numpy as np
import pytest

from adiaforge.circuit import Circuit, Gate, gate, history_state, pad_identities, random_circuit, random_unitary
from adiaforge.errors import ValidationError
from adiaforge.kitaev3 import build_3local, default_J, propagation_term_3
from adiaforge.kitaev5 import build_5local, propagation_term
from adiaforge.local_hamiltonian import assemble, at, dense
from adiaforge.spectral import legal_clock_basis


def _e(dim, i):
    v = np.zeros(dim)
    v[i] = 1
    return v


def test_first_step_matches_five_local_on_legal_state():
    h3 = assemble(propagation_term_3(1, gate("X", 0), 2, 1))
    h5 = assemble(propagation_term(1, gate("X", 0), 2, 1))
    v = _e(8, 0)
    want = _e(8, 0) - _e(8, 1 * 4 + 0b10)
    assert np.allclose(h3 @ v, want) and np.allclose(h5 @ v, want)


def test_illegal_clock_state_moves():
    # clock |01> is illegal: the single-qubit hop still acts on it
    v = _e(8, 0b01)
    out1 = assemble(propagation_term_3(1, gate("X", 0), 2, 1)) @ v
    assert abs(out1[1 * 4 + 0b11] + 1) < 1e-15  # -|1>|11>
    out2 = assemble(propagation_term_3(2, gate("X", 0), 2, 1)) @ v
    assert abs(out2[1 * 4 + 0b00] + 1) < 1e-15  # -|1>|00>
    assert np.allclose(assemble(propagation_term(1, gate("X", 0), 2, 1)) @ v, 0)


def test_restriction_of_single_term_matches(rng):
    u = random_unitary(2, rng)
    prog = build_5local(Circuit(1, [Gate((0,), u)] * 3))
    S = legal_clock_basis(prog).dense()
    for ell in (1, 2, 3):
        h3 = assemble(propagation_term_3(ell, Gate((0,), u), 3, 1)).toarray()
        h5 = assemble(propagation_term(ell, Gate((0,), u), 3, 1)).toarray()
        assert np.max(np.abs(S.conj().T @ (h3 - h5) @ S)) < 1e-12


def test_default_J():
    assert default_J(0.5, 4) == 16384
    assert default_J(0.5, 4, power=5) == 4096
    with pytest.raises(ValidationError):
        default_J(0.5, 4, power=4)


def test_bell_program_metadata(bell):
    prog = build_3local(pad_identities(bell, 1.0), 0.5)
    assert prog.flavor == "3local" and prog.k == 3 and prog.J == 16384
    assert max(t.k for t in prog.h_init.terms + prog.h_final.terms) <= 3
    assert np.linalg.norm(assemble(prog.h_init) @ _e(prog.dim, 0)) < 1e-12


def test_small_J_rejected(bell):
    with pytest.raises(ValidationError):
        build_3local(pad_identities(bell, 1.0), 0.5, J=1.0)


def test_restriction_equality_with_five_local():
    rng = np.random.default_rng(3)
    for n in (1, 2):
        for L in (2, 3, 4):
            c = random_circuit(n, L, rng)
            p3, p5 = build_3local(c, 1.0, J=100.0), build_5local(c)
            S = legal_clock_basis(p5).dense()
            for s in (0.0, 0.3, 0.7, 1.0):
                a = S.conj().T @ dense(at(p3, s)) @ S
                b = S.conj().T @ dense(at(p5, s)) @ S
                assert np.max(np.abs(a - b)) < 1e-10


def test_hopping_term_not_psd():
    found = False
    rng = np.random.default_rng(5)
    for _ in range(5):
        h = propagation_term_3(2, Gate((0,), random_unitary(2, rng)), 3, 1)
        if np.linalg.eigvalsh(assemble(h).toarray())[0] < -1e-6:
            found = True
    assert found


def _split(prog, s):
    H = at(prog, s)
    H1 = dense(H.select(lambda t: t.label != "clock"))
    H2 = dense(H.select(lambda t: t.label == "clock"))
    return H1, H2


def test_ground_energy_above_leak_floor(bell):
    prog = build_3local(pad_identities(bell, 1.0), 0.5, J=50.0)
    H1, H2 = _split(prog, 1.0)
    K = np.linalg.norm(H1, 2)
    assert np.linalg.eigvalsh(H1 + H2)[0] >= -K * K / (prog.J - 2 * K) - 1e-12


def test_small_J_gap_bound(bell):
    prog = build_3local(pad_identities(bell, 1.0), 0.5, J=50.0)
    S = legal_clock_basis(prog).dense()
    for s in (0.0, 0.5, 1.0):
        H1, H2 = _split(prog, s)
        K = np.linalg.norm(H1, 2)
        full = np.linalg.eigvalsh(H1 + H2)
        restricted = np.linalg.eigvalsh(S.conj().T @ H1 @ S)
        assert full[1] - full[0] >= restricted[1] - restricted[0] - K * K / (prog.J - 2 * K) - 1e-9


def test_overlap_with_history_state(bell):
    prog = build_3local(pad_identities(bell, 1.0), 0.5)
    H1, H2 = _split(prog, 1.0)
    K = np.linalg.norm(H1, 2)
    S = legal_clock_basis(prog).dense()
    r = np.linalg.eigvalsh(S.conj().T @ H1 @ S)
    w, v = np.linalg.eigh(H1 + H2)
    eta = history_state(prog.circuit)
    overlap = abs(np.vdot(eta, v[:, 0])) ** 2
    assert overlap >= 1 - K * K / ((r[1] - r[0]) * (prog.J - 2 * K))
