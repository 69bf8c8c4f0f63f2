import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from adiaforge.circuit import Circuit, gate, pad_identities, to_grid_layout
from adiaforge.errors import ValidationError
from adiaforge.grid6 import build_grid_program
from adiaforge.kitaev3 import build_3local
from adiaforge.kitaev5 import build_5local
from adiaforge.local_hamiltonian import at, dense
from adiaforge.spectral import (
    angle_certify,
    block_decompose_S,
    check_monotone,
    conductance,
    eigen_low,
    fix_phase,
    gap_profile,
    gerschgorin,
    history_basis,
    invariance_residual,
    leak_certify,
    legal_clock_basis,
    perron_chain,
    restrict,
    s0_closed_form,
)


@pytest.fixture(scope="module")
def bell5():
    return build_5local(pad_identities(Circuit(2, [gate("H", 0), gate("CNOT", 0, 1)]), 1.0))


# eigen_low

def test_eigen_diag():
    sp_ = eigen_low(np.diag([0.0, 1.0, 1.0]))
    assert sp_.ground_energy == 0 and sp_.gap == 1


def test_eigen_closed_form_L2():
    w = eigen_low(s0_closed_form(1.0, 2), k=3).eigenvalues
    assert np.allclose(w, [0, 0.5, 1.5], atol=1e-12)


def test_eigen_identity_degenerate():
    sp_ = eigen_low(np.eye(4))
    assert sp_.gap == 0 and sp_.degenerate


def test_eigen_iterative_path_matches_dense():
    rng = np.random.default_rng(11)
    a = sp.random(60, 60, density=0.1, random_state=rng)
    a = (a + a.T).tocsr()
    it = eigen_low(a, k=2, dense_max=10)
    ref = np.linalg.eigvalsh(a.toarray())[:2]
    assert np.allclose(it.eigenvalues, ref, atol=1e-9)
    assert np.all(it.residuals <= 1e-9 * np.maximum(1, np.abs(it.eigenvalues)))


def test_eigen_phase_fixed():
    v = eigen_low(s0_closed_form(0.5, 5)).ground_state
    i = int(np.argmax(np.abs(v)))
    assert abs(v[i].imag) < 1e-15 and v[i].real > 0


def test_fix_phase_tie_lowest_index():
    v = fix_phase(np.array([-1.0, 1.0]))
    assert v[0] == 1 and v[1] == -1


def test_eigen_permutation_invariance(rng):
    a = rng.normal(size=(12, 12))
    a = a + a.T
    p = rng.permutation(12)
    w1 = eigen_low(a, k=3).eigenvalues
    w2 = eigen_low(a[np.ix_(p, p)], k=3).eigenvalues
    assert np.allclose(w1, w2, atol=1e-9)


def test_eigen_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        eigen_low(np.array([[0.0, 1.0], [0.0, 0.0]]))


# closed form and restriction

def test_s0_closed_form_examples():
    assert np.allclose(s0_closed_form(0.0, 2), np.diag([0, 1, 1]))
    assert np.allclose(s0_closed_form(1.0, 2), [[0.5, -0.5, 0], [-0.5, 1, -0.5], [0, -0.5, 0.5]])
    assert np.allclose(np.linalg.eigvalsh(s0_closed_form(1.0, 1)), [0, 1])


def test_restriction_5local_matches_closed_form(bell5):
    basis = history_basis(bell5, 0)
    for s in (0.0, 0.3, 0.7, 1.0):
        assert np.max(np.abs(restrict(at(bell5, s), basis).matrix - s0_closed_form(s, bell5.L))) < 1e-10


def test_restriction_3local_matches_closed_form():
    p3 = build_3local(pad_identities(Circuit(2, [gate("H", 0), gate("CNOT", 0, 1)]), 1.0), 0.5, J=100.0)
    basis = history_basis(p3, 0)
    for s in (0.0, 0.3, 1.0):
        assert np.max(np.abs(restrict(at(p3, s), basis).matrix - s0_closed_form(s, p3.L))) < 1e-10


def test_invariance_5local_exact_3local_leaks(bell5):
    basis = history_basis(bell5, 0)
    for s in np.linspace(0, 1, 6):
        assert invariance_residual(at(bell5, s), basis) <= 1e-10
    p3 = build_3local(bell5.circuit, 0.5, J=100.0)
    b3 = history_basis(p3, 0)
    assert max(invariance_residual(at(p3, s), b3) for s in (0.3, 0.7, 1.0)) > 1e-3


def test_restricted_eigenvalues_are_full_eigenvalues(bell5):
    basis = history_basis(bell5)
    for s in (0.2, 0.8):
        H = dense(at(bell5, s))
        full = np.linalg.eigvalsh(H)
        for lam in np.linalg.eigvalsh(restrict(H, basis).matrix):
            assert np.min(np.abs(full - lam)) < 1e-8


def test_block_decomposition(bell5):
    dec = block_decompose_S(bell5, 0.5)
    assert len(dec.blocks) == 4 and dec.off_block_norm <= 1e-10
    assert np.max(np.abs(dec.blocks[0].matrix - s0_closed_form(0.5, bell5.L))) < 1e-10
    for j, blk in enumerate(dec.blocks[1:], start=1):
        diff = blk.matrix - s0_closed_form(0.5, bell5.L)
        assert np.allclose(diff, np.diag(np.diag(diff)), atol=1e-12)
    init = block_decompose_S(bell5, 0.0)
    for blk in init.blocks[1:]:
        assert blk.matrix[0, 0].real >= 1


def test_basis_must_be_orthonormal():
    from adiaforge.spectral import SubspaceBasis

    with pytest.raises(ValidationError):
        SubspaceBasis(4, np.array([0, 1]), np.array([[1.0, 1.0], [0.0, 1.0]]))


# Perron chain, conductance, monotonicity

def test_perron_uniform_two_state():
    ch = perron_chain(np.eye(2) - np.full((2, 2), 0.5))
    assert np.allclose(ch.P, 0.5) and np.allclose(ch.pi, 0.5)


def test_perron_closed_form_L2():
    ch = perron_chain(s0_closed_form(1.0, 2))
    assert np.allclose(ch.alphas, ch.alphas[0])
    assert np.allclose(ch.P, np.eye(3) - s0_closed_form(1.0, 2))
    assert np.allclose(ch.pi, 1 / 3)


def test_perron_rejects_negative_G():
    M = np.array([[1.0, 0.2], [0.2, 1.0]])
    with pytest.raises(ValidationError):
        perron_chain(M)


def test_perron_rejects_reducible():
    with pytest.raises(ValidationError):
        perron_chain(s0_closed_form(0.0, 3))


@pytest.mark.parametrize("s", [0.2, 0.5, 0.9, 1.0])
def test_perron_consistency(s):
    M = s0_closed_form(s, 6)
    ch = perron_chain(M)
    assert np.allclose(ch.P.sum(axis=1), 1, atol=1e-10)
    assert np.allclose(ch.pi @ ch.P, ch.pi, atol=1e-10)
    w = np.linalg.eigvalsh(M)
    assert abs(ch.gap() * (1 - w[0]) - (w[1] - w[0])) < 1e-9
    assert abs(ch.lambda0 - w[0]) < 1e-12


def test_perron_geometric_decay_keeps_row_sums():
    # alpha spans ~20 orders of magnitude here; ratios must stay accurate
    ch = perron_chain(s0_closed_form(0.05, 16))
    assert ch.alphas.min() > 0
    assert np.abs(ch.P.sum(axis=1) - 1).max() < 1e-12
    w = np.linalg.eigvalsh(s0_closed_form(0.05, 16))
    assert abs(ch.gap() * (1 - w[0]) - (w[1] - w[0])) < 1e-12


def test_conductance_L2_chain():
    ch = perron_chain(s0_closed_form(1.0, 2))
    rep = conductance(ch)
    assert abs(rep.phi - 0.5) < 1e-12 and rep.witness == (0,)
    assert abs(rep.bound - 0.125) < 1e-12 and abs(ch.gap() - 0.5) < 1e-12
    assert set(rep.to_dict()) >= {"phi", "witness_B", "flow", "bound"}


def test_conductance_two_state():
    rep = conductance(perron_chain(np.eye(2) - np.full((2, 2), 0.5)))
    assert abs(rep.phi - 0.5) < 1e-12


@pytest.mark.parametrize("L", [2, 4, 8, 12])
def test_conductance_floor_and_cheeger(L):
    for s in np.linspace(1 / 3, 1, 5):
        ch = perron_chain(s0_closed_form(s, L))
        rep = conductance(ch)
        assert rep.phi >= 1 / (6 * L)
        assert ch.gap() >= rep.bound - 1e-12
        assert rep.pi_B <= 0.5 + 1e-12
        assert abs(rep.flow / rep.pi_B - rep.phi) < 1e-12


def test_conductance_prefix_upper_bounds_exhaustive():
    ch = perron_chain(s0_closed_form(0.6, 7))
    ex, pre = conductance(ch), conductance(ch, mode="prefix")
    assert pre.phi >= ex.phi - 1e-12 and pre.mode == "prefix"


def test_check_monotone_examples():
    assert check_monotone([1, 0, 0])
    assert check_monotone(np.ones(5) / math.sqrt(5))
    assert not check_monotone([0.1, 0.5])
    assert not check_monotone([1, -0.1])


@pytest.mark.parametrize("L", [2, 8, 16])
def test_ground_states_monotone(L):
    for s in np.linspace(0, 1, 21):
        v = eigen_low(s0_closed_form(s, L)).ground_state
        assert check_monotone(v, 1e-9), s


# Gerschgorin

def test_gerschgorin_diag():
    rep = gerschgorin(np.diag([0.0, 1.0, 1.0]))
    assert [(c[0], c[1], c[3]) for c in rep.components] == [(0, 0, 1), (1, 1, 2)]
    assert rep.contained


@pytest.mark.parametrize("s", [0.05, 0.2, 0.33])
def test_gerschgorin_small_s_gap(s):
    L = 6
    rep = gerschgorin(s0_closed_form(s, L))
    lo, hi = rep.components[0], rep.components[1]
    assert lo[3] == 1 and hi[3] == L
    assert lo[1] < 1 / 3 and hi[0] > 2 / 3
    w = np.linalg.eigvalsh(s0_closed_form(s, L))
    assert w[1] - w[0] >= 1 / 3


def test_gerschgorin_random():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rep = gerschgorin(a + a.conj().T)
        assert rep.contained and sum(c[3] for c in rep.components) == 8


# leak lemma

def _random_orthonormal(rng, dim, m):
    q, _ = np.linalg.qr(rng.normal(size=(dim, m)) + 1j * rng.normal(size=(dim, m)))
    return q


def test_leak_zero_H1():
    rep = leak_certify(np.zeros((6, 6)), np.eye(6)[:, :3], 1.0)
    assert rep.K == 0 and rep.a == 0 and rep.a_full == 0 and rep.holds


def test_leak_random_instances():
    rng = np.random.default_rng(2025)
    for _ in range(50):
        dim = int(rng.integers(4, 65))
        m = int(rng.integers(2, dim))
        h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H1 = (h + h.conj().T) / 2
        K = np.linalg.norm(H1, 2)
        J = 2 * K * (1 + rng.uniform(0.1, 20)) + 1e-3
        rep = leak_certify(H1, _random_orthonormal(rng, dim, m), J)
        assert rep.lower_ok and rep.second_ok and rep.overlap_ok, rep.to_dict()


def test_leak_rejects_small_J():
    rng = np.random.default_rng(1)
    with pytest.raises(ValidationError):
        leak_certify(np.diag([0.0, 1.0, 2.0]), _random_orthonormal(rng, 3, 2), 3.0)


def test_leak_rejects_H2_nonzero_on_S():
    S = np.eye(3)[:, :2]
    with pytest.raises(ValidationError):
        leak_certify(np.diag([0.0, 0.1, 0.2]), S, 10.0, H2=np.eye(3) * 10)


def test_leak_3local_bell(bell5):
    p3 = build_3local(bell5.circuit, 0.5)
    H = at(p3, 1.0)
    H1 = dense(H.select(lambda t: t.label != "clock"))
    H2 = dense(H.select(lambda t: t.label == "clock"))
    rep = leak_certify(H1, legal_clock_basis(p3).dense(), p3.J, H2=H2)
    assert rep.holds and rep.overlap >= rep.overlap_bound


# angle lemma

def test_angle_worked_example():
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    rep = angle_certify(np.diag([0.0, 1.0]), np.outer(minus, minus))
    want = 1 - math.sqrt(2) / 2
    assert abs(rep.Lambda - 1) < 1e-12
    assert abs(rep.bound - want) < 1e-12 and abs(rep.actual - want) < 1e-12


def test_angle_identical_operators(rng):
    a = rng.normal(size=(5, 5))
    a = a + a.T
    rep = angle_certify(a, a)
    a1 = np.linalg.eigvalsh(a)[0]
    assert abs(rep.theta) < 1e-6 and abs(rep.bound - 2 * a1) < 1e-10 and abs(rep.actual - 2 * a1) < 1e-10


def test_angle_rejects_large_lambda():
    with pytest.raises(ValidationError):
        angle_certify(np.diag([0.0, 1.0]), np.diag([0.0, 0.5]), Lambda=2.0)


@pytest.mark.parametrize("L", [2, 4, 8])
def test_angle_block_instance(L):
    # The claimed cos(theta) <= 1 - 1/L fails at s = 1 (uniform ground state);
    # monotonicity only gives alpha_0^2 >= 1/(L+1), i.e. cos(theta) <= 1 - 1/(2(L+1)).
    M = np.zeros((L + 1, L + 1))
    M[0, 0] = 1
    for s in np.linspace(0, 1, 11):
        rep = angle_certify(s0_closed_form(s, L), M)
        assert rep.holds
        assert rep.cos_theta <= 1 - 1 / (2 * (L + 1)) + 1e-12
    at_one = angle_certify(s0_closed_form(1.0, L), M)
    assert abs(at_one.cos_theta - math.sqrt(L / (L + 1))) < 1e-10
    assert at_one.cos_theta > 1 - 1 / L


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_angle_lemma_random(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 7))
    h1 = rng.normal(size=(dim, dim))
    h2 = rng.normal(size=(dim, dim))
    rep = angle_certify(h1 + h1.T, h2 + h2.T)
    assert rep.holds


# gap profiles

def test_gap_profile_bell_S0_floor(bell5):
    prof = gap_profile(bell5, "S0", 101)
    assert prof.min_gap >= 1 / (144 * bell5.L ** 2)
    assert len(prof.rows()) == 101


def test_gap_profile_full_at_zero_within_S0(bell5):
    prof = gap_profile(bell5, "S0", [0.0])
    assert abs(prof.gap[0] - 1) < 1e-12


def test_gap_profile_bare_L_and_threads():
    a = gap_profile(6, "S0", 21, threads=1)
    b = gap_profile(6, "S0", 21, threads=3)
    assert np.array_equal(a.gap, b.gap)
    with pytest.raises(ValidationError):
        gap_profile(6, "S", 5)


def test_gap_profile_grid_vs_5local():
    lay = to_grid_layout(Circuit(2, [gate("H", 0), gate("CNOT", 0, 1)]))
    grid = gap_profile(build_grid_program(lay, 1.0, J=50.0), "S", 21)
    five = gap_profile(build_5local(lay.as_circuit()), "S", 21)
    assert abs(grid.min_gap - five.min_gap) <= 0.1 * five.min_gap


def test_gap_profile_rejects_bad_samples(bell5):
    with pytest.raises(ValidationError):
        gap_profile(bell5, "S0", [1.5])
    with pytest.raises(ValidationError):
        gap_profile(bell5, "X", 3)
