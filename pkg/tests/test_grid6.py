import numpy as np
import pytest

from adiaforge.circuit import Circuit, GridLayoutCircuit, gate, identity_gate, random_circuit, to_grid_layout
from adiaforge.errors import GuardError, ValidationError
from adiaforge.grid6 import (
    GridShape,
    ParticleState,
    Phase,
    build_grid_program,
    enumerate_legal,
    grid_gamma_basis,
    legal_shape,
    pad_grid_rounds,
    passes_rules,
    rule_pass_set,
    shape_discrepancy,
    shape_of_index,
    site_index,
)
from adiaforge.local_hamiltonian import HamiltonianSum, assemble, at
from adiaforge.spectral import history_basis, restrict, s0_closed_form


@pytest.fixture(scope="module")
def bell_grid():
    lay = to_grid_layout(Circuit(2, [gate("H", 0), gate("CNOT", 0, 1)]))
    return lay, build_grid_program(lay, 1.0, J=50.0)


def test_six_states():
    assert len(ParticleState) == 6
    assert ParticleState.DOWN2.phase is Phase.SECOND


def test_initial_shape_six_by_six():
    s = legal_shape(0, 6, 6)
    assert s.rows() == ["F" + "O" * 6] * 6


def test_final_shape_six_by_six():
    s = legal_shape(72, 6, 6)
    assert s.rows() == ["D" * 6 + "F"] * 6


def test_column_all_second_phase():
    n, R, r = 3, 3, 1
    s = legal_shape(2 * n * r + n, n, R)
    assert all(row == "DSOO" for row in s.rows())


def test_legal_shape_range():
    with pytest.raises(ValidationError):
        legal_shape(5, 1, 2)


def test_enumerate_n1_R1():
    assert [str(s) for s in enumerate_legal(1, 1)] == ["FO", "SO", "DF"]


@pytest.mark.parametrize("n,R", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)])
def test_enumeration_counts_and_distinct(n, R):
    shapes = enumerate_legal(n, R)
    assert len(shapes) == 2 * n * R + 1 == len(set(shapes))


@pytest.mark.parametrize("n,R", [(1, 1), (2, 2), (3, 3)])
def test_consecutive_shapes_differ_in_at_most_two_sites(n, R):
    shapes = enumerate_legal(n, R)
    for a, b in zip(shapes, shapes[1:]):
        diff = sum(a[i, c] != b[i, c] for i in range(1, n + 1) for c in range(R + 1))
        assert 1 <= diff <= 2


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("R", [1, 2, 3])
def test_legal_shapes_pass_rules(n, R):
    for s in enumerate_legal(n, R):
        ok, viol = passes_rules(s)
        assert ok, (str(s), viol)


def test_unborn_left_of_first_fails_group_one():
    ok, viol = passes_rules(GridShape.from_rows(["OF"]))
    assert not ok and viol[0][0] == 1


def test_all_unborn_passes_but_is_not_legal():
    s = GridShape.from_rows(["OO", "OO"])
    assert passes_rules(s)[0]
    assert s not in enumerate_legal(2, 1)
    assert s in shape_discrepancy(2, 1)


def test_rule_pass_set_n1_R1_discrepancy():
    assert sorted(map(str, shape_discrepancy(1, 1))) == ["DD", "DS", "OO"]


def test_rule_pass_set_guard():
    with pytest.raises(GuardError):
        rule_pass_set(4, 2)


def test_active_count_is_n():
    for s in enumerate_legal(3, 2):
        assert len(s.active_sites()) == 3


def test_gamma_identity_round_j0():
    lay = GridLayoutCircuit(1, 1, [identity_gate(0), identity_gate(0)])
    B = grid_gamma_basis(lay, 0)
    want = np.zeros(36)
    want[int(ParticleState.UP) * 6 + int(ParticleState.UNBORN)] = 1
    assert np.allclose(B[:, 0], want)


def test_gamma_gram_and_shapes(bell_grid):
    lay, _ = bell_grid
    cols = np.hstack([grid_gamma_basis(lay, j) for j in range(4)])
    assert np.max(np.abs(cols.conj().T @ cols - np.eye(20))) < 1e-12
    for ell in range(lay.L + 1):
        idx = np.nonzero(np.abs(grid_gamma_basis(lay, 3)[:, ell]) > 0)[0]
        for i in idx:
            assert shape_of_index(int(i), 2, 1)[0] == legal_shape(ell, 2, 1)


def test_program_dimension_and_locality():
    lay = GridLayoutCircuit(1, 1, [identity_gate(0), identity_gate(0)])
    prog = build_grid_program(lay, 1.0, J=50.0)
    assert prog.dim == 36 and prog.d == 6 and prog.k == 2


def test_supports_are_sites_or_neighbours(bell_grid):
    lay, prog = bell_grid
    R = lay.R
    coords = {site_index(i, c, R): (i, c) for i in range(1, 3) for c in range(R + 1)}
    for t in prog.h_init.terms + prog.h_final.terms:
        if t.k == 2:
            (i1, c1), (i2, c2) = coords[t.support[0]], coords[t.support[1]]
            assert abs(i1 - i2) + abs(c1 - c2) == 1
        else:
            assert t.k == 1


def test_input_penalty_on_down_site(bell_grid):
    lay, prog = bell_grid
    h_in = prog.h_init.select(lambda t: t.label == "input")
    N = prog.N
    digits = [0] * N
    digits[site_index(1, 0, 1)] = int(ParticleState.UP)
    digits[site_index(2, 0, 1)] = int(ParticleState.DOWN)
    idx = int(np.ravel_multi_index(digits, (6,) * N))
    assert assemble(h_in)[idx, idx] == 1


def test_propagation_restriction_per_step(bell_grid):
    lay, prog = bell_grid
    basis = history_basis(prog)
    L = lay.L
    w = L + 1
    for ell in range(1, L + 1):
        h = HamiltonianSum(prog.N, 6, [t for t in prog.h_final.terms if t.label.startswith(f"prop:{ell}:")])
        got = restrict(h.scaled(2.0), basis).matrix  # h_final carries a factor 1/2
        want = np.zeros_like(got)
        for j in range(4):
            a, b = j * w + ell - 1, j * w + ell
            want[a, a] = want[b, b] = 1
            want[a, b] = want[b, a] = -1
        assert np.max(np.abs(got - want)) < 1e-10, ell


def test_input_and_clockinit_restrictions(bell_grid):
    lay, prog = bell_grid
    n, L = 2, lay.L
    basis = history_basis(prog)
    hin = restrict(prog.h_init.select(lambda t: t.label == "input"), basis).matrix
    hci = restrict(prog.h_init.select(lambda t: t.label == "clockinit"), basis).matrix
    assert np.max(np.abs(hin - np.diag(np.diag(hin)))) < 1e-12
    for j in range(4):
        for ell in range(L + 1):
            k = j * (L + 1) + ell
            low_bits = j & ((1 << max(n - ell, 0)) - 1)
            want = bin(low_bits).count("1") if ell <= n else 0
            assert abs(hin[k, k] - want) < 1e-12
            assert abs(hci[k, k] - (0 if ell == 0 else 1)) < 1e-12


def test_grid_s0_matches_closed_form(bell_grid):
    lay, prog = bell_grid
    basis = history_basis(prog, 0)
    for s in (0.0, 0.4, 1.0):
        assert np.max(np.abs(restrict(at(prog, s), basis).matrix - s0_closed_form(s, lay.L))) < 1e-10


def test_grid_initial_state_annihilated(bell_grid):
    lay, prog = bell_grid
    g0 = grid_gamma_basis(lay, 0)[:, 0]
    assert np.linalg.norm(assemble(prog.h_init) @ g0) < 1e-10


def test_pad_grid_rounds():
    lay = to_grid_layout(Circuit(1, [gate("X", 0)]))
    padded = pad_grid_rounds(lay, 0.5)
    assert padded.L >= lay.L + 3 * lay.L and padded.L % 2 == 0


def test_requires_layout_circuit():
    with pytest.raises(ValidationError):
        build_grid_program(random_circuit(2, 2, np.random.default_rng(0)), 1.0)
