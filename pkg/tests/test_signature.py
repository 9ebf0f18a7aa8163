"""Signature validation, mapping matrices, factor-graph views, phase Latin squares."""

from __future__ import annotations

import numpy as np
import pytest

from scmasim.errors import (
    EmptyMatrix,
    LatinAssignmentInfeasible,
    NonUniformWeights,
)
from scmasim.signature import (
    SignatureParams,
    factor_graph,
    latin_phase_assignment,
    load_signature,
    mapping_matrices,
    validate_signature,
)

from conftest import PATTERN_46, random_regular_signature


def test_validate_builtin_pattern():
    params = validate_signature(PATTERN_46)
    assert params == SignatureParams(K=4, J=6, dv=2, df=3)


def test_validate_identity():
    assert validate_signature(np.eye(2, dtype=int)) == SignatureParams(K=2, J=2, dv=1, df=1)


def test_validate_flipped_entry_rejected():
    broken = PATTERN_46.copy()
    broken[0, 0] = 0
    with pytest.raises(NonUniformWeights):
        validate_signature(broken)


def test_validate_empty_rejected():
    with pytest.raises(EmptyMatrix):
        validate_signature(np.zeros((0, 0)))


def test_validate_nonbinary_rejected():
    with pytest.raises(ValueError):
        validate_signature(np.array([[1, 2], [2, 1]]))


def test_edge_count_consistency():
    p = validate_signature(PATTERN_46)
    assert p.K * p.df == p.J * p.dv == 12


def test_mapping_matrix_user1():
    v1 = mapping_matrices(PATTERN_46)[0]
    expected = np.array([[1, 0], [0, 1], [0, 0], [0, 0]])
    np.testing.assert_array_equal(v1, expected)


def test_mapping_matrix_user6():
    v6 = mapping_matrices(PATTERN_46)[5]
    expected = np.array([[0, 0], [0, 0], [1, 0], [0, 1]])
    np.testing.assert_array_equal(v6, expected)


def test_mapping_matrix_identity_case():
    v1 = mapping_matrices(np.eye(2, dtype=int))[0]
    np.testing.assert_array_equal(v1, np.array([[1], [0]]))


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("dims", [(2, 2, 1, 1), (4, 6, 2, 3), (4, 4, 2, 2), (6, 4, 3, 2), (8, 12, 2, 3)])
def test_mapping_round_trip_random(dims, seed):
    # diag(Vj Vj^T) must reconstruct column j for arbitrary uniform patterns.
    K, J, dv, df = dims
    F = random_regular_signature(np.random.default_rng(seed), K, J, dv, df)
    for j, vj in enumerate(mapping_matrices(F)):
        np.testing.assert_array_equal(np.diag(vj @ vj.T), F[:, j])
        assert vj.shape == (K, dv)
        assert vj.sum() == dv


def test_factor_graph_sets():
    g = factor_graph(PATTERN_46)
    assert g.fn_neighbors[0] == (1, 2, 3)
    assert g.fn_neighbors[1] == (1, 4, 5)
    assert g.vn_neighbors[0] == (1, 2)


def test_factor_graph_identity():
    g = factor_graph(np.eye(2, dtype=int))
    assert g.fn_neighbors[0] == (1,)
    assert g.vn_neighbors[0] == (1,)


def test_factor_graph_edge_count_and_symmetry():
    g = factor_graph(PATTERN_46)
    assert sum(len(s) for s in g.fn_neighbors) == 12
    assert sum(len(s) for s in g.vn_neighbors) == 12
    for k, users in enumerate(g.fn_neighbors, start=1):
        for j in users:
            assert k in g.vn_neighbors[j - 1]
        assert list(users) == sorted(users)


def test_phase_assignment_matches_reference_pattern():
    # The 4x6 pattern has a unique natural spread: row r assigns rotation
    # index (p + r) mod 3 to its p-th nonzero.
    phases = latin_phase_assignment(PATTERN_46)
    w = np.exp(1j * np.pi * np.arange(3) / 6)
    expected = np.array(
        [
            [w[0], w[1], w[2], 0, 0, 0],
            [w[1], 0, 0, w[2], w[0], 0],
            [0, w[2], 0, w[0], 0, w[1]],
            [0, 0, w[0], 0, w[1], w[2]],
        ]
    )
    np.testing.assert_allclose(phases, expected, atol=1e-12)


def test_phase_assignment_first_row():
    phases = latin_phase_assignment(PATTERN_46)
    row = phases[0]
    np.testing.assert_allclose(
        row, [1.0, np.exp(1j * np.pi / 6), np.exp(1j * np.pi / 3), 0, 0, 0], atol=1e-12
    )


def test_phase_rotation_values():
    # dv=2, df=3 gives step pi/6 between consecutive rotations.
    phases = latin_phase_assignment(PATTERN_46)
    assert phases[0, 1] == pytest.approx(np.exp(1j * np.pi / 6), abs=1e-12)
    assert phases[0, 2] == pytest.approx(np.exp(1j * np.pi / 3), abs=1e-12)


def test_phase_assignment_identity_all_ones():
    np.testing.assert_allclose(latin_phase_assignment(np.eye(3, dtype=int)), np.eye(3), atol=1e-15)


def test_phase_assignment_infeasible_when_column_too_heavy():
    # dv=2 > df=1: a column cannot hold two distinct indices out of one.
    with pytest.raises(LatinAssignmentInfeasible):
        latin_phase_assignment(np.array([[1], [1]]))


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("dims", [(4, 6, 2, 3), (4, 4, 2, 2), (6, 8, 3, 4), (6, 9, 2, 3), (8, 12, 2, 3)])
def test_phase_assignment_latin_property_random(dims, seed):
    K, J, dv, df = dims
    F = random_regular_signature(np.random.default_rng(100 + seed), K, J, dv, df)
    phases = latin_phase_assignment(F)
    nz = phases != 0
    np.testing.assert_array_equal(nz, F.astype(bool))
    np.testing.assert_allclose(np.abs(phases[nz]), 1.0, atol=1e-12)
    # Recover indices from angles and check distinctness per row and column.
    idx = np.full(F.shape, -1)
    ang = np.angle(phases[nz])
    idx[nz] = np.rint(ang * dv * df / np.pi).astype(int)
    assert idx[nz].min() >= 0 and idx[nz].max() < df
    for r in range(K):
        vals = idx[r][idx[r] >= 0]
        assert len(set(vals.tolist())) == len(vals)
    for c in range(J):
        vals = idx[:, c][idx[:, c] >= 0]
        assert len(set(vals.tolist())) == len(vals)


def test_load_builtin_matches_pattern():
    np.testing.assert_array_equal(load_signature("builtin46"), PATTERN_46)


def test_load_from_file_round_trip(tmp_path):
    path = tmp_path / "sig.txt"
    lines = ["4 6"] + [" ".join(str(v) for v in row) for row in PATTERN_46]
    path.write_text("\n".join(lines) + "\n")
    np.testing.assert_array_equal(load_signature(str(path)), PATTERN_46)


def test_load_from_file_bad_header(tmp_path):
    path = tmp_path / "sig.txt"
    path.write_text("4\n1 1\n")
    with pytest.raises(ValueError):
        load_signature(str(path))


def test_load_from_file_row_count_mismatch(tmp_path):
    path = tmp_path / "sig.txt"
    path.write_text("2 2\n1 0\n")
    with pytest.raises(ValueError):
        load_signature(str(path))
