import itertools
import math

import numpy as np
import pytest

from conftest import random_complex, random_sym
from zqspec import (ComplexSymTensor, SolverConfig, SymTensor, TensorError, complex_contract_m1,
                    contract_m1, eig_sym_matrix, embed, embed_matrix, embed_tensor, frobenius_norm,
                    lift_vector, pair_partner, partner_map, phase_partner, project_vector,
                    qeig_all, residual, unembed, zeig_multistart)
from zqspec.embed import eigenvector_from_state, state_from_eigenvector


def _eigvals(M):
    return np.sort([p.lam for p in eig_sym_matrix(M)])


def test_embed_matrix_identity():
    M = embed_matrix(ComplexSymTensor(SymTensor.identity_matrix(2)))
    np.testing.assert_array_equal(M.to_dense(), np.diag([1.0, 1.0, -1.0, -1.0]))
    np.testing.assert_allclose(_eigvals(M), [-1, -1, 1, 1], atol=1e-14)


def test_embed_matrix_one_by_one():
    psi = ComplexSymTensor(SymTensor(2, 1, [3.0]), SymTensor(2, 1, [4.0]))
    M = embed_matrix(psi)
    np.testing.assert_array_equal(M.to_dense(), [[3, -4], [-4, -3]])
    np.testing.assert_allclose(_eigvals(M), [-5, 5], atol=1e-13)


def test_embed_matrix_imaginary_identity():
    psi = ComplexSymTensor(SymTensor(2, 2), SymTensor.identity_matrix(2))
    M = embed_matrix(psi).to_dense()
    I = np.eye(2)
    np.testing.assert_array_equal(M, np.block([[0 * I, -I], [-I, 0 * I]]))
    np.testing.assert_allclose(_eigvals(embed_matrix(psi)), [-1, -1, 1, 1], atol=1e-14)


def test_embed_matrix_block_form(rng):
    psi = random_complex(2, 3, rng)
    A, B = psi.real_part.to_dense(), psi.imag_part.to_dense()
    np.testing.assert_allclose(embed_matrix(psi).to_dense(), np.block([[A, -B], [-B, -A]]), rtol=0, atol=0)


def test_embed_errors(rng):
    with pytest.raises(TensorError):
        embed_tensor(random_complex(2, 2, rng))
    with pytest.raises(TensorError):
        embed_matrix(random_complex(3, 2, rng))
    with pytest.raises(TensorError):
        embed_tensor(random_complex(4, 2, rng), variant="remark_m3")
    with pytest.raises(TensorError):
        embed_tensor(random_complex(3, 2, rng), variant="nope")


def test_real_source_has_no_odd_entries(rng):
    A = random_sym(4, 2, rng)
    T = embed_tensor(A)
    for idx, v in T.entries.items():
        assert sum(i > 2 for i in idx) % 2 == 0, idx


def test_order3_sign_rule(rng):
    n = 2
    psi = random_complex(3, n, rng)
    T = embed_tensor(psi)
    A, B = psi.real_part, psi.imag_part
    for i, j, k in itertools.product(range(1, n + 1), repeat=3):
        assert T[i, j, k] == A[i, j, k]
        assert T[i, j + n, k + n] == -A[i, j, k]
        assert T[i, j, k + n] == -B[i, j, k]
        assert T[i + n, j + n, k + n] == B[i, j, k]


def test_alternate_order3_sign_table(rng):
    n = 2
    psi = random_complex(3, n, rng)
    T = embed_tensor(psi, "remark_m3")
    A, B = psi.real_part, psi.imag_part
    for i, j, k in itertools.product(range(1, n + 1), repeat=3):
        assert T[i, j, k] == A[i, j, k]
        assert T[i, j, k + n] == B[i, j, k]
        assert T[i, j + n, k + n] == -A[i, j, k]
        assert T[i + n, j + n, k + n] == -B[i, j, k]


def test_embedding_is_symmetric(rng):
    D = embed_tensor(random_complex(3, 2, rng)).to_dense()
    for perm in itertools.permutations(range(3)):
        assert np.array_equal(D, D.transpose(perm))


@pytest.mark.parametrize("m,n", [(2, 3), (3, 2), (3, 3), (4, 2), (5, 2)])
def test_norm_relation(m, n, rng):
    for variant in ("theorem4", "remark_m3") if m == 3 else ("theorem4",):
        e = embed(random_complex(m, n, rng), variant)
        assert math.isclose(frobenius_norm(e.target), e.scale_fact * frobenius_norm(e.source), rel_tol=1e-12)
        assert e.norm_defect() < 1e-12
    e = embed(random_complex(3, 2, rng))
    assert math.isclose(frobenius_norm(e.target), 2 * frobenius_norm(e.source), rel_tol=1e-12)


def test_lift_and_project_examples(rng):
    np.testing.assert_array_equal(lift_vector([1, 0]), [1, 0, 0, 0])
    np.testing.assert_array_equal(lift_vector([1j, 0]), [0, 0, 1, 0])
    np.testing.assert_array_equal(project_vector([1, 0, 0, 0]), [1, 0])
    np.testing.assert_allclose(project_vector(np.array([0, 1, 1, 0]) / math.sqrt(2)), np.array([1j, 1]) / math.sqrt(2))
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z /= np.linalg.norm(z)
    assert abs(np.linalg.norm(lift_vector(z)) - 1) < 1e-15
    assert np.array_equal(project_vector(lift_vector(z)), z)
    with pytest.raises(TensorError):
        project_vector([1.0, 2.0, 3.0])


def test_pair_partner_examples(rng):
    np.testing.assert_array_equal(pair_partner([1, 0, 0, 0]), [0, 0, -1, 0])
    w = rng.standard_normal(6)
    np.testing.assert_array_equal(pair_partner(pair_partner(w)), -w)
    assert math.isclose(np.linalg.norm(pair_partner(w)), np.linalg.norm(w))
    with pytest.raises(TensorError):
        pair_partner([1.0, 2.0, 3.0])


@pytest.mark.parametrize("m", [2, 6])
def test_pair_partner_maps_eigenpairs_when_m_is_2_mod_4(m, rng):
    psi = random_complex(m, 2, rng)
    T = embed(psi).target
    rep = zeig_multistart(T, SolverConfig(num_starts=40))
    for e in rep.entries:
        assert residual(T, -e.lam, pair_partner(e.vector)) < 1e-10


@pytest.mark.parametrize("m", [3, 4])
def test_pair_partner_fails_for_other_orders(m, rng):
    # (y, -x) multiplies z by -i, which flips lambda only when i^m = -1
    psi = random_complex(m, 2, rng)
    T = embed(psi).target
    rep = zeig_multistart(T, SolverConfig(num_starts=40))
    worst = max(residual(T, -e.lam, pair_partner(e.vector)) for e in rep.entries)
    assert worst > 1e-3


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_phase_partner_maps_eigenpairs(m, rng):
    psi = random_complex(m, 2, rng)
    T = embed(psi).target
    rep = zeig_multistart(T, SolverConfig(num_starts=40))
    for e in rep.entries:
        assert residual(T, -e.lam, phase_partner(e.vector, m)) < 1e-10


def test_phase_partner_order2_is_negated_pair_partner(rng):
    w = rng.standard_normal(6)
    np.testing.assert_allclose(phase_partner(w, 2), -pair_partner(w), atol=1e-15)


@pytest.mark.parametrize("m,n", [(2, 3), (3, 2), (4, 2), (5, 3)])
def test_residual_equivalence(m, n, rng):
    psi = random_complex(m, n, rng)
    T = embed(psi).target
    for _ in range(5):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z /= np.linalg.norm(z)
        lam = rng.standard_normal()
        q = np.linalg.norm(complex_contract_m1(psi, z) - lam * np.conj(z))
        assert abs(q - residual(T, lam, lift_vector(z))) < 1e-10
        np.testing.assert_allclose(contract_m1(T, lift_vector(z)),
                                   lift_vector(np.conj(complex_contract_m1(psi, z))), atol=1e-12)


def test_variant_equivalence(rng):
    for _ in range(3):
        psi = random_complex(3, 2, rng)
        cfg = SolverConfig(num_starts=60)
        a = qeig_all(psi, cfg, variant="theorem4")
        b = qeig_all(psi, cfg, variant="remark_m3")
        assert len(a.entries) == len(b.entries)
        np.testing.assert_allclose(a.q_eigenvalues, b.q_eigenvalues, atol=1e-8)
        T4, Tr = embed(psi).target, embed(psi, "remark_m3").target
        for e in a.embedded.entries:
            x, y = np.split(e.vector, 2)
            assert residual(Tr, e.lam, np.concatenate([x, -y])) < 1e-10
            assert residual(T4, e.lam, e.vector) < 1e-10


def test_state_round_trip(rng):
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    for variant in ("theorem4", "remark_m3"):
        np.testing.assert_array_equal(state_from_eigenvector(eigenvector_from_state(z, variant), variant), z)


def test_partner_map_alternate_variant(rng):
    psi = random_complex(3, 2, rng)
    T = embed(psi, "remark_m3").target
    f = partner_map(3, "remark_m3")
    for e in zeig_multistart(T, SolverConfig(num_starts=40)).entries:
        assert residual(T, -e.lam, f(e.vector)) < 1e-10


@pytest.mark.parametrize("m,variant", [(2, "theorem4"), (3, "theorem4"), (3, "remark_m3"), (4, "theorem4")])
def test_unembed_round_trip(m, variant, rng):
    psi = random_complex(m, 2, rng)
    assert unembed(embed(psi, variant).target, variant) == psi


def test_unembed_rejects_non_embeddings(rng):
    with pytest.raises(TensorError):
        unembed(random_sym(3, 4, rng))
    with pytest.raises(TensorError):
        unembed(random_sym(3, 3, rng))
