import math

import numpy as np
import pytest

from balanced_frames import duality as du
from balanced_frames.constructions import inner_direct_sum, partition_frame, roots_of_unity_frame, simplex_frame
from balanced_frames.core import (
    Frame,
    canonical_parseval,
    gram,
    is_balanced,
    is_equal_norm,
    is_parseval,
    is_simplex,
    spectral,
    tight_constant,
)
from balanced_frames.errors import FrameError, HypothesisError, NotAFrameError, NotDualError, ShapeError
from conftest import random_balanced


def test_canonical_dual_tight(roots4):
    np.testing.assert_allclose(du.canonical_dual(roots4).matrix, roots4.matrix / 2, atol=1e-15)


def test_canonical_dual_simplex_is_itself():
    S = simplex_frame(3)
    np.testing.assert_allclose(du.canonical_dual(S).matrix, S.matrix, atol=1e-12)


def test_canonical_dual_identity(rng):
    F = Frame(rng.standard_normal((2, 5)))
    G = du.canonical_dual(F)
    np.testing.assert_allclose(G.matrix @ F.matrix.T, np.eye(2), atol=1e-12)


def test_canonical_dual_of_balanced_is_balanced(rng):
    assert is_balanced(du.canonical_dual(random_balanced(rng, 3, 6)))


def test_canonical_dual_not_frame():
    with pytest.raises(NotAFrameError):
        du.canonical_dual(np.array([[1.0, 2.0], [0.0, 0.0]]))


def test_is_dual_pair_basic(rng):
    F = Frame(rng.standard_normal((3, 5)))
    assert du.is_dual_pair(F, du.canonical_dual(F))
    with pytest.raises(ShapeError):
        du.is_dual_pair(F, np.eye(3))


def test_shifted_dual_of_balanced_still_dual(rng):
    F = random_balanced(rng, 2, 5)
    G = du.canonical_dual(F)
    assert du.is_dual_pair(F, du.shifted_dual(G, rng.standard_normal(2)))


def test_shifted_dual_of_nonbalanced_fails(rng):
    F = Frame(rng.standard_normal((2, 5)))
    G = du.canonical_dual(F)
    assert not du.is_dual_pair(F, du.shifted_dual(G, rng.standard_normal(2)))


def test_representative_unchanged_for_balanced(rng):
    F = random_balanced(rng, 2, 5)
    G = du.canonical_dual(F)
    np.testing.assert_allclose(du.balanced_dual_representative(F, G).matrix, G.matrix, atol=1e-14)


def test_representative_recovers_canonical(rng):
    F = random_balanced(rng, 3, 6)
    G = du.canonical_dual(F)
    shifted = du.shifted_dual(G, rng.standard_normal(3))
    R = du.balanced_dual_representative(F, shifted)
    np.testing.assert_allclose(R.matrix, G.matrix, atol=1e-12)
    assert du.is_dual_pair(F, R) and is_balanced(R)


def test_representative_constant_on_class(rng):
    F = random_balanced(rng, 2, 6)
    G = du.sample_balanced_dual(F, seed=3)
    a = du.balanced_dual_representative(F, du.shifted_dual(G, [1.0, 2.0]))
    b = du.balanced_dual_representative(F, du.shifted_dual(G, [-4.0, 0.5]))
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)
    np.testing.assert_allclose(du.balanced_dual_representative(F, a).matrix, a.matrix, atol=1e-14)


def test_representative_requires_dual(rng):
    F = random_balanced(rng, 2, 5)
    with pytest.raises(NotDualError):
        du.balanced_dual_representative(F, F)
    with pytest.raises(HypothesisError):
        du.balanced_dual_representative(np.eye(2), np.eye(2))


def test_sample_K_eq_d_plus_1_is_canonical(rng):
    F = random_balanced(rng, 3, 4)
    C = du.canonical_dual(F)
    for seed in range(5):
        np.testing.assert_allclose(du.sample_balanced_dual(F, seed=seed).matrix, C.matrix, atol=1e-10)


def test_sample_two_seeds_distinct(rng):
    F = random_balanced(rng, 2, 4)
    a, b = du.sample_balanced_dual(F, seed=1), du.sample_balanced_dual(F, seed=2)
    assert not np.allclose(a.matrix, b.matrix)
    for G in (a, b):
        assert du.is_dual_pair(F, G) and is_balanced(G)
    np.testing.assert_array_equal(a.matrix, du.sample_balanced_dual(F, seed=1).matrix)


def test_W_zero_gives_canonical(rng):
    F = random_balanced(rng, 2, 5)
    G, pert = du.dual_from_W(F, np.zeros((2, 5)))
    np.testing.assert_allclose(G.matrix, du.canonical_dual(F).matrix)
    assert pert.rank == 0


def test_sample_constraints_and_rank(rng):
    F = random_balanced(rng, 3, 8, complex_=True)
    G, pert = du.sample_balanced_dual(F, seed=7, return_perturbation=True)
    assert pert.range_residual(F) < 1e-9
    assert pert.e_residual() < 1e-9
    assert pert.W_e_residual() < 1e-9
    assert pert.rank <= 8 - 3 - 1
    rec = du.perturbation_of(F, G)
    np.testing.assert_allclose(rec.R, pert.R, atol=1e-12)


def test_sample_requires_balanced(rng):
    with pytest.raises(HypothesisError):
        du.sample_balanced_dual(Frame(rng.standard_normal((2, 5))))


def test_erasure_simplex_explicit_dual():
    S = simplex_frame(2)
    Fd, Gd = du.erasure_dual(S, du.canonical_dual(S), 2)
    # oracle: for a basis the unique dual is the inverse-transpose
    np.testing.assert_allclose(Gd.matrix, np.linalg.inv(Fd.matrix).T, atol=1e-12)


def test_erasure_reconstruction(rng):
    F = random_balanced(rng, 3, 6)
    G = du.sample_balanced_dual(F, seed=2)
    f = rng.standard_normal(3)
    for l in range(6):
        Fd, Gd = du.erasure_dual(F, G, l)
        np.testing.assert_allclose(Gd.matrix @ (Fd.matrix.T @ f), f, atol=1e-10)


def test_erasure_nonbalanced_counterexample():
    F = Frame(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]))
    G = du.canonical_dual(F)
    Fd, Gd = du.erasure_dual(F, G, 0)
    assert not du.is_dual_pair(Fd, Gd)
    assert not du.balanced_by_erasure(F, G, 0)


def test_erasure_converse_detects_balance(rng):
    F = random_balanced(rng, 2, 5)
    assert du.balanced_by_erasure(F, du.canonical_dual(F), 1)


def test_erasure_index_validation(roots3):
    with pytest.raises(FrameError):
        du.erasure_dual(roots3, du.canonical_dual(roots3), 3)


def test_tight_dual_K_le_2d_returns_F():
    F = simplex_frame(3)
    res = du.balanced_tight_dual(F, rho=1.0)
    assert res.unique and res.frame is F


def test_tight_dual_K_gt_2d():
    F = canonical_parseval(roots_of_unity_frame(6))
    for rho in (0.5, 2.0):
        res = du.balanced_tight_dual(F, rho=rho, seed=4)
        G = res.frame
        assert du.is_dual_pair(F, G) and is_balanced(G)
        assert tight_constant(G) == pytest.approx(rho + 1, rel=1e-9)


def test_tight_dual_gram_identity():
    # T_G = T + R with R = S^H, S = [s_1 .. s_d]: G_G = G_F + T^H R + R^H T + S S^H
    F = canonical_parseval(roots_of_unity_frame(7))
    res = du.balanced_tight_dual(F, rho=1.5, seed=1)
    T, R = F.matrix, res.R
    S = res.s_vectors
    expected = gram(F).entries + T.T @ R + R.T @ T + S @ S.T
    np.testing.assert_allclose(gram(res.frame).entries, expected, atol=1e-12)
    # rank-d Gram, so it cannot be G_F + rho I (which has full rank K)
    assert np.linalg.matrix_rank(gram(res.frame).entries, tol=1e-9) == 2
    np.testing.assert_allclose(S.T @ S, 1.5 * np.eye(2), atol=1e-12)


def test_tight_duals_for_different_rho_not_unitarily_equivalent():
    F = canonical_parseval(roots_of_unity_frame(6))
    a = du.balanced_tight_dual(F, rho=0.5).frame
    b = du.balanced_tight_dual(F, rho=2.0).frame
    # equal traces are necessary for unitary equivalence; they differ by d (rho - rho')
    ta, tb = np.trace(gram(a).entries), np.trace(gram(b).entries)
    assert tb - ta == pytest.approx(2 * 1.5)


def test_tight_dual_preconditions(roots4):
    with pytest.raises(HypothesisError):
        du.balanced_tight_dual(roots4)


def test_b_complement_simplex_is_zero():
    G = du.b_complement(simplex_frame(3))
    assert G.d == 0 and G.K == 4


def test_b_complement_partition_12():
    G = du.b_complement(partition_frame([1, 2]))
    expected = np.array([-math.sqrt(2 / 3), math.sqrt(1 / 6), math.sqrt(1 / 6)])
    v = G.matrix.ravel()
    assert np.allclose(v, expected) or np.allclose(v, -expected)


@pytest.mark.parametrize("eta", [[1, 2], [2, 2], [1, 2, 3], [3, 3, 3]])
def test_b_complement_partition_block_formula(eta):
    G = du.b_complement(partition_frame(eta))
    K = sum(eta)
    C = np.zeros((K, K))
    starts = np.cumsum([0] + eta)
    for i, a in enumerate(eta):
        for j, b in enumerate(eta):
            val = (K - a) / (a * K) if i == j else -1 / K
            C[starts[i] : starts[i + 1], starts[j] : starts[j + 1]] = val
    np.testing.assert_allclose(gram(G).entries, C, atol=1e-12)


def test_b_complement_equal_norm_transfers():
    F = canonical_parseval(roots_of_unity_frame(7))
    G = du.b_complement(F)
    assert is_equal_norm(F) and is_equal_norm(G)
    assert G.d == 7 - 2 - 1 and is_parseval(G) and is_balanced(G)


def test_b_complement_twice_gram_identity():
    F = partition_frame([2, 3])
    G = du.b_complement(F)
    H = du.b_complement(G)
    K = F.K
    np.testing.assert_allclose(gram(G).entries + gram(H).entries, np.eye(K) - np.ones((K, K)) / K, atol=1e-12)
    np.testing.assert_allclose(gram(H).entries, gram(F).entries, atol=1e-12)


def test_complement_gram():
    F = canonical_parseval(roots_of_unity_frame(5))
    C = du.complement(F)
    np.testing.assert_allclose(gram(C).entries, np.eye(5) - gram(F).entries, atol=1e-12)
    assert C.d == 3
    with pytest.raises(HypothesisError):
        du.complement(roots_of_unity_frame(5))


def test_b_complement_requires_bpf():
    with pytest.raises(HypothesisError):
        du.b_complement(np.eye(2))


def test_check_pair_partition():
    F = partition_frame([1, 2])
    rep = du.check_b_complement_pair(F, du.b_complement(F))
    assert all(rep.as_tuple()) and rep.consistent


def test_check_pair_self_all_false():
    F = canonical_parseval(roots_of_unity_frame(5))
    rep = du.check_b_complement_pair(F, F)
    assert not any(rep.as_tuple())


def test_check_pair_scaled_balanced_frames():
    # the definition for balanced frames goes through S^{-1/2}; scaled copies still pair
    F = canonical_parseval(roots_of_unity_frame(6))
    G = du.b_complement(F)
    rep = du.check_b_complement_pair(F.scaled(3.0), G.scaled(0.5))
    assert rep.b_complements and rep.ranges_split_e_perp and rep.dims_and_cross_zero


def test_inner_sum_of_b_complements_is_simplex():
    F = canonical_parseval(roots_of_unity_frame(6))
    G = du.b_complement(F)
    S = Frame(np.vstack([F.matrix, G.matrix]))
    assert is_simplex(S)
