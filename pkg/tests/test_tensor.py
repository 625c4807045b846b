"""Tensor core: action, flattenings, Gram matrices, sampling, Haar factors."""

import itertools
import math

import numpy as np
import pytest

import otiso
from otiso import (
    DimensionMismatch,
    NonFiniteEntries,
    NotUnitary,
    RandomModel,
    ScalarKindMismatch,
    Tensor3,
    TransformTriple,
    apply_action,
    flatten,
    gram,
    identity_triple,
    sample_haar_triple,
    sample_tensor,
    unflatten,
    unitarity_defect,
)


def naive_action(L, R, T, a):
    """Definitional triple sum, evaluated entry by entry. Oracle for apply_action."""
    l, m, n = a.shape
    out = np.zeros((l, m, n), dtype=np.result_type(L, a))
    for i in range(l):
        for j in range(m):
            for k in range(n):
                acc = 0.0
                for p in range(l):
                    for q in range(m):
                        for r in range(n):
                            acc = acc + L[i, p] * R[j, q] * T[k, r] * a[p, q, r]
                out[i, j, k] = acc
    return out


def test_identity_action_is_exact():
    a = sample_tensor((3, 4, 2), RandomModel("gaussian", "real", 1))
    b = apply_action(identity_triple(a.dims, "real"), a)
    assert np.array_equal(b.data, a.data)


def test_zero_tensor_maps_to_zero():
    g = sample_haar_triple((3, 3, 3), 2, "complex")
    z = Tensor3(np.zeros((3, 3, 3), dtype=np.complex128))
    assert apply_action(g, z).frobenius_norm == 0.0


def test_permutation_action_matches_naive_oracle():
    a = sample_tensor((3, 2, 2), RandomModel("gaussian", "real", 3))
    P = np.eye(3)[[2, 0, 1]]  # sigma: 0->row2 position etc.
    g = TransformTriple([P, np.eye(2), np.eye(2)], "real")
    got = apply_action(g, a).data
    want = naive_action(P, np.eye(2), np.eye(2), a.data)
    assert np.allclose(got, want, rtol=0, atol=1e-13)
    # permuting the first index directly gives the same tensor
    assert np.allclose(got, a.data[np.argmax(P, axis=1)], rtol=0, atol=0)


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_action_matches_naive_oracle_random(kind):
    a = sample_tensor((3, 4, 2), RandomModel("gaussian", kind, 4))
    g = sample_haar_triple((3, 4, 2), 5, kind)
    got = apply_action(g, a).data
    want = naive_action(g[0], g[1], g[2], a.data)
    assert np.allclose(got, want, rtol=0, atol=1e-12 * a.frobenius_norm)


def test_action_validates_dims_and_kind():
    a = sample_tensor((3, 3, 3), RandomModel("gaussian", "real", 6))
    with pytest.raises(DimensionMismatch):
        apply_action(sample_haar_triple((3, 3, 4), 7, "real"), a)
    with pytest.raises(ScalarKindMismatch):
        apply_action(sample_haar_triple((3, 3, 3), 7, "complex"), a)


def test_frobenius_invariance_under_action():
    for seed in range(20):
        kind = "complex" if seed % 2 else "real"
        a = sample_tensor((4, 3, 5), RandomModel("gaussian", kind, seed))
        b = apply_action(sample_haar_triple((4, 3, 5), 100 + seed, kind), a)
        assert abs(b.frobenius_norm - a.frobenius_norm) <= 1e-12 * a.frobenius_norm


def test_action_composition_law():
    a = sample_tensor((4, 4, 4), RandomModel("gaussian", "complex", 8))
    g = sample_haar_triple((4, 4, 4), 9, "complex")
    h = sample_haar_triple((4, 4, 4), 10, "complex")
    lhs = apply_action(g, apply_action(h, a))
    rhs = apply_action(g.compose(h), a)
    assert np.linalg.norm(lhs.data - rhs.data) <= 1e-10 * a.frobenius_norm


def test_flatten_frozen_2x2x2_rows():
    # a[i,j,k] = 4(i-1) + 2(j-1) + k with 1-based indices
    arr = np.zeros((2, 2, 2))
    for i, j, k in itertools.product(range(2), repeat=3):
        arr[i, j, k] = 4 * i + 2 * j + (k + 1)
    m1 = flatten(Tensor3(arr), 1)
    assert m1.shape == (2, 4)
    assert list(m1[0]) == [1.0, 2.0, 3.0, 4.0]
    assert list(m1[1]) == [5.0, 6.0, 7.0, 8.0]


def test_flatten_column_order_all_modes():
    # slower column index is the smaller remaining mode number
    dims = (2, 3, 4)
    a = Tensor3(np.arange(24, dtype=np.float64).reshape(dims))
    m1, m2, m3 = (flatten(a, mode) for mode in (1, 2, 3))
    for i, j, k in itertools.product(*(range(d) for d in dims)):
        assert m1[i, j * dims[2] + k] == a.data[i, j, k]
        assert m2[j, i * dims[2] + k] == a.data[i, j, k]
        assert m3[k, i * dims[1] + j] == a.data[i, j, k]


def test_flatten_diagonal_rows_single_nonzero():
    arr = np.zeros((3, 3, 3))
    for i, d in enumerate((5.0, -2.0, 1.0)):
        arr[i, i, i] = d
    m1 = flatten(Tensor3(arr), 1)
    for i in range(3):
        nz = np.flatnonzero(m1[i])
        assert len(nz) == 1 and m1[i, nz[0]] == arr[i, i, i]


def test_flatten_intertwines_left_factor():
    a = sample_tensor((3, 3, 3), RandomModel("gaussian", "real", 11))
    L = sample_haar_triple((3, 3, 3), 12, "real")[0]
    g = TransformTriple([L, np.eye(3), np.eye(3)], "real")
    lhs = flatten(apply_action(g, a), 1)
    rhs = L @ flatten(a, 1)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * a.frobenius_norm)


def test_flatten_unflatten_roundtrip_exhaustive():
    for dims in itertools.product(range(1, 7), range(1, 6), range(1, 5)):
        a = Tensor3(np.arange(np.prod(dims), dtype=np.float64).reshape(dims) + 1.0)
        for mode in (1, 2, 3):
            back = unflatten(flatten(a, mode), mode, dims)
            assert np.array_equal(back.data, a.data)


def test_flatten_rejects_bad_mode():
    a = Tensor3(np.ones((2, 2, 2)))
    with pytest.raises(DimensionMismatch):
        flatten(a, 0)
    with pytest.raises(DimensionMismatch):
        flatten(a, 4)


def test_gram_of_diagonal_tensor():
    arr = np.zeros((2, 2, 2))
    arr[0, 0, 0] = 3.0
    arr[1, 1, 1] = 2.0
    g1 = gram(Tensor3(arr), 1)
    assert np.array_equal(g1, np.diag([9.0, 4.0]))


def test_gram_of_zero_tensor():
    assert np.array_equal(gram(Tensor3(np.zeros((2, 3, 4))), 2), np.zeros((3, 3)))


def test_gram_hermitian_psd():
    a = sample_tensor((4, 5, 3), RandomModel("gaussian", "complex", 13))
    for mode in (1, 2, 3):
        G = gram(a, mode)
        assert np.linalg.norm(G - G.conj().T) <= 1e-12 * np.linalg.norm(G)
        assert np.linalg.eigvalsh(G).min() >= -1e-10 * np.linalg.norm(G)


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_gram_covariance_under_action(kind):
    a = sample_tensor((4, 4, 4), RandomModel("gaussian", kind, 14))
    g = sample_haar_triple((4, 4, 4), 15, kind)
    b = apply_action(g, a)
    for mode in (1, 2, 3):
        X = g[mode - 1]
        lhs = gram(b, mode)
        rhs = X @ gram(a, mode) @ X.conj().T
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(rhs), 1.0)


def test_sample_rademacher_support():
    t = sample_tensor((5, 5, 5), RandomModel("rademacher", "real", 16))
    assert set(np.unique(t.data)) <= {-1.0, 1.0}
    tc = sample_tensor((4, 4, 4), RandomModel("rademacher", "complex", 17))
    assert set(np.unique(tc.data.real)) <= {-1.0, 1.0}
    assert set(np.unique(tc.data.imag)) <= {-1.0, 1.0}


def test_sample_uniform_pm_support_and_moments():
    t = sample_tensor((12, 12, 12), RandomModel("uniform_pm", "real", 18))
    s = math.sqrt(3.0)
    assert t.data.min() >= -s and t.data.max() <= s
    assert abs(t.data.mean()) < 0.05
    assert abs(t.data.var() - 1.0) < 0.05


def test_sample_gaussian_entry_mean_clt():
    # |sample mean| <= 1.5 * 4 / sqrt(20^3) over repeated seeds
    bound = 1.5 * 4.0 / math.sqrt(20 ** 3)
    for seed in range(10):
        t = sample_tensor((20, 20, 20), RandomModel("gaussian", "real", seed))
        assert abs(float(t.data.mean())) <= bound


def test_sample_determinism_and_stream_split():
    model = RandomModel("gaussian", "complex", 19)
    t1 = sample_tensor((3, 4, 5), model)
    t2 = sample_tensor((3, 4, 5), model)
    assert np.array_equal(t1.data, t2.data)
    t3 = sample_tensor((3, 4, 5), model, stream=(1,))
    assert not np.array_equal(t1.data, t3.data)


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_haar_triple_unitarity(kind):
    for seed in range(5):
        g = sample_haar_triple((6, 5, 4), seed, kind)
        for d, n in enumerate(g.dims):
            assert unitarity_defect(g[d]) <= 1e-10 * n


def test_haar_dims_one_gives_unit_scalars():
    g = sample_haar_triple((1, 1, 1), 20, "complex")
    for d in range(3):
        assert abs(abs(complex(g[d][0, 0])) - 1.0) <= 1e-12


def test_haar_first_column_unit_norm_over_seeds():
    # norm of L e_1 equals 1 up to a couple of ulps
    for seed in range(100):
        for kind in ("real", "complex"):
            g = sample_haar_triple((6, 5, 4), seed, kind)
            for d in range(3):
                assert abs(float(np.linalg.norm(g[d][:, 0])) - 1.0) <= 1e-15


def test_haar_determinism():
    g1 = sample_haar_triple((4, 4, 4), 21, "real")
    g2 = sample_haar_triple((4, 4, 4), 21, "real")
    assert all(np.array_equal(g1[d], g2[d]) for d in range(3))


def test_tensor3_validation():
    with pytest.raises(NonFiniteEntries):
        Tensor3(np.array([[[np.nan]]]))
    with pytest.raises(DimensionMismatch):
        Tensor3(np.zeros((2, 2)))
    with pytest.raises(ScalarKindMismatch):
        Tensor3(np.ones((2, 2, 2), dtype=np.complex128), "real")
    with pytest.raises(ScalarKindMismatch):
        Tensor3(np.ones((2, 2, 2), dtype=np.complex128)).astype_kind("real")


def test_tensor3_data_read_only():
    t = Tensor3(np.ones((2, 2, 2)))
    with pytest.raises(ValueError):
        t.data[0, 0, 0] = 5.0


def test_transform_triple_validation():
    with pytest.raises(NotUnitary):
        TransformTriple([np.eye(2) * 2.0, np.eye(2), np.eye(2)])
    with pytest.raises(DimensionMismatch):
        TransformTriple([np.ones((2, 3)), np.eye(3), np.eye(3)])
    with pytest.raises(DimensionMismatch):
        TransformTriple([np.eye(2), np.eye(2)])


def test_triple_inverse_is_group_inverse():
    g = sample_haar_triple((3, 4, 5), 22, "complex")
    a = sample_tensor((3, 4, 5), RandomModel("gaussian", "complex", 23))
    back = apply_action(g.inverse(), apply_action(g, a))
    assert np.linalg.norm(back.data - a.data) <= 1e-12 * a.frobenius_norm
