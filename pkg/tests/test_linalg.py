"""Core operator engine: spectra, Schatten norms, rank decisions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conelab.errors import AmbiguousRank, NotHermitian, SpectralGapViolation
from conelab.linalg import (
    LinearOperator,
    Projection,
    fredholm_defect,
    from_matrix,
    hermitian_eig,
    identity,
    kernel_projection,
    positive_spectral_projection,
    range_projection,
    schatten_norm,
    space,
    spectral_function,
    zero_operator,
)
from conftest import random_hermitian


def op(matrix):
    return from_matrix(matrix)


# ---------------------------------------------------------------------------
# hermitian_eig
# ---------------------------------------------------------------------------


def test_eig_diagonal_already():
    w, Q = hermitian_eig(op([[3.0, 0.0], [0.0, -1.0]]))
    assert np.allclose(w, [-1.0, 3.0])
    # eigenvectors form a permutation
    assert np.allclose(np.abs(Q.entries), [[0, 1], [1, 0]])


def test_eig_swap_matrix_hand_values():
    # char poly lambda^2 - 1 by hand
    w, Q = hermitian_eig(op([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0])
    assert np.allclose(Q.entries.conj().T @ Q.entries, np.eye(2), atol=1e-12)


def test_eig_projection_spectral_mapping():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((7, 4)) + 1j * rng.standard_normal((7, 4))
    V = np.linalg.qr(g)[0]
    P = V @ V.conj().T
    w, _ = hermitian_eig(op(2 * P - np.eye(7)))
    assert np.allclose(np.sort(w), [-1, -1, -1, 1, 1, 1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(op([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_reconstructs():
    T = op(random_hermitian(11, 9))
    w, Q = hermitian_eig(T)
    rebuilt = (Q.entries * w) @ Q.entries.conj().T
    assert np.linalg.norm(rebuilt - T.entries) <= 1e-10 * np.linalg.norm(T.entries) * 9


def test_eig_deterministic_bitwise():
    T = op(random_hermitian(5, 16))
    w1, Q1 = hermitian_eig(T)
    w2, Q2 = hermitian_eig(T)
    assert np.array_equal(w1, w2) and np.array_equal(Q1.entries, Q2.entries)


def test_eig_empty_space():
    tag = space("empty", [])
    w, Q = hermitian_eig(LinearOperator(tag, tag, np.zeros((0, 0))))
    assert w.size == 0 and Q.entries.shape == (0, 0)


# ---------------------------------------------------------------------------
# positive spectral projection
# ---------------------------------------------------------------------------


def test_psp_reflection_recovers_projection():
    rng = np.random.default_rng(8)
    V = np.linalg.qr(rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2)))[0]
    P = V @ V.conj().T
    got = positive_spectral_projection(op(2 * P - np.eye(6)))
    assert np.max(np.abs(got.op.entries - P)) <= 1e-9


def test_psp_diagonal():
    got = positive_spectral_projection(op([[1.0, 0], [0, -1.0]]))
    assert np.allclose(got.op.entries, [[1, 0], [0, 0]], atol=1e-12)


def test_psp_swap_matrix():
    # eigenvector (1,1)/sqrt(2) for eigenvalue +1
    got = positive_spectral_projection(op([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(got.op.entries, 0.5 * np.ones((2, 2)), atol=1e-12)


def test_psp_gap_violation():
    with pytest.raises(SpectralGapViolation):
        positive_spectral_projection(op(np.diag([1.0, 2e-8])), zero_tol=1e-8)
    # non-strict mode allows the crowded cut
    positive_spectral_projection(op(np.diag([1.0, 2e-8])), zero_tol=1e-8, strict=False)


# ---------------------------------------------------------------------------
# spectral_function
# ---------------------------------------------------------------------------


def test_spectral_function_identity_map():
    T = op(random_hermitian(2, 8))
    got = spectral_function(T, lambda x: x)
    assert (got - T).norm_fro() <= 1e-9


def test_spectral_function_scalar_table():
    # f = 1/sqrt(1+x) on diag(n^2) -> 1/sqrt(1+n^2), plain scalar arithmetic
    T = op(np.diag([0.0, 1.0, 4.0, 9.0, 16.0]))
    got = spectral_function(T, lambda x: 1.0 / np.sqrt(1.0 + x))
    want = np.diag([1.0, 1 / np.sqrt(2), 1 / np.sqrt(5), 1 / np.sqrt(10), 1 / np.sqrt(17)])
    assert np.allclose(got.entries, want, atol=1e-12)


def test_spectral_function_flattening_map():
    T = op(np.diag([0.0, 3.0]))
    got = spectral_function(T, lambda x: x / np.sqrt(1 + x * x))
    assert np.allclose(got.entries, np.diag([0.0, 3.0 / np.sqrt(10.0)]), atol=1e-12)


def test_indicator_matches_psp():
    T = op(random_hermitian(21, 10) + 0.5 * np.eye(10))
    w, _ = hermitian_eig(T)
    if np.min(np.abs(w)) < 1e-3:  # keep the example gapped
        T = op(T.entries + np.eye(10))
    P1 = positive_spectral_projection(T, zero_tol=1e-6).op
    P2 = spectral_function(T, lambda x: 1.0 if x > 0 else 0.0)
    assert (P1 - P2).norm_fro() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_flattening_preserves_positive_projection(seed, dim):
    """Sign-preserving scalar maps leave the positive projection unchanged."""
    herm = random_hermitian(seed, dim)
    w = np.linalg.eigvalsh(herm)
    if np.min(np.abs(w)) < 1e-2:
        herm = herm + 2 * np.eye(dim)
    T = op(herm)
    flat = spectral_function(T, lambda x: x / np.sqrt(1 + x * x))
    P1 = positive_spectral_projection(T, zero_tol=1e-8)
    P2 = positive_spectral_projection(flat, zero_tol=1e-12, strict=False)
    assert (P1.op - P2.op).norm_fro() <= 1e-8


# ---------------------------------------------------------------------------
# schatten norms
# ---------------------------------------------------------------------------


def test_schatten_rank_one():
    m = np.outer([1.0, 2.0], [0.5, 1.0, 2.0])
    s = np.linalg.norm([1, 2]) * np.linalg.norm([0.5, 1, 2.0])
    T = op(m)
    for p in (1.0, 1.5, 2.0, 4.0, np.inf):
        assert abs(schatten_norm(T, p) - s) <= 1e-12 * s


def test_schatten_basel_partial_sum():
    m = 40
    diag = 1.0 / np.arange(1, m + 1)
    want = np.sqrt(np.sum(diag**2))  # independent partial sum
    assert abs(schatten_norm(op(np.diag(diag)), 2.0) - want) <= 1e-14
    assert want < np.pi / np.sqrt(6.0)


def test_schatten_unitary_trace_norm():
    rng = np.random.default_rng(2)
    U = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))[0]
    assert abs(schatten_norm(op(U), 1.0) - 6.0) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.integers(1, 12))
def test_hilbert_schmidt_is_frobenius_trace(seed, m, n):
    rng = np.random.default_rng(seed)
    T = op(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    lhs = schatten_norm(T, 2.0) ** 2
    rhs = (T.H @ T).trace().real
    assert abs(lhs - rhs) <= 1e-10 * max(rhs, 1e-30)


# ---------------------------------------------------------------------------
# rank decisions
# ---------------------------------------------------------------------------


def test_defect_identity():
    d = fredholm_defect(identity(space("s", range(5))))
    assert (d.rank, d.kernel_dim, d.cokernel_dim) == (5, 0, 0)


def test_defect_diag_10():
    d = fredholm_defect(op(np.diag([1.0, 0.0])))
    assert (d.kernel_dim, d.cokernel_dim) == (1, 1)
    assert d.gap > 1


def test_defect_truncated_shift():
    # explicit null vectors: e_{d-1} on the right, e_0 on the left
    d = 9
    m = np.diag(np.ones(d - 1), -1)
    T = op(m)
    dec = fredholm_defect(T)
    assert (dec.kernel_dim, dec.cokernel_dim) == (1, 1)
    assert np.allclose(m @ np.eye(d)[:, d - 1], 0)
    assert np.allclose(m[0, :], 0)


def test_defect_ambiguous():
    with pytest.raises(AmbiguousRank):
        fredholm_defect(op(np.diag([1.0, 5e-9, 1e-9])), tol=2e-9)


def test_defect_zero_operator_and_empty():
    d = fredholm_defect(op(np.zeros((3, 3))))
    assert (d.rank, d.kernel_dim, d.cokernel_dim) == (0, 3, 3)
    tag = space("e", [])
    d0 = fredholm_defect(LinearOperator(tag, tag, np.zeros((0, 0))))
    assert d0.rank == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 10), st.integers(1, 10))
def test_defect_adjoint_symmetry(seed, m, n):
    rng = np.random.default_rng(seed)
    T = op(rng.standard_normal((m, n)))
    assert fredholm_defect(T).kernel_dim == fredholm_defect(T.H).cokernel_dim


# ---------------------------------------------------------------------------
# kernel / range projections
# ---------------------------------------------------------------------------


def test_kernel_range_of_projection():
    rng = np.random.default_rng(4)
    V = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    P = op(V @ V.T)
    assert (kernel_projection(P).op - (identity(P.domain) - P)).norm_fro() <= 1e-9
    assert (range_projection(P).op - P).norm_fro() <= 1e-9


def test_kernel_of_zero():
    T = zero_operator(space("a", range(4)), space("b", range(3)))
    assert (kernel_projection(T).op - identity(T.domain)).norm_fro() == 0


def test_range_of_upper_rank_one():
    # column space of [[1,1],[0,0]] is the first axis
    got = range_projection(op([[1.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(got.op.entries, np.diag([1.0, 0.0]), atol=1e-12)


def test_range_composition_recovers_operator():
    rng = np.random.default_rng(9)
    T = op(rng.standard_normal((7, 4)) @ rng.standard_normal((4, 6)))
    R = range_projection(T)
    assert (R.op @ T - T).norm_fro() <= 1e-9


# ---------------------------------------------------------------------------
# structures
# ---------------------------------------------------------------------------


def test_adjoint_involution_exact():
    rng = np.random.default_rng(12)
    T = op(rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))
    assert np.array_equal(T.H.H.entries, T.entries)


def test_projection_rejects_non_idempotent():
    with pytest.raises(ValueError):
        Projection(op(np.diag([0.5, 0.0])), tol=1e-9)


def test_projection_spectrum_check():
    rng = np.random.default_rng(1)
    V = np.linalg.qr(rng.standard_normal((5, 2)))[0]
    P = Projection(op(V @ V.T))
    assert P.verify_spectrum() <= 1e-12
    assert P.rank() == 2
    assert P.complement().rank() == 3
