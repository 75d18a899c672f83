import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracconv.coeff import scheme_weights, sequences
from fracconv.toeplitz import (
    LowerToeplitz,
    ToeplitzOperator,
    build_bhat,
    combine_beta,
    matvec_dense,
    matvec_fft,
    shift_matrix,
)


def test_lower_toeplitz_entries():
    col = np.array([1.0, 2.0, 3.0, 4.0])
    T = LowerToeplitz(col).dense()
    for i in range(4):
        for j in range(4):
            assert T[i, j] == (col[i - j] if i >= j else 0.0)


def test_bhat_heads():
    assert build_bhat("m1", 0.4, 8).first_col[0] == 3.0
    assert build_bhat("m2", 0.4, 8).first_col[0] == 3.5
    s = sequences(0.6, 3)
    expected = 2 * (s["b"][1] + 0.5 * s["c"][1] + 0.369 * s["d"][1] - 0.23 * s["d"][0])
    assert build_bhat("m3", 0.6, 8).first_col[1] == pytest.approx(expected, abs=1e-14)
    with pytest.raises(ValueError):
        build_bhat("m1", 0.5, 2)


def test_bhat3_matches_explicit_shift_products():
    N, a = 16, 0.45
    s = sequences(a, N)
    B1, B2, B3 = (LowerToeplitz(s[k]).dense() for k in "bcd")
    J = shift_matrix(N)
    ref = 2 * (B1 + 0.5 * B2 + 0.369 * B3 - 0.23 * J @ B3 + 0.111 * J @ J @ B3)
    np.testing.assert_array_almost_equal(build_bhat("m3", a, N).dense(), ref, decimal=14)
    ref1 = 2 * (B1 + B2 / 2)
    np.testing.assert_allclose(build_bhat("m1", a, N).dense(), ref1, atol=1e-14)


def test_combine_beta_cases():
    bhat = build_bhat("m1", 0.5, 8)
    sym = combine_beta(bhat, 0.0)
    np.testing.assert_array_equal(sym.first_col, sym.first_row)
    one = combine_beta(bhat, 1.0)
    assert np.all(one.first_row[1:] == 0.0) and one.first_row[0] == bhat.first_col[0]
    B = bhat.dense()
    np.testing.assert_allclose(combine_beta(bhat, 0.2).dense(), 0.6 * B + 0.4 * B.T, atol=1e-15)
    with pytest.raises(ValueError):
        combine_beta(bhat, 1.5)


def test_operator_validation():
    with pytest.raises(ValueError):
        ToeplitzOperator(np.array([1.0, 2.0]), np.array([2.0, 0.0]))
    with pytest.raises(ValueError):
        ToeplitzOperator(np.array([1.0, 2.0]), np.array([1.0]))
    op = ToeplitzOperator(np.array([1.0, 2.0, 3.0]), np.array([1.0, 5.0, 6.0]))
    np.testing.assert_array_equal(op.transpose().dense(), op.dense().T)
    np.testing.assert_array_equal(op.scaled(2.0).dense(), 2.0 * op.dense())


def test_identity_and_zero():
    N = 10
    e = np.zeros(N)
    e[0] = 1.0
    ident = ToeplitzOperator(e, e)
    v = np.arange(N, dtype=float)
    np.testing.assert_array_equal(matvec_dense(ident, v), v)
    np.testing.assert_allclose(matvec_fft(ident, v), v, atol=1e-13)
    op = combine_beta(build_bhat("m2", 0.3, N), 0.5)
    assert np.all(matvec_fft(op, np.zeros(N)) == 0.0)


def test_dimension_mismatch():
    op = combine_beta(build_bhat("m1", 0.3, 8), 0.0)
    for f in (matvec_dense, matvec_fft):
        with pytest.raises(ValueError):
            f(op, np.ones(7))


@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_fft_matches_dense_random(n, seed):
    rng = np.random.default_rng(seed)
    col, row = rng.standard_normal(n), rng.standard_normal(n)
    row[0] = col[0]
    op = ToeplitzOperator(col, row)
    v = rng.standard_normal(n)
    ref = op.dense() @ v
    assert np.linalg.norm(op @ v - ref) <= 1e-12 * max(np.linalg.norm(ref), 1e-300) + 1e-14


@pytest.mark.parametrize("scheme", ["m1", "m2", "m3"])
def test_scheme_operator_fft(scheme):
    op = combine_beta(build_bhat(scheme, 0.7, 700), -0.3)
    v = np.random.default_rng(1).standard_normal(700)
    ref = matvec_dense(op, v)
    assert np.linalg.norm(matvec_fft(op, v) - ref) <= 1e-12 * np.linalg.norm(ref)


@pytest.mark.parametrize("scheme, alphas", [
    ("m1", np.linspace(0.1, 0.9, 9)),
    ("m2", [0.1, 0.5, 0.9, 0.986]),
    ("m3", [0.1, 0.5, 0.9, 0.997]),
])
@pytest.mark.parametrize("N", [16, 64, 256])
def test_symmetric_part_psd(scheme, alphas, N):
    for a in alphas:
        B = build_bhat(scheme, a, N).dense()
        assert np.linalg.eigvalsh(B + B.T).min() >= -1e-10


def test_weights_and_bhat_share_truncation():
    w = scheme_weights("m2", 0.5, 32).weights
    np.testing.assert_array_equal(build_bhat("m2", 0.5, 32).first_col, 2 * w)
