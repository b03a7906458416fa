import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hsmd.postfilter import AveragingKernel, average_filter, binarise, median_filter, normalise, postfilter


def convolve_oracle(m, u, v):
    """Direct zero-padded window mean, one pixel at a time."""
    h, w = m.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            total = 0.0
            for dy in range(-(v // 2), v // 2 + 1):
                for dx in range(-(u // 2), u // 2 + 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w:
                        total += m[yy, xx]
            out[y, x] = total / (u * v)
    return out


def test_constant_interior():
    out = average_filter(np.full((6, 7), 5.0), AveragingKernel(3, 3))
    assert (out[1:-1, 1:-1] == 5.0).all()


def test_impulse_response():
    m = np.zeros((7, 7))
    m[3, 3] = 9.0
    out = average_filter(m)
    expected = np.zeros((7, 7))
    expected[2:5, 2:5] = 1.0
    np.testing.assert_array_equal(out, expected)


def test_one_by_one_is_identity():
    m = np.random.default_rng(0).integers(0, 9, (5, 4)).astype(float)
    np.testing.assert_array_equal(average_filter(m, AveragingKernel(1, 1)), m)


@given(
    arrays(np.int32, st.tuples(st.integers(5, 9), st.integers(5, 9)), elements=st.integers(0, 50)),
    st.sampled_from([1, 3, 5]),
    st.sampled_from([1, 3, 5]),
)
@settings(max_examples=40, deadline=None)
def test_matches_direct_convolution(m, u, v):
    np.testing.assert_allclose(average_filter(m, AveragingKernel(u, v)), convolve_oracle(m, u, v), rtol=0, atol=1e-12)


@given(arrays(np.int32, (6, 6), elements=st.integers(0, 30)))
def test_output_bounded_by_input_range(m):
    out = average_filter(m)
    assert out.min() >= 0 and out.max() <= m.max()
    # interior pixels are true convex combinations
    inner = out[1:-1, 1:-1]
    assert inner.min() >= m.min() - 1e-12


def test_impulse_mass_preserved_in_interior():
    m = np.zeros((9, 9))
    m[4, 4] = 1.0
    assert average_filter(m, AveragingKernel(5, 3)).sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("u, v", [(2, 3), (3, 0), (-1, 1)])
def test_kernel_must_be_odd_positive(u, v):
    with pytest.raises(ValueError):
        AveragingKernel(u, v)


def test_kernel_weights():
    w = AveragingKernel(5, 3).weights
    assert w.shape == (3, 5)
    assert w.sum() == pytest.approx(1.0)


def test_kernel_larger_than_image():
    with pytest.raises(ValueError, match="larger"):
        average_filter(np.zeros((2, 2)), AveragingKernel(3, 3))


def test_normalise_examples():
    assert not normalise(np.zeros((2, 2))).any()
    np.testing.assert_array_equal(normalise(np.array([0.0, 2.0, 4.0])), [0.0, 127.5, 255.0])
    assert (normalise(np.full((3, 3), 0.25)) == 255.0).all()


def test_binarise_examples():
    m = np.array([[100.0, 200.0]])
    np.testing.assert_array_equal(binarise(m, 128), [[0, 255]])
    assert (binarise(m, 0) == 255).all()
    assert not binarise(np.full((2, 2), 255.0), 256).any()


@given(
    arrays(np.int32, (6, 6), elements=st.integers(0, 20)),
    st.sampled_from([0.5, 2.0, 3.0, 7.0, 1000.0]),
)
def test_mask_invariant_to_positive_scaling(counts, lam):
    np.testing.assert_array_equal(postfilter(counts), postfilter(counts * lam))


def test_median_removes_isolated_spike():
    m = np.zeros((5, 5))
    m[2, 2] = 7.0
    assert not median_filter(m).any()
    block = np.zeros((6, 6))
    block[1:5, 1:5] = 3.0
    assert median_filter(block)[2, 2] == 3.0


def test_postfilter_unknown_mode():
    with pytest.raises(ValueError):
        postfilter(np.zeros((4, 4)), mode="gaussian")


def test_postfilter_output_is_binary_mask():
    counts = np.random.default_rng(3).integers(0, 5, (10, 12))
    mask = postfilter(counts)
    assert mask.dtype == np.uint8 and set(np.unique(mask)) <= {0, 255}
