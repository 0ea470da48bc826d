import math

import numpy as np
import pytest
import scipy.fft
from hypothesis import given, settings
from hypothesis import strategies as st

from sfmask.image import Image
from sfmask.transform import Spectrum, dct2_forward, dct2_forward_naive, dct2_inverse, dct_1d, idct_1d

from conftest import random_image


def test_constant_image_is_dc_only():
    spec = dct2_forward(Image(np.ones((8, 8))))
    assert spec.coeffs[0, 0, 0] == pytest.approx(8.0)
    rest = spec.coeffs.copy()
    rest[0, 0, 0] = 0
    assert np.abs(rest).max() < 1e-12


def test_two_sample_signal():
    spec = dct2_forward(Image(np.array([[1.0, 0.0]])))
    np.testing.assert_allclose(spec.coeffs[0, :, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12)


def test_naive_impulse_matches_hand_sum():
    # s_k cos(pi k / 8), s_0 = 1/2, s_k = 1/sqrt(2)
    expected = [0.5, 0.6532814824381883, 0.5, 0.27059805007309856]
    spec = dct2_forward_naive(Image(np.array([[1.0, 0.0, 0.0, 0.0]])))
    np.testing.assert_allclose(spec.coeffs[0, :, 0], expected, atol=1e-12)


def test_naive_constant_is_dc_only():
    spec = dct2_forward_naive(Image(np.full((5, 3), 2.0)))
    assert spec.coeffs[0, 0, 0] == pytest.approx(2.0 * math.sqrt(15))
    assert np.abs(spec.coeffs.ravel()[1:]).max() < 1e-12


def test_dc_equals_scaled_mean(rng):
    img = random_image(rng, 13, 21, 3)
    spec = dct2_forward(img)
    np.testing.assert_allclose(spec.coeffs[0, 0], img.data.mean(axis=(0, 1)) * math.sqrt(13 * 21))


def test_dc_only_spectrum_inverts_to_ones():
    coeffs = np.zeros((6, 10, 1))
    coeffs[0, 0, 0] = math.sqrt(60)
    np.testing.assert_allclose(dct2_inverse(Spectrum(coeffs)).data, 1.0, atol=1e-12)


@pytest.mark.parametrize("h,w", [(16, 16), (7, 5), (1, 1), (1, 9), (33, 1), (64, 48)])
def test_round_trip(rng, h, w):
    img = random_image(rng, h, w, 3)
    back = dct2_inverse(dct2_forward(img))
    assert np.abs(back.data - img.data).max() <= 1e-10


def test_inverse_then_forward(rng):
    spec = Spectrum(rng.normal(size=(7, 5, 1)))
    again = dct2_forward(dct2_inverse(spec))
    assert np.abs(again.coeffs - spec.coeffs).max() <= 1e-10


def test_fast_matches_naive_64(rng):
    img = random_image(rng, 64, 64, 3)
    diff = dct2_forward(img).coeffs - dct2_forward_naive(img).coeffs
    assert np.abs(diff).max() <= 1e-8


def test_naive_size_guard():
    with pytest.raises(ValueError):
        dct2_forward_naive(Image(np.zeros((257, 4))))


def test_zero_size_image_rejected():
    with pytest.raises(ValueError):
        dct2_forward(Image(np.zeros((0, 4))))


def test_inverse_rejects_bad_metadata():
    with pytest.raises(ValueError):
        dct2_inverse(Spectrum(np.zeros((4, 4, 1)), norm="backward"))
    with pytest.raises(ValueError):
        dct2_inverse(Spectrum(np.zeros((4, 4))))


def test_single_precision_storage(rng):
    img = Image(rng.uniform(size=(9, 11, 1)).astype(np.float32))
    back = dct2_inverse(dct2_forward(img))
    assert np.abs(back.data - img.data).max() <= 1e-6


def test_1d_against_scipy(rng):
    x = rng.normal(size=(5, 37))
    np.testing.assert_allclose(dct_1d(x), scipy.fft.dct(x, norm="ortho"), atol=1e-12)
    np.testing.assert_allclose(idct_1d(x), scipy.fft.idct(x, norm="ortho"), atol=1e-12)


sizes = st.integers(min_value=1, max_value=64)


@settings(max_examples=60, deadline=None)
@given(h=sizes, w=sizes, seed=st.integers(0, 2**32 - 1))
def test_oracle_equivalence_random_sizes(h, w, seed):
    img = Image(np.random.default_rng(seed).normal(size=(h, w, 1)))
    diff = dct2_forward(img).coeffs - dct2_forward_naive(img).coeffs
    assert np.abs(diff).max() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(h=sizes, w=sizes, seed=st.integers(0, 2**32 - 1))
def test_parseval_and_round_trip(h, w, seed):
    img = Image(np.random.default_rng(seed).normal(size=(h, w, 3)))
    spec = dct2_forward(img)
    e_img = np.sum(img.data ** 2)
    assert abs(np.sum(spec.coeffs ** 2) - e_img) <= 1e-6 * e_img
    assert np.abs(dct2_inverse(spec).data - img.data).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(
    h=sizes, w=sizes,
    a=st.floats(-10, 10), b=st.floats(-10, 10),
    seed=st.integers(0, 2**32 - 1),
)
def test_linearity(h, w, a, b, seed):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=(h, w, 1)), r.normal(size=(h, w, 1))
    lhs = dct2_forward(Image(a * x + b * y)).coeffs
    rhs = a * dct2_forward(Image(x)).coeffs + b * dct2_forward(Image(y)).coeffs
    assert np.abs(lhs - rhs).max() <= 1e-9
