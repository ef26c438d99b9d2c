import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavedr.edr import eig_sym, squared_cosine
from wavedr.estimators import (
    EstimatorConfig, LambdaMatrix, Sample, SampleFormatError, density_estimate, g_estimate,
    lambda_hat, r_hat, read_sample_csv, truncated_density, wavelet_moments, whiten,
    write_sample_csv,
)
from wavedr.simulation import generate, replication_seed
from wavedr.wavelets import build_wavelet, projection_kernel

from oracles import histogram_density, lambda_from_formula

HAAR = build_wavelet("haar")
D2 = build_wavelet("daubechies2")


def cfg(j_n=0, b_n=0.01, w=HAAR):
    return EstimatorConfig(j_n, b_n, w)


def test_density_examples():
    assert density_estimate([0.3], cfg(), 0.7) == 1.0
    assert density_estimate([0.3], cfg(), 1.5) == 0.0
    assert density_estimate([0.1, 0.2, 0.9, 1.3], cfg(j_n=1), 0.15) == 1.0


def test_truncated_density_examples():
    assert truncated_density(0.0, 0.01) == 0.01
    assert truncated_density(0.5, 0.01) == 0.5
    assert truncated_density(-0.003, 0.01) == 0.01
    with pytest.raises(ValueError):
        truncated_density(0.5, 0.0)


def test_g_examples():
    # a single observation, below the Sample minimum, through the kernel sums
    s0, s1 = wavelet_moments(0.5, [0.3], [[2.0]], cfg())
    n, scale = 1, 1.0
    assert scale * s1[0, 0] / n == 2.0 and scale * s0[0] / n == 1.0
    far = Sample([[2.0], [0.0]], [0.3, 50.0])
    assert g_estimate(far, 1, cfg(), 0.5) == 1.0
    two = Sample([[1.0], [3.0]], [0.2, 0.8])
    assert g_estimate(two, 1, cfg(), 0.5) == 2.0
    zero = Sample(np.zeros((4, 2)), [0.1, 0.5, 1.5, 2.2])
    assert np.all(g_estimate(zero, 2, cfg(), np.linspace(-1, 3, 9)) == 0.0)
    with pytest.raises(IndexError):
        g_estimate(two, 2, cfg(), 0.5)


def test_r_hat_examples():
    s = Sample([[2.0, -1.0], [5.0, 5.0]], [0.3, 40.0])
    assert np.array_equal(r_hat(s, cfg(), 0.5), [2.0, -1.0])
    assert np.array_equal(r_hat(s, cfg(), -100.0), [0.0, 0.0])
    two = Sample([[1.0], [3.0]], [0.2, 0.8])
    assert r_hat(two, cfg(), 0.5)[0] == 2.0


def test_lambda_hat_examples():
    s = Sample(np.zeros((6, 3)), np.linspace(0, 2, 6))
    assert np.all(lambda_hat(s, cfg()).m == 0.0)
    hand = Sample([[2.0], [4.0]], [0.2, 0.8])
    assert lambda_hat(hand, cfg()).m[0, 0] == 9.0
    oracle = lambda_from_formula([[2.0], [4.0]], [0.2, 0.8],
                                 lambda a, b: 1.0 if math.floor(a) == math.floor(b) else 0.0, 0, 0.01)
    assert oracle[0, 0] == 9.0


@pytest.mark.parametrize("w,j_n", [(HAAR, 0), (HAAR, 2), (D2, 0), (D2, 1)])
def test_lambda_matches_formula_oracle(w, j_n):
    rng = np.random.default_rng(j_n + 10 * w.support)
    x = rng.standard_normal((30, 3))
    y = x[:, 0] + 0.5 * rng.standard_normal(30)
    k = lambda a, b: projection_kernel(w, a, b)  # noqa: E731
    expected = lambda_from_formula(x.tolist(), y.tolist(), k, j_n, 0.01)
    got = lambda_hat(Sample(x, y), cfg(j_n, 0.01, w)).m
    assert np.max(np.abs(got - expected)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-4, 4, allow_nan=False), min_size=1, max_size=40),
       st.integers(0, 3), st.floats(-5, 5, allow_nan=False))
def test_haar_density_is_histogram(ys, j_n, y):
    assert density_estimate(ys, cfg(j_n), y) == histogram_density(ys, j_n, y)


def test_haar_density_integrates_to_one():
    rng = np.random.default_rng(2)
    ys = rng.standard_normal(200)
    for j_n in (0, 1, 3):
        width = 2.0**-j_n
        cells = np.unique(np.floor(ys / width))
        total = sum(density_estimate(ys, cfg(j_n), (c + 0.5) * width) * width for c in cells)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_d2_density_integrates_to_one():
    ys = np.random.default_rng(4).standard_normal(200)
    grid = np.arange(-8 * 256, 8 * 256 + 1) / 256.0
    f = density_estimate(ys, cfg(0, 0.01, D2), grid)
    assert abs(np.trapezoid(f, grid) - 1.0) <= 1e-2


def _random_sample(rng, n=60, d=4):
    x = rng.standard_normal((n, d))
    y = x @ rng.standard_normal(d) + rng.standard_normal(n)
    return Sample(x, y)


@pytest.mark.parametrize("w", [HAAR, D2], ids=["haar", "d2"])
def test_lambda_is_symmetric_psd(w):
    rng = np.random.default_rng(8)
    for _ in range(100):
        lam = lambda_hat(_random_sample(rng), cfg(int(rng.integers(0, 3)), 0.01, w))
        lam.check()


@pytest.mark.parametrize("w", [HAAR, D2], ids=["haar", "d2"])
@pytest.mark.parametrize("c", [-3.0, 0.5, 10.0])
def test_lambda_scaling_equivariance(w, c):
    s = _random_sample(np.random.default_rng(9))
    base = lambda_hat(s, cfg(0, 0.01, w)).m
    scaled = lambda_hat(Sample(c * s.x, s.y), cfg(0, 0.01, w)).m
    assert np.max(np.abs(scaled - c * c * base)) <= 1e-10 * max(1.0, np.abs(c * c * base).max())


@pytest.mark.parametrize("w", [HAAR, D2], ids=["haar", "d2"])
def test_permutation_invariance_bitwise(w):
    rng = np.random.default_rng(10)
    s = _random_sample(rng, n=80)
    perm = rng.permutation(s.n)
    p = Sample(s.x[perm], s.y[perm])
    c = cfg(1, 0.01, w)
    q = np.linspace(-3, 3, 17)
    assert np.array_equal(density_estimate(s.y, c, q), density_estimate(p.y, c, q))
    assert np.array_equal(g_estimate(s, 2, c, q), g_estimate(p, 2, c, q))
    assert np.array_equal(lambda_hat(s, c).m, lambda_hat(p, c).m)


def test_haar_bucket_path_bit_identical():
    rng = np.random.default_rng(12)
    for j_n in (0, 1, 3):
        s = _random_sample(rng, n=150)
        c = cfg(j_n)
        assert np.array_equal(lambda_hat(s, c, method="bucket").m, lambda_hat(s, c).m)
    with pytest.raises(ValueError):
        lambda_hat(s, cfg(0, 0.01, D2), method="bucket")


@pytest.mark.parametrize("w", [HAAR, D2], ids=["haar", "d2"])
def test_projection_path_matches_direct(w):
    s = _random_sample(np.random.default_rng(13), n=200)
    for j_n in (0, 2):
        c = cfg(j_n, 0.01, w)
        a, b = lambda_hat(s, c).m, lambda_hat(s, c, method="projection").m
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.abs(a).max())


def test_model1_top_direction():
    # Whitened estimate, averaged over replications, as in the simulation study.
    beta = np.array([1.0, 1, 1, 1, 0])
    r2 = []
    for rep in range(20):
        s = generate(1, 500, replication_seed(2024, 1, rep))
        ws, back = whiten(s)
        v = back @ eig_sym(lambda_hat(ws, cfg())).eigenvectors[:, 0]
        r2.append(squared_cosine(v, beta))
    assert np.mean(r2) >= 0.99


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(-1, 0.01, HAAR)
    with pytest.raises(ValueError):
        EstimatorConfig(0, 0.0, HAAR)
    with pytest.raises(ValueError):
        EstimatorConfig(0.5, 0.01, HAAR)


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample([[1.0]], [1.0])
    with pytest.raises(ValueError):
        Sample([[1.0], [np.inf]], [1.0, 2.0])
    with pytest.raises(ValueError):
        Sample(np.zeros((3, 2)), np.zeros(4))


def test_lambda_matrix_check_rejects():
    with pytest.raises(ValueError, match="symmetric"):
        LambdaMatrix([[1.0, 2.0], [0.0, 1.0]]).check()
    with pytest.raises(ValueError, match="semidefinite"):
        LambdaMatrix([[1.0, 0.0], [0.0, -1.0]]).check()


def test_csv_round_trip():
    s = _random_sample(np.random.default_rng(14), n=25, d=3)
    buf = io.StringIO()
    write_sample_csv(s, buf)
    buf.seek(0)
    back = read_sample_csv(buf)
    assert np.array_equal(back.x, s.x) and np.array_equal(back.y, s.y)


@pytest.mark.parametrize("text,lineno", [
    ("y,x1\n1,2\n3\n", 3),
    ("y,x1\n1,2\n3,abc\n", 3),
    ("y,z1\n1,2\n", 1),
    ("y,x1\n1,2\n2,nan\n", 3),
])
def test_csv_errors_name_the_line(text, lineno):
    with pytest.raises(SampleFormatError) as exc:
        read_sample_csv(io.StringIO(text))
    assert exc.value.lineno == lineno
    assert f"line {lineno}" in str(exc.value)


def test_csv_empty():
    with pytest.raises(SampleFormatError, match="no observations"):
        read_sample_csv(io.StringIO(""))
    with pytest.raises(SampleFormatError, match="no observations"):
        read_sample_csv(io.StringIO("y,x1,x2\n"))
