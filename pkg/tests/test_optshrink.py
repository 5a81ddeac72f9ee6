import numpy as np
import pytest

from factorcount import optshrink_functionals
from factorcount.errors import DegenerateTopPair, DomainError, ZeroD


def test_hand_worked_example():
    # spectrum (4, 1, 1), gamma = 1: every quantity is a small rational
    f = optshrink_functionals(np.array([4.0, 1.0, 1.0]), 1.0)
    assert f.m == pytest.approx(-1.0 / 3.0, rel=1e-15)
    assert f.v == pytest.approx(-1.0 / 3.0, rel=1e-15)
    assert f.D == pytest.approx(4.0 / 9.0, rel=1e-15)
    assert f.ell == pytest.approx(9.0 / 4.0, rel=1e-15)
    assert f.m_prime == pytest.approx(1.0 / 9.0, rel=1e-15)
    assert f.v_prime == pytest.approx(1.0 / 9.0, rel=1e-15)
    assert f.D_prime == pytest.approx(-5.0 / 27.0, rel=1e-15)
    assert f.c_r_sq == pytest.approx(0.8, rel=1e-15)
    assert f.c_l_sq == pytest.approx(0.8, rel=1e-15)
    assert f.lam == 4.0
    assert f.gamma == 1.0


def _random_spectrum(rng, size=None):
    size = size or int(rng.integers(3, 60))
    tail = np.sort(rng.uniform(0.05, 2.0, size=size - 1))[::-1]
    top = tail[0] * rng.uniform(1.5, 6.0)
    return np.concatenate([[top], tail])


def test_identities_random_spectra():
    rng = np.random.default_rng(10)
    for _ in range(200):
        spec = _random_spectrum(rng)
        gamma = float(rng.uniform(0.1, 3.0))
        f = optshrink_functionals(spec, gamma)
        assert f.D == pytest.approx(f.lam * f.m * f.v, rel=1e-12)
        assert f.ell * f.D == pytest.approx(1.0, rel=1e-12)
        assert f.D_prime == pytest.approx(
            f.m * f.v + f.lam * (f.m * f.v_prime + f.m_prime * f.v), rel=1e-12
        )
        assert f.m_prime > 0.0  # mean of squares
        assert f.c_r_sq == pytest.approx(f.m / (f.D_prime * f.ell), rel=1e-12)
        assert f.c_l_sq == pytest.approx(f.v / (f.D_prime * f.ell), rel=1e-12)


def test_gamma_one_collapses_v_to_m():
    rng = np.random.default_rng(11)
    spec = _random_spectrum(rng)
    f = optshrink_functionals(spec, 1.0)
    assert f.v == f.m
    assert f.v_prime == f.m_prime


def _m_of(lam, tail):
    return float(np.mean(1.0 / (tail - lam)))


def _v_of(lam, tail, gamma):
    return gamma * _m_of(lam, tail) - (1.0 - gamma) / lam


def test_primes_match_finite_differences():
    rng = np.random.default_rng(12)
    for _ in range(50):
        spec = _random_spectrum(rng)
        gamma = float(rng.uniform(0.2, 2.5))
        f = optshrink_functionals(spec, gamma)
        lam, tail = spec[0], spec[1:]
        h = 1e-7 * lam
        fd_m = (_m_of(lam + h, tail) - _m_of(lam - h, tail)) / (2 * h)
        fd_v = (_v_of(lam + h, tail, gamma) - _v_of(lam - h, tail, gamma)) / (2 * h)
        assert f.m_prime == pytest.approx(fd_m, rel=1e-5)
        assert f.v_prime == pytest.approx(fd_v, rel=1e-5)


def test_degenerate_top_pair():
    with pytest.raises(DegenerateTopPair):
        optshrink_functionals(np.array([2.0, 2.0, 1.0]), 0.5)
    near = np.array([2.0, 2.0 * (1.0 - 1e-14), 1.0])
    with pytest.raises(DegenerateTopPair):
        optshrink_functionals(near, 0.5)
    # a clearly separated pair passes
    optshrink_functionals(np.array([2.0, 2.0 * (1.0 - 1e-9), 1.0]), 0.5)


def test_zero_d_detected():
    # gamma = 2, spectrum (1, -1): m = -1/2, v = 2m + 1 = 0, so D = 0
    with pytest.raises(ZeroD):
        optshrink_functionals(np.array([1.0, -1.0]), 2.0)


def test_validation():
    good = np.array([3.0, 1.0, 0.5])
    with pytest.raises(DomainError):
        optshrink_functionals(np.array([1.0]), 1.0)
    with pytest.raises(DomainError):
        optshrink_functionals(np.array([1.0, 2.0, 3.0]), 1.0)  # increasing
    with pytest.raises(DomainError):
        optshrink_functionals(np.array([[3.0, 1.0], [1.0, 0.5]]), 1.0)
    with pytest.raises(DomainError):
        optshrink_functionals(np.array([3.0, np.nan, 0.5]), 1.0)
    with pytest.raises(DomainError):
        optshrink_functionals(np.array([-1.0, -2.0]), 1.0)  # top not positive
    for g in (0.0, -0.5, np.nan, np.inf):
        with pytest.raises(DomainError):
            optshrink_functionals(good, g)
