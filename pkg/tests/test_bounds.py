import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from eucsec.bounds import (
    bound_report,
    gaussian_mean_norm,
    lambda_prime_lower,
    meyer_pajor_lower,
    normalized_upper,
    sphere_average_l1,
    thm1_upper,
    thm2_upper,
)
from eucsec.types import DomainError

from oracles import mu_mp


def test_mu_examples():
    assert gaussian_mean_norm(1, 1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    assert gaussian_mean_norm(2, 1) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)
    for d in (1, 7, 100, 12345):
        assert gaussian_mean_norm(d, 2) == math.sqrt(d)


@pytest.mark.parametrize("d", [1, 3, 10, 999, 10**4, 10**5, 10**6])
@pytest.mark.parametrize("p", [0.5, 1.0, 1.3, 1.5, 1.9])
def test_mu_matches_mpmath(d, p):
    ref = float(mu_mp(d, p))
    assert gaussian_mean_norm(d, p) == pytest.approx(ref, rel=1e-12)


def test_mu_domain():
    with pytest.raises(DomainError):
        gaussian_mean_norm(0, 1)
    with pytest.raises(DomainError):
        gaussian_mean_norm(3, 0)
    with pytest.raises(DomainError):
        gaussian_mean_norm(3, -1.0)


@pytest.mark.parametrize("p", [1.0, 1.5])
def test_mu_over_sqrt_d_increasing(p):
    r = np.array([gaussian_mean_norm(d, p) / math.sqrt(d) for d in range(1, 2001)])
    assert np.all(np.diff(r) > 0)
    assert r[-1] < 1.0
    if p == 1.0:
        assert r[-1] > 0.999


def test_thm1_examples():
    for N in (1, 5, 64):
        assert thm1_upper(N, 1) == pytest.approx(math.sqrt(N), rel=1e-14)
    assert thm1_upper(4, 2) == pytest.approx(1.8006326323142121, rel=1e-12)
    with pytest.raises(DomainError):
        thm1_upper(3, 4)
    with pytest.raises(DomainError):
        thm1_upper(3, 0)


def test_thm1_large_d_approaches_limit():
    N = 10**6
    ratios = [thm1_upper(N, d) / math.sqrt(N) for d in (2, 10, 100, 1000, 10**4, 10**5, 10**6)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] - math.sqrt(2 / math.pi) < 1e-6


def test_thm2_examples():
    for N, d in [(5, 1), (9, 4), (30, 30)]:
        # p = 2: the mu ratio is 1/sqrt(d), so the bound is exactly 1
        assert thm2_upper(N, d, 2.0) == pytest.approx(1.0, rel=1e-14)
    assert thm2_upper(16, 2, 1.0) == pytest.approx(3.6012652646284243, rel=1e-12)


@given(st.integers(1, 300), st.integers(1, 300))
def test_thm2_real_p1_is_thm1(a, b):
    N, d = max(a, b), min(a, b)
    assert thm2_upper(N, d, 1.0, "real") == pytest.approx(thm1_upper(N, d), rel=1e-12)


@pytest.mark.parametrize("N,d", [(4, 1), (10, 3), (100, 50), (1000, 999)])
def test_thm2_complex_p1_closed_form(N, d):
    expected = math.sqrt(math.pi) / 2 * math.sqrt(N) * math.sqrt(2 * d) / float(mu_mp(2 * d))
    assert thm2_upper(N, d, 1.0, "complex") == pytest.approx(expected, rel=1e-12)


@given(st.integers(1, 500), st.integers(1, 500), st.floats(1.0, 2.0))
def test_thm2_below_trivial(a, b, p):
    N, d = max(a, b), min(a, b)
    assert thm2_upper(N, d, p) <= N ** (1 / p - 0.5) * math.sqrt(d) * (1 + 1e-12)


def test_normalized_upper_examples():
    assert normalized_upper(2, 1.0) == pytest.approx(math.sqrt(8) / math.pi, rel=1e-12)
    assert normalized_upper(1, 1.0) == pytest.approx(1.0, rel=1e-14)
    ref = math.sqrt(2 / math.pi) * math.sqrt(10) / float(mu_mp(10))
    assert normalized_upper(10, 1.0) == pytest.approx(ref, rel=1e-12)
    assert normalized_upper(10, 1.0) == pytest.approx(0.818049415793567, rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.25, 1.5, 1.75])
def test_normalized_factor_below_one(p):
    for d in range(2, 65):
        assert normalized_upper(d, p) < 1.0
        assert normalized_upper(d, p, "complex") < 1.0


def test_lambda_prime_lower():
    assert lambda_prime_lower(1) == 1.0
    assert lambda_prime_lower(4) == 2.0


def test_meyer_pajor():
    assert meyer_pajor_lower(1, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert meyer_pajor_lower(2, 1.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    for d in range(1, 101):
        v = meyer_pajor_lower(d, 1.0)
        assert v >= math.sqrt(math.pi / (2 * math.e)) * math.sqrt(d)
        assert v <= lambda_prime_lower(d) + 1e-12


def test_meyer_pajor_general_p_volume_formula():
    # Vol(B_p^d) = (2 Gamma(1 + 1/p))^d / Gamma(1 + d/p), d = 2, p = 1.5 via quadrature
    p = 1.5
    area, _ = integrate.quad(lambda x: 2 * (1 - abs(x) ** p) ** (1 / p), -1, 1)
    expected = math.sqrt(math.pi / area)
    assert meyer_pajor_lower(2, p) == pytest.approx(expected, rel=1e-8)


def test_sphere_average():
    assert sphere_average_l1(1) == pytest.approx(1.0, rel=1e-14)
    quad, _ = integrate.quad(lambda t: abs(math.cos(t)) + abs(math.sin(t)), 0, 2 * math.pi,
                             points=[math.pi / 2, math.pi, 3 * math.pi / 2])
    assert sphere_average_l1(2) == pytest.approx(quad / (2 * math.pi), rel=1e-10)
    assert sphere_average_l1(2) == pytest.approx(4 / math.pi, rel=1e-13)
    assert abs(sphere_average_l1(10**5) / math.sqrt(10**5) - math.sqrt(2 / math.pi)) < 1e-3


def test_sphere_average_below_thm1_at_full_dimension():
    for N in range(1, 200):
        ceiling = math.sqrt(2 / math.pi) * math.sqrt(N) * math.sqrt(N) / gaussian_mean_norm(N, 1)
        assert sphere_average_l1(N) <= ceiling * (1 + 1e-12)


def test_sphere_average_monte_carlo():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((400_000, 8))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    mc = np.abs(X).sum(axis=1).mean()
    assert mc == pytest.approx(sphere_average_l1(8), rel=5e-3)


def test_bound_report_invariants():
    r = bound_report(64, 8, 1.0)
    assert r.thm_lower_lambda_prime == pytest.approx(math.sqrt(8))
    assert r.meyer_pajor_lower <= r.thm_lower_lambda_prime
    assert r.thm_upper_lambda <= math.sqrt(64) * math.sqrt(8)
    assert r.complex_p1_asymptote is None
    rn = bound_report(64, 2, 1.0, measure="normalized")
    assert rn.thm_upper_lambda == pytest.approx(math.sqrt(8) / math.pi)
    rc = bound_report(64, 2, 1.0, "complex")
    assert rc.complex_p1_asymptote == pytest.approx(math.sqrt(math.pi) / 2 * 8)
    rp = bound_report(64, 2, 1.5)
    assert rp.thm_lower_lambda_prime is None and rp.sphere_average is None
    d = rp.to_dict()
    assert d["field"] == "real" and d["measure"] == "counting"
