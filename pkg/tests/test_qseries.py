import pytest
from hypothesis import given, settings, strategies as st

from cuspsieve.qseries import (
    FORM_WEIGHTS,
    PowerSeries,
    delta_k,
    eisenstein,
    eta_power_delta,
    kronecker_mul,
    mul,
    naive_mul,
    sigma,
    sigma_table,
    theta_qf,
    theta_qf_box,
)


def divisors_brute(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@pytest.mark.parametrize("n,r,want", [(1, 3, 1), (6, 3, 252), (4, 5, 1057)])
def test_sigma_examples(n, r, want):
    assert sigma(n, r) == want


def test_sigma_matches_enumeration_and_table():
    table3 = sigma_table(300, 3)
    for n in range(1, 301):
        assert sigma(n, 3) == sum(d**3 for d in divisors_brute(n)) == table3[n]


def test_sigma_rejects_zero():
    with pytest.raises(ValueError):
        sigma(0, 3)


def test_eisenstein_examples():
    assert eisenstein(4, 2).coeffs == (1, 240, 2160)
    assert eisenstein(6, 1).coeffs == (1, -504)
    assert eisenstein(4, 0).coeffs == (1,)


@pytest.mark.parametrize("w", [2, 8, 12])
def test_eisenstein_rejects_other_weights(w):
    with pytest.raises(ValueError):
        eisenstein(w, 3)


def test_mul_examples():
    assert mul(PowerSeries([1, 1]), PowerSeries([1, -1])).coeffs == (1, 0)
    assert mul(PowerSeries([0, 1]), PowerSeries([0, 1])).coeffs == (0, 0)
    sq = mul(eisenstein(4, 2), eisenstein(4, 2))
    assert sq.coeffs == (1, 480, 2 * 2160 + 240**2)


def test_bound_is_min_of_operands():
    a = PowerSeries([1, 2, 3, 4])
    b = PowerSeries([5, 6])
    assert (a + b).bound == 1
    assert (a - b).bound == 1
    assert mul(a, b).bound == 1


def test_truncate_never_extends():
    with pytest.raises(ValueError):
        PowerSeries([1, 2]).truncate(5)


coeff = st.integers(min_value=-(10**40), max_value=10**40)


@settings(max_examples=60, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=120), st.lists(coeff, min_size=1, max_size=120))
def test_kronecker_matches_schoolbook(xs, ys):
    a, b = PowerSeries(xs), PowerSeries(ys)
    assert kronecker_mul(a, b) == naive_mul(a, b)


def test_delta_examples():
    assert delta_k(12, 1).coeffs == (0, 1)
    assert delta_k(12, 3).coeffs == (0, 1, -24, 252)
    assert delta_k(16, 2).coeffs == (0, 1, 216)
    # a_2(Delta_16) = 2 + 2^14 mod 11
    assert 216 % 11 == (2 + 2**14) % 11 == 7


def test_delta12_eta_product_oracle():
    assert delta_k(12, 500) == eta_power_delta(500)


@pytest.mark.parametrize("k", FORM_WEIGHTS)
def test_delta_normalized_and_prefix_stable(k):
    big = delta_k(k, 400)
    assert big[0] == 0 and big[1] == 1
    for b in (1, 7, 50, 399):
        assert delta_k(k, b).coeffs == big.coeffs[: b + 1]


def test_unsupported_weight():
    with pytest.raises(ValueError):
        delta_k(14, 5)


def test_theta_examples():
    assert theta_qf(1, 1, 8, 1).coeffs == (1, 2)
    assert theta_qf(2, 1, 4, 2).coeffs == (1, 0, 2)
    assert theta_qf(1, 1, 8, 0).coeffs == (1,)


@pytest.mark.parametrize("form", [(1, 1, 8), (2, 1, 4), (1, 0, 1), (3, -2, 5)])
def test_theta_enumeration_exhaustive(form):
    bound = 1500
    # 4a*Q >= disc*n^2 and 4c*Q >= disc*m^2 give a safe box of 120 for these forms
    assert theta_qf(*form, bound) == theta_qf_box(*form, bound, 120)


def test_theta_crude_box_is_not_enough():
    # |m| can reach sqrt(32 * bound / 31), beyond isqrt(bound) + 1 = 317
    bound = 100_000
    assert theta_qf(1, 1, 8, bound) != theta_qf_box(1, 1, 8, bound, 317)
    assert theta_qf(1, 1, 8, bound) == theta_qf_box(1, 1, 8, bound, 330)


def test_theta_rejects_indefinite():
    with pytest.raises(ValueError):
        theta_qf(1, 3, 1, 5)
    with pytest.raises(ValueError):
        theta_qf(-1, 0, -1, 5)
