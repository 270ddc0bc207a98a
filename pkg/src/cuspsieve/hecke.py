"""Coefficient laws of the Hecke eigenforms Delta_k.

Multiplicativity over coprime indices, the prime-power recurrence

    a(p^(j+2)) = a(p) a(p^(j+1)) - p^(k-1) a(p^j),

its closed trigonometric form, and the reduction of the first vanishing
index to a prime.
"""

from __future__ import annotations

from math import gcd, isqrt

import mpmath

from cuspsieve.arith import factorize, primes_upto
from cuspsieve.qseries import _check_weight, delta_k


class InsufficientData(LookupError):
    """A prime coefficient needed to assemble a_n was not supplied."""

    def __init__(self, prime: int):
        super().__init__(f"insufficient data: no coefficient supplied for the prime {prime}")
        self.prime = prime


class DeligneBoundError(ValueError):
    pass


class DegenerateAngle(ValueError):
    pass


def prime_power_coefficient(k: int, p: int, e: int, a_p: int) -> int:
    """a(p^e) from a(p) by the three-term recurrence."""
    prev, cur = 1, a_p
    if e == 0:
        return 1
    pk = p ** (k - 1)
    for _ in range(e - 1):
        prev, cur = cur, a_p * cur - pk * prev
    return cur


def coefficient_from_primes(k: int, n: int, prime_coeffs: dict[int, int]) -> int:
    """Assemble a_n from the prime coefficients a_p for p | n."""
    _check_weight(k)
    if n < 1:
        raise ValueError("n must be a positive integer")
    result = 1
    for p, e in sorted(factorize(n).items()):
        if p not in prime_coeffs:
            raise InsufficientData(p)
        result *= prime_power_coefficient(k, p, e, prime_coeffs[p])
    return result


def deligne_ok(k: int, p: int, a_p: int) -> bool:
    """|a_p| <= 2 p^((k-1)/2), decided in exact integers as a_p^2 <= 4 p^(k-1)."""
    return a_p * a_p <= 4 * p ** (k - 1)


def trig_angle(k: int, p: int, a_p: int, precision_bits: int = 128) -> mpmath.mpf:
    """theta_p in [0, pi] with 2 cos(theta_p) = a_p p^(-(k-1)/2)."""
    if not deligne_ok(k, p, a_p):
        raise DeligneBoundError(f"a_{p} = {a_p} violates |a_p| <= 2 p^((k-1)/2) for k = {k}")
    if a_p * a_p == 4 * p ** (k - 1):
        raise DegenerateAngle(f"theta_{p} is 0 or pi: sin(theta) vanishes")
    with mpmath.workprec(precision_bits):
        x = mpmath.mpf(a_p) / (2 * mpmath.sqrt(mpmath.mpf(p) ** (k - 1)))
        return +mpmath.acos(x)


def trig_check(k: int, p: int, n: int, a_p: int, a_pn: int, precision_bits: int = 128) -> mpmath.mpf:
    """Relative residual of a(p^n) against p^((k-1)n/2) sin((n+1) theta) / sin(theta).

    Returns |a_pn - closed form| / max(1, |a_pn|), evaluated with
    ``precision_bits`` of working precision.  A consistent pair gives a
    residual well below 2^(-precision_bits/2).
    """
    _check_weight(k)
    if n < 0:
        raise ValueError("n must be nonnegative")
    theta = trig_angle(k, p, a_p, precision_bits)
    with mpmath.workprec(precision_bits):
        scale = mpmath.sqrt(mpmath.mpf(p) ** ((k - 1) * n))
        value = scale * mpmath.sin((n + 1) * theta) / mpmath.sin(theta)
        return abs(mpmath.mpf(a_pn) - value) / max(1, abs(a_pn))


def theorem2_preconditions(k: int, a2: int, a3: int) -> bool:
    """|a_2| != 2^(k/2) and |a_3| != 3^(k/2).

    When both hold, the smallest n with a_n = 0 (if any) is a prime.
    """
    return abs(a2) != 2 ** (k // 2) and abs(a3) != 3 ** (k // 2)


def smallest_vanishing_scan(k: int, bound: int) -> int | None:
    """First index n <= bound with a_n(Delta_k) = 0, or None.

    Only primes are scanned when the preconditions above hold; otherwise
    every n is checked.
    """
    _check_weight(k)
    if bound < 2:
        raise ValueError("bound must be >= 2")
    f = delta_k(k, max(bound, 3))
    if theorem2_preconditions(k, f[2], f[3]):
        indices = primes_upto(bound)
    else:
        indices = range(1, bound + 1)
    for n in indices:
        if f[n] == 0:
            return n
    return None


def multiplicativity_violations(k: int, nmax: int) -> list[tuple[int, int]]:
    """Coprime pairs (m, n), 1 < m < n, m*n <= nmax with a_mn != a_m a_n."""
    f = delta_k(k, nmax)
    bad = []
    for m in range(2, isqrt(nmax) + 1):
        for n in range(m + 1, nmax // m + 1):
            if gcd(m, n) == 1 and f[m * n] != f[m] * f[n]:
                bad.append((m, n))
    return bad


def recurrence_violations(k: int, nmax: int) -> list[tuple[int, int]]:
    """Pairs (p, j) with p^(j+2) <= nmax where the prime-power recurrence fails."""
    f = delta_k(k, nmax)
    bad = []
    for p in primes_upto(isqrt(nmax)):
        pk = p ** (k - 1)
        j = 0
        while p ** (j + 2) <= nmax:
            if f[p ** (j + 2)] != f[p] * f[p ** (j + 1)] - pk * f[p**j]:
                bad.append((p, j))
            j += 1
    return bad


def deligne_violations(k: int, pmax: int) -> list[int]:
    f = delta_k(k, pmax)
    return [p for p in primes_upto(pmax) if not deligne_ok(k, p, f[p])]


def trig_suite(k: int, pmax: int, nmax: int, precision_bits: int = 128) -> list[tuple[int, int, mpmath.mpf]]:
    """(p, n, residual) for every prime p <= pmax and 0 <= n <= nmax.

    Exact a(p^n) come from the recurrence on the expanded a_p, so no
    expansion to p^nmax is needed.
    """
    f = delta_k(k, pmax)
    rows = []
    for p in primes_upto(pmax):
        for n in range(nmax + 1):
            a_pn = prime_power_coefficient(k, p, n, f[p])
            rows.append((p, n, trig_check(k, p, n, f[p], a_pn, precision_bits)))
    return rows
