"""Truncated q-expansions with exact integer coefficients.

A :class:`PowerSeries` carries its truncation bound explicitly: coefficient
``n`` is stored for ``0 <= n <= bound`` and nothing beyond is known.  All
arithmetic returns the minimum bound of its operands.

The cusp forms Delta_k of level one are built from Eisenstein series::

    Delta    = (E4^3 - E6^2) / 1728
    Delta_16 = Delta * E4        Delta_18 = Delta * E6
    Delta_20 = Delta * E4^2      Delta_22 = Delta * E4 * E6
    Delta_26 = Delta * E4^2 * E6
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from threading import Lock

FORM_WEIGHTS = (12, 16, 18, 20, 22, 26)

# Products are switched to Kronecker substitution above this length.
_NAIVE_CUTOFF = 48


@dataclass(frozen=True)
class PowerSeries:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.coeffs, tuple):
            object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValueError("a power series needs at least the constant term")

    @property
    def bound(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> int:
        if n < 0 or n > self.bound:
            raise IndexError(f"coefficient {n} is beyond the truncation bound {self.bound}")
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def truncate(self, bound: int) -> PowerSeries:
        if bound > self.bound:
            raise ValueError(f"cannot extend a series known to O(q^{self.bound + 1}) up to q^{bound}")
        return PowerSeries(self.coeffs[: bound + 1])

    def __add__(self, other: PowerSeries) -> PowerSeries:
        b = min(self.bound, other.bound)
        return PowerSeries(tuple(x + y for x, y in zip(self.coeffs[: b + 1], other.coeffs)))

    def __sub__(self, other: PowerSeries) -> PowerSeries:
        b = min(self.bound, other.bound)
        return PowerSeries(tuple(x - y for x, y in zip(self.coeffs[: b + 1], other.coeffs)))

    def __neg__(self) -> PowerSeries:
        return PowerSeries(tuple(-x for x in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def scale(self, c: int) -> PowerSeries:
        return PowerSeries(tuple(c * x for x in self.coeffs))

    def exact_div(self, d: int) -> PowerSeries:
        """Divide every coefficient by ``d``; any remainder raises ArithmeticError."""
        out = []
        for n, x in enumerate(self.coeffs):
            q, r = divmod(x, d)
            if r:
                raise ArithmeticError(f"coefficient {n} = {x} is not divisible by {d}")
            out.append(q)
        return PowerSeries(tuple(out))


def sigma(n: int, r: int) -> int:
    """Sum of d^r over the positive divisors d of n."""
    if n < 1:
        raise ValueError("sigma is defined for n >= 1")
    if r < 0:
        raise ValueError("r must be nonnegative")
    total = 0
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            e = n // d
            total += d**r
            if e != d:
                total += e**r
    return total


def sigma_table(bound: int, r: int) -> list[int]:
    """[0, sigma_r(1), ..., sigma_r(bound)] by a divisor sieve."""
    table = [0] * (bound + 1)
    for d in range(1, bound + 1):
        dr = d**r
        for m in range(d, bound + 1, d):
            table[m] += dr
    return table


def eisenstein(weight: int, bound: int) -> PowerSeries:
    """Normalized E4 = 1 + 240 sum sigma_3(n) q^n or E6 = 1 - 504 sum sigma_5(n) q^n."""
    if weight == 4:
        c, r = 240, 3
    elif weight == 6:
        c, r = -504, 5
    else:
        raise ValueError(f"only weights 4 and 6 are supported, got {weight}")
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    table = sigma_table(bound, r)
    return PowerSeries((1,) + tuple(c * s for s in table[1:]))


def naive_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Schoolbook Cauchy product, truncated at the smaller bound."""
    bound = min(a.bound, b.bound)
    x, y = a.coeffs, b.coeffs
    out = [0] * (bound + 1)
    for i in range(bound + 1):
        xi = x[i]
        if xi:
            for j in range(bound + 1 - i):
                out[i + j] += xi * y[j]
    return PowerSeries(tuple(out))


def _pack(coeffs, nbytes: int) -> int:
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def kronecker_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product via one big-integer multiplication.

    Both operands are evaluated at q = 2^(8*nbytes) with nbytes large enough
    that every product coefficient fits in a balanced digit; the digits are
    recovered after shifting them into [0, 2^(8*nbytes)).
    """
    bound = min(a.bound, b.bound)
    n = bound + 1
    x, y = a.coeffs[:n], b.coeffs[:n]
    mx = max(abs(c) for c in x)
    my = max(abs(c) for c in y)
    if mx == 0 or my == 0:
        return PowerSeries((0,) * n)
    # |c_i| <= n * mx * my < 2^(bits - 1)
    bits = (n * mx * my).bit_length() + 2
    nbytes = (bits + 7) // 8
    prod = _pack(x, nbytes) * _pack(y, nbytes)
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes(half.to_bytes(nbytes, "little") * n, "little")
    width = 8 * nbytes * n
    digits = ((prod + offset) & ((1 << width) - 1)).to_bytes(nbytes * n, "little")
    return PowerSeries(
        tuple(int.from_bytes(digits[i * nbytes : (i + 1) * nbytes], "little") - half for i in range(n))
    )


def mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Exact product truncated at ``min(a.bound, b.bound)``."""
    if min(a.bound, b.bound) < _NAIVE_CUTOFF:
        return naive_mul(a, b)
    return kronecker_mul(a, b)


def _check_weight(k: int) -> None:
    if k not in FORM_WEIGHTS:
        raise ValueError(f"no unique normalized level-one cusp form of weight {k}; expected one of {FORM_WEIGHTS}")


_cache: dict[int, PowerSeries] = {}
_cache_lock = Lock()


def _build_all(bound: int) -> dict[int, PowerSeries]:
    e4 = eisenstein(4, bound)
    e6 = eisenstein(6, bound)
    e4sq = mul(e4, e4)
    try:
        delta = (mul(e4sq, e4) - mul(e6, e6)).exact_div(1728)
    except ArithmeticError as exc:  # pragma: no cover - signals a bug in mul/eisenstein
        raise AssertionError(f"E4^3 - E6^2 not divisible by 1728: {exc}") from exc
    d20 = mul(delta, e4sq)
    return {
        12: delta,
        16: mul(delta, e4),
        18: mul(delta, e6),
        20: d20,
        22: mul(mul(delta, e4), e6),
        26: mul(d20, e6),
    }


def delta_k(k: int, bound: int) -> PowerSeries:
    """q-expansion of the normalized cusp form of weight k, up to q^bound.

    Expansions are cached per weight at the largest bound requested so far;
    a smaller request is served as a prefix.
    """
    _check_weight(k)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    with _cache_lock:
        cached = _cache.get(k)
        if cached is None or cached.bound < bound:
            _cache.update(_build_all(bound))
            cached = _cache[k]
    return cached.truncate(bound)


def theta_qf(a: int, b: int, c: int, bound: int) -> PowerSeries:
    """Theta series of the binary form a m^2 + b m n + c n^2.

    Coefficient t counts pairs (m, n) with a m^2 + b m n + c n^2 = t.  The
    enumeration completes the square in m, so for each n only the m-interval
    that can reach values <= bound is visited.
    """
    disc = 4 * a * c - b * b
    if a <= 0 or disc <= 0:
        raise ValueError(f"form ({a}, {b}, {c}) is not positive definite")
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    counts = [0] * (bound + 1)
    # 4a*Q = (2am + bn)^2 + disc*n^2, so disc*n^2 <= 4a*bound
    nmax = isqrt(4 * a * bound // disc) + 1
    for n in range(-nmax, nmax + 1):
        rest = 4 * a * bound - disc * n * n
        if rest < 0:
            continue
        s = isqrt(rest)
        # |2am + bn| <= s
        mlo = -((s + b * n) // (2 * a)) - 1
        mhi = (s - b * n) // (2 * a) + 1
        for m in range(mlo, mhi + 1):
            t = a * m * m + b * m * n + c * n * n
            if t <= bound:
                counts[t] += 1
    return PowerSeries(tuple(counts))


def theta_qf_box(a: int, b: int, c: int, bound: int, box: int) -> PowerSeries:
    """Brute-force theta counts over the square |m|, |n| <= box."""
    counts = [0] * (bound + 1)
    for m in range(-box, box + 1):
        for n in range(-box, box + 1):
            t = a * m * m + b * m * n + c * n * n
            if 0 <= t <= bound:
                counts[t] += 1
    return PowerSeries(tuple(counts))


def eta_power_delta(bound: int) -> PowerSeries:
    """q * prod (1 - q^n)^24, from Jacobi's identity for prod (1 - q^n)^3.

    Independent of the Eisenstein construction; used to cross-check Delta.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    n = bound - 1
    cube = [0] * (n + 1)
    j = 0
    while j * (j + 1) // 2 <= n:
        cube[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    s = PowerSeries(tuple(cube))
    s2 = naive_mul(s, s)
    s4 = naive_mul(s2, s2)
    s8 = naive_mul(s4, s4)
    return PowerSeries((0,) + s8.coeffs)
