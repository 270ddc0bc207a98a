"""Polynomials over prime fields and the degree-2 factor criterion.

For the projective mod-ell polynomial P of a form f and a prime p that does
not divide ell or the discriminant of P, a_p(f) = 0 (mod ell) exactly when
P has an irreducible quadratic factor over F_p.  Only the first two
distinct-degree steps are needed to decide that.

F_p[x] elements are plain lists of ints in ascending degree with no trailing
zeros; ``[]`` is the zero polynomial.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from pathlib import Path


class PolyFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        where += f"line {line}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line


class Ramified(ArithmeticError):
    """P mod p is not squarefree, so p may divide Disc(P)."""


class Outcome(str, enum.Enum):
    RULED_OUT = "RuledOut"
    NOT_RULED_OUT = "NotRuledOut"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ProjPolynomial:
    ell: int
    k: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs or self.coeffs[-1] != 1:
            raise PolyFormatError("polynomial must be monic")
        if self.degree not in (self.ell + 1, 4):
            raise PolyFormatError(f"degree {self.degree} is neither ell+1 = {self.ell + 1} nor 4")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_text(self) -> str:
        return f"ell={self.ell}\nk={self.k}\ncoeffs={','.join(map(str, self.coeffs))}\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


# x^4 - x^3 - 7x^2 + 11x + 3: splitting field cut out by the mod-59
# projective representation of Delta_16 (image S_4).
QUARTIC_59 = ProjPolynomial(59, 16, (3, 11, -7, -1, 1))

BUILTIN_POLYS = {"quartic59": QUARTIC_59}


def parse_poly(text: str, path=None) -> ProjPolynomial:
    """Parse the three-line ``ell=`` / ``k=`` / ``coeffs=`` format strictly."""
    fields: dict[str, tuple[str, int]] = {}
    lines = text.splitlines()
    order = ("ell", "k", "coeffs")
    content = [(i, ln.strip()) for i, ln in enumerate(lines, 1) if ln.strip()]
    if len(content) != 3:
        raise PolyFormatError(f"expected 3 lines, found {len(content)}", None, path)
    for (lineno, ln), want in zip(content, order):
        key, sep, value = ln.partition("=")
        key = key.strip()
        if not sep:
            raise PolyFormatError(f"expected key=value, got {ln!r}", lineno, path)
        if key not in order:
            raise PolyFormatError(f"unknown key {key!r}", lineno, path)
        if key != want:
            raise PolyFormatError(f"expected key {want!r}, got {key!r}", lineno, path)
        fields[key] = (value.strip(), lineno)
    try:
        ell = int(fields["ell"][0])
    except ValueError:
        raise PolyFormatError(f"ell is not an integer: {fields['ell'][0]!r}", fields["ell"][1], path) from None
    try:
        k = int(fields["k"][0])
    except ValueError:
        raise PolyFormatError(f"k is not an integer: {fields['k'][0]!r}", fields["k"][1], path) from None
    raw, lineno = fields["coeffs"]
    try:
        coeffs = tuple(int(c) for c in raw.split(","))
    except ValueError:
        raise PolyFormatError(f"coefficients must be decimal integers: {raw!r}", lineno, path) from None
    try:
        return ProjPolynomial(ell, k, coeffs)
    except PolyFormatError as exc:
        raise PolyFormatError(str(exc), lineno, path) from None


def load_poly(path) -> ProjPolynomial:
    """Read a polynomial data file, or one of the built-in names (e.g. ``quartic59``)."""
    if str(path) in BUILTIN_POLYS:
        return BUILTIN_POLYS[str(path)]
    return parse_poly(Path(path).read_text(), path)


# -- F_p[x] arithmetic ------------------------------------------------------


def trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def reduce_coeffs(coeffs, p: int) -> list[int]:
    return trim([c % p for c in coeffs])


def reduce_mod(P: ProjPolynomial, p: int) -> list[int]:
    return reduce_coeffs(P.coeffs, p)


def deg(a: list[int]) -> int:
    return len(a) - 1


def sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return trim(out)


def mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([c % p for c in out])


def divmod_poly(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = deg(b)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - db, 0)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i] * inv % p
        if c:
            q[i - db] = c
            for j in range(db + 1):
                r[i - db + j] = (r[i - db + j] - c * b[j]) % p
    return trim(q), trim(r[:db] if db > 0 else [])


def mod(a: list[int], m: list[int], p: int) -> list[int]:
    return divmod_poly(a, m, p)[1]


def monic(a: list[int], p: int) -> list[int]:
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def gcd(a: list[int], b: list[int], p: int) -> list[int]:
    """Monic gcd; gcd(0, 0) = 0."""
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, mod(a, b, p)
    return monic(a, p)


def derivative(a: list[int], p: int) -> list[int]:
    return trim([i * c % p for i, c in enumerate(a)][1:])


def powmod(base: list[int], e: int, m: list[int], p: int) -> list[int]:
    """base^e mod (m, p) by square-and-multiply."""
    result = [1] if deg(m) > 0 else []
    base = mod(base, m, p)
    while e:
        if e & 1:
            result = mod(mul(result, base, p), m, p)
        e >>= 1
        if e:
            base = mod(mul(base, base, p), m, p)
    return result


def polymod_pow_x(p: int, e: int, M: list[int]) -> list[int]:
    """x^e reduced modulo (M, p)."""
    M = reduce_coeffs(M, p)
    if deg(M) < 1:
        raise ValueError("modulus must have degree >= 1")
    return powmod([0, 1], e, M, p)


# -- the criterion ----------------------------------------------------------


def quadratic_part(P, p: int) -> list[int]:
    """Product of the distinct irreducible quadratic factors of P mod p.

    P is a ProjPolynomial or a coefficient sequence.  Raises Ramified when
    P mod p is not squarefree.
    """
    coeffs = P.coeffs if isinstance(P, ProjPolynomial) else P
    f = reduce_coeffs(coeffs, p)
    if deg(f) < 1:
        return [1]
    if deg(gcd(f, derivative(f, p), p)) > 0:
        raise Ramified(f"polynomial is not squarefree mod {p}")
    x = [0, 1]
    xp = polymod_pow_x(p, p, f)
    g1 = gcd(sub(xp, x, p), f, p)
    rest = divmod_poly(f, g1, p)[0]
    if deg(rest) < 2:
        return [1]
    # x^(p^2) as (x^p)^p, reusing the first Frobenius image
    xp = mod(xp, rest, p)
    xpp = powmod(xp, p, rest, p)
    return gcd(sub(xpp, x, p), rest, p)


def has_degree2_factor(P, p: int) -> bool:
    """True iff P mod p has an irreducible factor of degree 2 (P squarefree mod p)."""
    return deg(quadratic_part(P, p)) >= 2


def eliminate_by_poly(P: ProjPolynomial, p: int) -> Outcome:
    """RuledOut means a_p != 0 mod ell, hence a_p != 0."""
    if p == P.ell:
        raise ValueError(f"p = {p} equals the polynomial's ell")
    try:
        found = has_degree2_factor(P, p)
    except Ramified:
        return Outcome.INDETERMINATE
    return Outcome.NOT_RULED_OUT if found else Outcome.RULED_OUT


# -- brute-force oracle -----------------------------------------------------


def irreducible_quadratics(p: int) -> list[list[int]]:
    """All monic irreducible x^2 + b x + c over F_p (no roots)."""
    out = []
    for b in range(p):
        for c in range(p):
            if all((r * r + b * r + c) % p for r in range(p)):
                out.append([c, b, 1])
    return out


def has_degree2_factor_bruteforce(coeffs, p: int) -> bool:
    f = reduce_coeffs(coeffs, p)
    return any(not mod(f, q, p) for q in irreducible_quadratics(p)) if deg(f) >= 2 else False
