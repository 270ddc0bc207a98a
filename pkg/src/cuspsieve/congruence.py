"""Exceptional-prime congruences for a_p(Delta_k).

Type (i) primes carry a congruence

    a_p = p^m + p^(k-1-m)  (mod ell^N)

for every prime p != ell, where N may depend on the Legendre symbol (p/ell).
A negative exponent k-1-m means the inverse power of the unit p.

Type (ii) primes (23 for k = 12, 31 for k = 16) fix a_p mod ell by how p
splits in Q(sqrt(-ell)): 0 if inert, 2 if p = u^2 + ell v^2 with u != 0,
and -1 for the remaining split primes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

from cuspsieve.arith import legendre, primes_upto
from cuspsieve.qseries import FORM_WEIGHTS, _check_weight, delta_k, theta_qf


@dataclass(frozen=True)
class Branch:
    legendre: int | None  # None: applies to every p
    N: int


@dataclass(frozen=True)
class ExceptionalRule:
    k: int
    ell: int
    m: int
    branches: tuple[Branch, ...]

    def __post_init__(self):
        conds = sorted((b.legendre for b in self.branches), key=lambda c: (c is not None, c))
        if conds not in ([None], [-1, 1]):
            raise ValueError(f"branches of rule ell={self.ell} are not exhaustive and exclusive: {conds}")
        if any(b.N < 1 for b in self.branches):
            raise ValueError("N must be >= 1 in every branch")

    def N_for(self, p: int) -> int:
        if len(self.branches) == 1:
            return self.branches[0].N
        s = legendre(p, self.ell)
        for b in self.branches:
            if b.legendre == s:
                return b.N
        raise ValueError(f"{p} is not a unit mod {self.ell}")

    @property
    def N_max(self) -> int:
        return max(b.N for b in self.branches)

    def modulus(self, p: int) -> int:
        return self.ell ** self.N_for(p)

    def describe_N(self) -> str:
        if len(self.branches) == 1:
            return str(self.branches[0].N)
        by = {b.legendre: b.N for b in self.branches}
        return f"{by[1]} if (p/{self.ell})=1 else {by[-1]}"


def _rule(k, ell, m, N, N_nonres=None) -> ExceptionalRule:
    if N_nonres is None:
        return ExceptionalRule(k, ell, m, (Branch(None, N),))
    return ExceptionalRule(k, ell, m, (Branch(1, N), Branch(-1, N_nonres)))


# (ell, m, N) for the type (i) primes of each weight, as printed in the
# source tables.  Weight 12 is handled by Serre's residue system instead.
PRINTED_RULES: dict[int, tuple[ExceptionalRule, ...]] = {
    12: (),
    16: (
        _rule(16, 3, 174, 5, 6),
        _rule(16, 5, 17, 2),
        _rule(16, 7, 85, 3),
        _rule(16, 11, 1, 1),
        _rule(16, 3617, 0, 1),
    ),
    18: (
        _rule(18, 3, 386, 5, 6),
        _rule(18, 5, 22, 3),
        _rule(18, 7, 1, 1, 2),
        _rule(18, 11, 1, 1, 2),
        _rule(18, 13, 1, 1),
        _rule(18, 43867, 0, 1),
    ),
    20: (
        _rule(20, 3, 298, 5, 6),
        _rule(20, 5, 13, 2),
        _rule(20, 7, 2, 1, 2),
        _rule(20, 11, 1, 1),
        _rule(20, 13, 1, 1),
        _rule(20, 283, 0, 1),
        _rule(20, 617, 0, 1),
    ),
    22: (
        _rule(22, 3, 18, 6, 7),
        _rule(22, 5, 14, 2),
        _rule(22, 7, 37, 2),
        _rule(22, 13, 1, 1),
        _rule(22, 17, 1, 1),
        _rule(22, 131, 0, 1),
        _rule(22, 593, 0, 1),
    ),
    26: (
        _rule(26, 3, 340, 5, 6),
        _rule(26, 5, 6, 2),
        _rule(26, 7, 2, 1, 2),
        _rule(26, 11, 1, 2),
        _rule(26, 17, 1, 1),
        _rule(26, 19, 1, 1),
        _rule(26, 657931, 0, 1),
    ),
}

# The printed N = 2 for (k=26, ell=11) fails mod 121 for most primes; the
# congruence holds mod 11 only.
CORRECTIONS: dict[tuple[int, int], ExceptionalRule] = {(26, 11): _rule(26, 11, 1, 1)}

RULES: dict[int, tuple[ExceptionalRule, ...]] = {
    k: tuple(CORRECTIONS.get((k, r.ell), r) for r in rules) for k, rules in PRINTED_RULES.items()
}

# Type (ii) prime per weight: a_p = 0 mod ell for non-residues p.
TYPE2: dict[int, int] = {12: 23, 16: 31}

# Serre's necessary conditions for tau(p) = 0, as (ell, modulus, residues).
SERRE_K12: tuple[tuple[int, int, tuple[int, ...]], ...] = (
    (2, 2**11, (2**11 - 1,)),
    (3, 3**7, (3**7 - 1,)),
    (5, 5**3, (5**3 - 1,)),
    (7, 7**2, (19, 31, 48)),
    (691, 691, (690,)),
)


def rules_for(k: int) -> tuple[ExceptionalRule, ...]:
    _check_weight(k)
    return RULES[k]


def expected_residue(rule: ExceptionalRule, p: int) -> int:
    """(p^m + p^(k-1-m)) mod ell^N(p), as an integer in [0, ell^N)."""
    if p % rule.ell == 0:
        raise ValueError(f"p = {p} is the exceptional prime {rule.ell} itself")
    mod = rule.modulus(p)
    return (pow(p, rule.m, mod) + pow(p, rule.k - 1 - rule.m, mod)) % mod


@dataclass(frozen=True)
class Violation:
    p: int
    ell: int
    expected: int
    actual: int
    modulus: int

    def __str__(self):
        return f"p={self.p} ell={self.ell}: a_p = {self.actual} but expected {self.expected} mod {self.modulus}"


def type2_violations(k: int, pmax: int) -> list[Violation]:
    ell = TYPE2[k]
    f = delta_k(k, max(pmax, 2))
    bad = []
    for p in primes_upto(pmax):
        if p == ell:
            continue
        want = type2_residue(k, p) % ell
        got = f[p] % ell
        if want != got:
            bad.append(Violation(p, ell, want, got, ell))
    return bad


def verify_tables(k: int, pmax: int, rules=None) -> list[Violation]:
    """Compare every congruence rule of weight k with the expanded a_p, p <= pmax.

    Covers the type (i) rules (``rules`` overrides the built-in ones) and,
    for k = 12 and 16, the type (ii) prime.  An empty list means agreement.
    """
    _check_weight(k)
    if pmax < 2:
        raise ValueError("pmax must be >= 2")
    if rules is None:
        rules = RULES[k]
    f = delta_k(k, pmax)
    bad = []
    for p in primes_upto(pmax):
        for rule in rules:
            if p == rule.ell:
                continue
            mod = rule.modulus(p)
            want = expected_residue(rule, p)
            got = f[p] % mod
            if want != got:
                bad.append(Violation(p, rule.ell, want, got, mod))
    if k in TYPE2:
        bad.extend(type2_violations(k, pmax))
    bad.sort(key=lambda v: (v.p, v.ell))
    return bad


@lru_cache(maxsize=None)
def solve_zero_residues(rule: ExceptionalRule) -> tuple[int, ...]:
    """Units r mod ell^N_max for which a prime p = r would force a_p = 0 mod ell^N(r).

    Brute force over all units; N(r) follows the rule's branch at r.
    """
    big = rule.ell**rule.N_max
    e1, e2 = rule.m, rule.k - 1 - rule.m
    out = []
    if len(rule.branches) == 1:
        for r in range(1, big):
            if r % rule.ell and (pow(r, e1, big) + pow(r, e2, big)) % big == 0:
                out.append(r)
        return tuple(out)
    for r in range(1, big):
        if r % rule.ell == 0:
            continue
        mod = rule.modulus(r)
        if (pow(r, e1, mod) + pow(r, e2, mod)) % mod == 0:
            out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class SplitClass:
    tag: str  # "Inert", "PrincipalSplit", "NonPrincipalSplit" or "Ramified"
    disc: int
    u: int | None = None
    v: int | None = None

    def __str__(self):
        if self.tag == "PrincipalSplit":
            return f"PrincipalSplit(u={self.u}, v={self.v})"
        return self.tag


def _represent(p: int, d: int) -> tuple[int, int] | None:
    """(u, v) with u != 0 and u^2 + d v^2 = p, smallest v first."""
    for v in range(isqrt(p // d) + 1):
        rest = p - d * v * v
        u = isqrt(rest)
        if u and u * u == rest:
            return u, v
    return None


def classify(p: int, disc: int) -> SplitClass:
    """How the prime p decomposes in Q(sqrt(disc)), disc in {-23, -31}."""
    if disc not in (-23, -31):
        raise ValueError(f"unsupported discriminant {disc}")
    d = -disc
    if p == d:
        return SplitClass("Ramified", disc)
    if legendre(p, d) == -1:
        return SplitClass("Inert", disc)
    rep = _represent(p, d)
    if rep is not None:
        return SplitClass("PrincipalSplit", disc, *rep)
    return SplitClass("NonPrincipalSplit", disc)


_TYPE2_VALUE = {"Inert": 0, "PrincipalSplit": 2, "NonPrincipalSplit": -1}


def type2_residue(k: int, p: int) -> int:
    """Predicted a_p mod 23 (k = 12) or mod 31 (k = 16) from the splitting of p."""
    if k not in TYPE2:
        raise ValueError(f"weight {k} has no type (ii) exceptional prime")
    cls = classify(p, -TYPE2[k])
    if cls.tag == "Ramified":
        raise ValueError(f"no congruence is asserted for p = {p} itself")
    return _TYPE2_VALUE[cls.tag]


def theta_difference(nmax: int):
    return theta_qf(1, 1, 8, nmax) - theta_qf(2, 1, 4, nmax)


def theta_congruence_check(nmax: int) -> list[int]:
    """Indices n <= nmax where the weight-one theta difference and 2*Delta_16 differ mod 31."""
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    f = theta_difference(nmax)
    d = delta_k(16, nmax)
    return [n for n in range(nmax + 1) if (f[n] - 2 * d[n]) % 31]


def rules_table(weights=FORM_WEIGHTS) -> str:
    """Plain-text audit listing of every built-in congruence."""
    lines = ["k\tell\ttype\tm\tN"]
    for k in weights:
        for r in RULES[k]:
            lines.append(f"{k}\t{r.ell}\ti\t{r.m}\t{r.describe_N()}")
        if k in TYPE2:
            lines.append(f"{k}\t{TYPE2[k]}\tii\t-\t1")
        if k == 12:
            for ell, mod, res in SERRE_K12:
                lines.append(f"12\t{ell}\tserre\t-\tp mod {mod} in {{{', '.join(map(str, res))}}}")
    return "\n".join(lines) + "\n"
