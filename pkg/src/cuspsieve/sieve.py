"""Congruence sieve for the first prime p at which a_p(Delta_k) could vanish.

A prime p with a_p(Delta_k) = 0 must lie in every zero-residue class of the
exceptional congruences, be a non-square modulo the type (ii) prime, and
survive every supplied projective polynomial.  Candidates are enumerated in
ascending order; primes up to the largest exceptional ell are checked
directly against the q-expansion instead.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd, prod
from pathlib import Path
from typing import Iterator, Sequence

from cuspsieve.arith import crt_pair, is_prime, legendre, primality_regime, primes_upto
from cuspsieve.congruence import RULES, SERRE_K12, TYPE2, classify, solve_zero_residues
from cuspsieve.fpfactor import Outcome, ProjPolynomial, eliminate_by_poly
from cuspsieve.qseries import _check_weight, delta_k

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = "v1"
DEFAULT_CHECKPOINT_EVERY = 10**7
# Components are CRT-merged into one progression while the merged residue
# count stays below this.
MERGE_CAP = 1 << 16
# Small primes are read off the q-expansion up to this bound.
DIRECT_CAP = 20_000

# Projective polynomials the published searches used, per weight; any not
# supplied are reported as unavailable checks.
EXPECTED_POLY_ELLS: dict[int, tuple[int, ...]] = {16: (17, 19, 23, 29, 43, 59)}


class CheckpointMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class Component:
    modulus: int
    residues: tuple[int, ...]
    ell: int


@dataclass(frozen=True)
class LegendreFilter:
    q: int
    required: int = -1


@dataclass(frozen=True)
class ResidueSystem:
    components: tuple[Component, ...]
    legendre_filters: tuple[LegendreFilter, ...] = ()

    def __post_init__(self):
        mods = [c.modulus for c in self.components]
        for i, a in enumerate(mods):
            for b in mods[i + 1 :]:
                if gcd(a, b) != 1:
                    raise ValueError(f"component moduli {a} and {b} are not coprime")
        for c in self.components:
            if list(c.residues) != sorted(set(c.residues)):
                raise ValueError(f"residues mod {c.modulus} must be sorted and distinct")
            for r in c.residues:
                if not 0 <= r < c.modulus or gcd(r, c.modulus) != 1:
                    raise ValueError(f"residue {r} is not a unit mod {c.modulus}")

    @property
    def period(self) -> int:
        return prod(c.modulus for c in self.components)

    def canonical(self) -> dict:
        return {
            "components": [[c.ell, c.modulus, list(c.residues)] for c in self.components],
            "legendre_filters": [[f.q, f.required] for f in self.legendre_filters],
        }

    def passes_filters(self, n: int) -> int | None:
        """None if n passes every Legendre filter, else the failing q."""
        for f in self.legendre_filters:
            if legendre(n, f.q) != f.required:
                return f.q
        return None


def _is_nonsquare_set(residues: Sequence[int], ell: int, modulus: int) -> bool:
    want = [r for r in range(1, modulus) if r % ell and legendre(r, ell) == -1]
    return list(residues) == want


def build_system(k: int) -> ResidueSystem:
    """Residue classes a prime p with a_p(Delta_k) = 0 must lie in."""
    _check_weight(k)
    comps: list[Component] = []
    filters: list[LegendreFilter] = []
    if k == 12:
        comps = [Component(mod, tuple(sorted(res)), ell) for ell, mod, res in SERRE_K12]
    else:
        for rule in RULES[k]:
            modulus = rule.ell**rule.N_max
            zeros = solve_zero_residues(rule)
            if rule.ell > 2 and _is_nonsquare_set(zeros, rule.ell, modulus):
                filters.append(LegendreFilter(rule.ell, -1))
            else:
                comps.append(Component(modulus, zeros, rule.ell))
    if k in TYPE2:
        filters.append(LegendreFilter(TYPE2[k], -1))
    return ResidueSystem(tuple(comps), tuple(filters))


def system_digest(system: ResidueSystem, polys: Sequence[ProjPolynomial] = ()) -> str:
    payload = {"system": system.canonical(), "polys": sorted(p.digest() for p in polys)}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _merge_plan(system: ResidueSystem):
    """(M, sorted residues mod M, remaining components) for enumeration."""
    comps = sorted(system.components, key=lambda c: (len(c.residues), -c.modulus))
    M, residues = 1, [0]
    rest = []
    for c in comps:
        if len(residues) * len(c.residues) <= MERGE_CAP:
            residues = sorted(crt_pair(r, M, s, c.modulus)[0] for r in residues for s in c.residues)
            M *= c.modulus
        else:
            rest.append(c)
    return M, residues, [(c.modulus, frozenset(c.residues)) for c in rest]


def enumerate_candidates(system: ResidueSystem, lo: int, hi: int) -> Iterator[int]:
    """Ascending integers n in [lo, hi) satisfying every component congruence.

    Legendre filters are not applied here.
    """
    if lo > hi:
        raise ValueError("lo must be <= hi")
    if any(not c.residues for c in system.components):
        log.warning("a component has no admissible residues; the candidate set is empty")
        return
    M, residues, rest = _merge_plan(system)
    base = lo - lo % M
    while base < hi:
        for r in residues:
            n = base + r
            if n < lo:
                continue
            if n >= hi:
                return
            if all(n % m in ok for m, ok in rest):
                yield n
        base += M


def classifier_discs(k: int) -> tuple[int, ...]:
    return (-TYPE2[k],) if k in TYPE2 else ()


@dataclass(frozen=True)
class Elimination:
    status: str  # "Eliminated", "Survivor" or "Indeterminate"
    by: int | None = None
    indeterminate: tuple[int, ...] = ()


def eliminate(p: int, k: int, polys: Sequence[ProjPolynomial] = (), classifiers: Sequence[int] = ()) -> Elimination:
    """Try to rule out a_p(Delta_k) = 0 for a prime p that passed the congruences."""
    for disc in classifiers:
        tag = classify(p, disc).tag
        if tag in ("PrincipalSplit", "NonPrincipalSplit"):
            return Elimination("Eliminated", by=-disc)
    unresolved = []
    for P in polys:
        if p == P.ell:
            unresolved.append(P.ell)
            continue
        outcome = eliminate_by_poly(P, p)
        if outcome is Outcome.RULED_OUT:
            return Elimination("Eliminated", by=P.ell)
        if outcome is Outcome.INDETERMINATE:
            unresolved.append(P.ell)
    if unresolved:
        return Elimination("Indeterminate", indeterminate=tuple(unresolved))
    return Elimination("Survivor")


@dataclass
class SieveCheckpoint:
    k: int
    system_digest: str
    scanned_upto: int
    eliminations: dict[str, int] = field(default_factory=dict)
    survivors: list[tuple[int, str, list[int]]] = field(default_factory=list)
    version: str = CHECKPOINT_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "k": self.k,
                "system_digest": self.system_digest,
                "scanned_upto": self.scanned_upto,
                "eliminations": dict(sorted(self.eliminations.items())),
                "survivors": [[p, s, list(ind)] for p, s, ind in self.survivors],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> SieveCheckpoint:
        d = json.loads(text)
        if d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {d.get('version')!r}")
        return cls(
            k=int(d["k"]),
            system_digest=d["system_digest"],
            scanned_upto=int(d["scanned_upto"]),
            eliminations={str(a): int(b) for a, b in d["eliminations"].items()},
            survivors=[(int(p), str(s), [int(x) for x in ind]) for p, s, ind in d["survivors"]],
        )

    def save(self, path) -> None:
        """Atomic replace; refuses to move scanned_upto backwards for the same search."""
        path = Path(path)
        if path.exists():
            old = SieveCheckpoint.from_json(path.read_text())
            if old.system_digest == self.system_digest and old.k == self.k and old.scanned_upto > self.scanned_upto:
                raise ValueError(f"checkpoint would regress from {old.scanned_upto} to {self.scanned_upto}")
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.to_json())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> SieveCheckpoint:
        return cls.from_json(Path(path).read_text())


@dataclass
class BoundReport:
    k: int
    first_survivor: int | None
    scanned_upto: int
    eliminations: dict[str, int]
    survivor_status: str | None = None
    indeterminate: list[int] = field(default_factory=list)
    unavailable_checks: list[int] = field(default_factory=list)
    primality: str = "deterministic"
    survivors: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "first_survivor": self.first_survivor,
            "survivor_status": self.survivor_status,
            "scanned_upto": self.scanned_upto,
            "eliminations": dict(sorted(self.eliminations.items())),
            "indeterminate": list(self.indeterminate),
            "unavailable_checks": list(self.unavailable_checks),
            "primality": self.primality,
            "survivors": list(self.survivors),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        lines = [f"k = {self.k}"]
        if self.first_survivor is None:
            lines.append(f"no surviving candidate below {self.scanned_upto}")
            lines.append(f"a_n(Delta_{self.k}) != 0 for all n < {self.scanned_upto}")
        else:
            lines.append(f"first candidate not eliminated: {self.first_survivor} ({self.survivor_status})")
            lines.append(f"a_n(Delta_{self.k}) != 0 for all n < {self.first_survivor}")
        if self.unavailable_checks:
            lines.append("polynomial checks unavailable for ell = " + ", ".join(map(str, self.unavailable_checks)))
        for key, count in sorted(self.eliminations.items()):
            lines.append(f"  eliminated by {key}: {count}")
        return "\n".join(lines)


def small_prime_limit(k: int, polys: Sequence[ProjPolynomial] = ()) -> int:
    """Primes up to this are checked directly against the q-expansion."""
    ells = [r.ell for r in RULES[k]] + [P.ell for P in polys]
    if k == 12:
        ells += [ell for ell, _, _ in SERRE_K12]
    if k in TYPE2:
        ells.append(TYPE2[k])
    return max(ells)


@dataclass
class _Partial:
    eliminations: Counter
    survivors: list[tuple[int, str, tuple[int, ...]]]
    scanned_upto: int


def _scan(k, system, polys, lo, hi, stop_at_first, progress=None, every=None) -> _Partial:
    classifiers = classifier_discs(k)
    counts: Counter = Counter()
    survivors = []
    examined = 0
    scanned = lo
    for n in enumerate_candidates(system, lo, hi):
        examined += 1
        q = system.passes_filters(n)
        if q is not None:
            counts[str(q)] += 1
        elif not is_prime(n):
            counts["composite"] += 1
        else:
            res = eliminate(n, k, polys, classifiers)
            if res.status == "Eliminated":
                counts[str(res.by)] += 1
            else:
                survivors.append((n, res.status, res.indeterminate))
                if stop_at_first:
                    return _Partial(counts, survivors, n)
        scanned = n + 1
        if progress is not None and every and examined % every == 0:
            progress(_Partial(counts, list(survivors), scanned))
    return _Partial(counts, survivors, hi)


def _scan_worker(args):
    k, system, polys, lo, hi, stop_at_first = args
    return _scan(k, system, polys, lo, hi, stop_at_first)


def _low_range(k: int, system: ResidueSystem, polys, upto: int, limit: int, direct_cap: int, stop_at_first=True) -> _Partial:
    """Primes p <= upto (and < limit), where a congruence mod ell may have p = ell.

    Up to ``direct_cap`` a_p is read off the q-expansion.  Above it every
    component and filter whose ell differs from p is applied as usual, and
    the expansion is consulted only for a prime that survives them all.
    """
    counts: Counter = Counter()
    survivors = []
    hi = min(upto, limit - 1)
    if hi < 2:
        return _Partial(counts, [], limit)
    f = delta_k(k, min(hi, direct_cap)) if direct_cap >= 1 else None
    classifiers = classifier_discs(k)
    for p in primes_upto(hi):
        if p <= direct_cap:
            if f[p] != 0:
                counts["direct"] += 1
                continue
            survivors.append((p, "Vanishing", ()))
        else:
            failed = next((c.ell for c in system.components if c.ell != p and p % c.modulus not in c.residues), None)
            if failed is None:
                failed = next(
                    (flt.q for flt in system.legendre_filters if flt.q != p and legendre(p, flt.q) != flt.required), None
                )
            if failed is not None:
                counts[str(failed)] += 1
                continue
            res = eliminate(p, k, polys, [d for d in classifiers if -d != p])
            if res.status == "Eliminated":
                counts[str(res.by)] += 1
                continue
            if any(c.ell == p for c in system.components) or any(flt.q == p for flt in system.legendre_filters):
                if delta_k(k, p)[p] != 0:
                    counts["direct"] += 1
                    continue
                survivors.append((p, "Vanishing", ()))
            else:
                survivors.append((p, res.status, res.indeterminate))
        if stop_at_first:
            return _Partial(counts, survivors, p)
    return _Partial(counts, survivors, hi + 1)


def _split(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    step = max(1, -(-(hi - lo) // parts))
    return [(a, min(a + step, hi)) for a in range(lo, hi, step)]


def search(
    k: int,
    limit: int,
    polys: Sequence[ProjPolynomial] = (),
    checkpoint: SieveCheckpoint | None = None,
    checkpoint_path=None,
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY,
    workers: int = 1,
    partitions: int | None = None,
    direct_cap: int = DIRECT_CAP,
    system: ResidueSystem | None = None,
    stop_at_first: bool = True,
) -> BoundReport:
    """Scan n < limit for the first candidate prime not ruled out.

    With ``checkpoint`` the scan resumes from its ``scanned_upto``; a digest
    mismatch (different residue system or polynomial set) is an error.
    ``partitions`` splits the candidate range into independent sub-ranges
    (run on ``workers`` processes); the merged report is identical to a
    single pass.  ``system`` replaces build_system(k).  With
    ``stop_at_first=False`` the scan runs to ``limit`` and lists every
    candidate it could not eliminate.
    """
    _check_weight(k)
    if limit < 2:
        raise ValueError("limit must be >= 2")
    polys = list(polys)
    if system is None:
        system = build_system(k)
    digest = system_digest(system, polys)
    direct_upto = small_prime_limit(k, polys)

    counts: Counter = Counter()
    survivors: list[tuple[int, str, tuple[int, ...]]] = []
    start = 2
    if checkpoint is not None:
        if checkpoint.system_digest != digest or checkpoint.k != k:
            raise CheckpointMismatch("checkpoint was written for a different residue system or polynomial set")
        counts.update(checkpoint.eliminations)
        survivors = [(p, s, tuple(ind)) for p, s, ind in checkpoint.survivors]
        start = checkpoint.scanned_upto

    def save(scanned: int) -> None:
        if checkpoint_path is not None:
            rows = [(p, s, list(ind)) for p, s, ind in survivors]
            SieveCheckpoint(k, digest, scanned, dict(counts), rows).save(checkpoint_path)

    def done() -> bool:
        return stop_at_first and bool(survivors)

    if not done() and start <= direct_upto:
        part = _low_range(k, system, polys, direct_upto, limit, direct_cap, stop_at_first)
        counts.update(part.eliminations)
        survivors.extend(part.survivors)
        start = part.scanned_upto
        save(start)

    scanned = start
    if not done() and start < limit:
        lo = max(start, direct_upto + 1)
        if partitions and partitions > 1:
            jobs = [(k, system, polys, a, b, stop_at_first) for a, b in _split(lo, limit, partitions)]
            if workers > 1:
                with ProcessPoolExecutor(max_workers=workers) as ex:
                    parts = list(ex.map(_scan_worker, jobs))
            else:
                parts = [_scan_worker(j) for j in jobs]
            # merge in ascending order; when stopping at the first survivor,
            # later ranges are discarded once one is found
            scanned = limit
            for part in parts:
                counts.update(part.eliminations)
                survivors.extend(part.survivors)
                if done():
                    scanned = part.scanned_upto
                    break
        else:
            base = Counter(counts)
            earlier = list(survivors)

            def progress(part: _Partial) -> None:
                counts.clear()
                counts.update(base + part.eliminations)
                survivors[:] = earlier + part.survivors
                save(part.scanned_upto)

            part = _scan(k, system, polys, lo, limit, stop_at_first, progress, checkpoint_every)
            counts.clear()
            counts.update(base + part.eliminations)
            survivors[:] = earlier + part.survivors
            scanned = part.scanned_upto
        save(scanned)
    elif done():
        scanned = survivors[0][0]

    first = survivors[0] if survivors else None
    available = {P.ell for P in polys}
    return BoundReport(
        k=k,
        first_survivor=first[0] if first else None,
        survivor_status=first[1] if first else None,
        scanned_upto=first[0] if done() else scanned,
        eliminations=dict(counts),
        indeterminate=list(first[2]) if first else [],
        unavailable_checks=[ell for ell in EXPECTED_POLY_ELLS.get(k, ()) if ell not in available],
        primality=primality_regime(first[0] if first else limit),
        survivors=[p for p, _, _ in survivors],
    )


@dataclass(frozen=True)
class ComponentCheck:
    name: str
    modulus: int
    residue: int
    passed: bool


@dataclass
class CertifyReport:
    k: int
    B: int
    checks: list[ComponentCheck]
    prime: bool
    primality: str

    @property
    def passed(self) -> bool:
        return self.prime and all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        out = [c.name for c in self.checks if not c.passed]
        if not self.prime:
            out.append("primality")
        return out

    def lines(self) -> list[str]:
        rows = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<28} B mod {c.modulus} = {c.residue}" for c in self.checks]
        rows.append(f"{'PASS' if self.prime else 'FAIL'}  {'prime':<28} ({self.primality})")
        return rows

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "B": self.B,
            "passed": self.passed,
            "prime": self.prime,
            "primality": self.primality,
            "checks": [
                {"name": c.name, "modulus": c.modulus, "residue": c.residue, "passed": c.passed} for c in self.checks
            ],
        }


def certify_bound_membership(k: int, B: int) -> CertifyReport:
    """Check B against every component and filter of build_system(k), and primality."""
    system = build_system(k)
    checks = [
        ComponentCheck(f"ell={c.ell} residues", c.modulus, B % c.modulus, B % c.modulus in c.residues)
        for c in system.components
    ]
    for f in system.legendre_filters:
        checks.append(ComponentCheck(f"({f.q}) non-square", f.q, B % f.q, legendre(B, f.q) == f.required))
    return CertifyReport(k, B, checks, is_prime(B), primality_regime(B))
