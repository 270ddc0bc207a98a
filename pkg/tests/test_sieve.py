import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspsieve import sieve
from cuspsieve.arith import is_prime, primes_upto
from cuspsieve.fpfactor import QUARTIC_59
from cuspsieve.sieve import (
    CheckpointMismatch,
    Component,
    LegendreFilter,
    ResidueSystem,
    SieveCheckpoint,
    build_system,
    certify_bound_membership,
    eliminate,
    enumerate_candidates,
    search,
)

PUBLISHED = {
    16: 12604744061516618549,
    18: 143412400182350051864999,
    20: 74201833676082662549,
    22: 28265095927027650599999,
}
B26 = 818406791865712833299

# Dense toy system: many candidates per unit interval, so long runs exercise
# checkpointing and partition merging.
DENSE = ResidueSystem(
    (Component(8, (3, 7), 2), Component(9, (2, 5, 8), 3)),
    (LegendreFilter(31, -1),),
)


def brute(system, lo, hi):
    return [n for n in range(lo, hi) if all(n % c.modulus in c.residues for c in system.components)]


# -- primality ---------------------------------------------------------------


@pytest.mark.parametrize(
    "n, expected",
    [
        (0, False),
        (1, False),
        (2, True),
        (561, False),  # Carmichael
        (2047, False),  # strong pseudoprime to base 2
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        (2147483647, True),
        (2**61 - 1, True),
        (2**89 - 1, True),
        ((2**61 - 1) * (2**31 - 1), False),
    ],
)
def test_is_prime_examples(n, expected):
    assert is_prime(n) is expected


def test_is_prime_agrees_with_sieve():
    small = set(primes_upto(20000))
    assert all(is_prime(n) == (n in small) for n in range(20000))


# -- enumeration -------------------------------------------------------------


def test_enumerate_single_progression():
    system = ResidueSystem((Component(6, (5,), 0),))
    assert list(enumerate_candidates(system, 0, 30)) == [5, 11, 17, 23, 29]


def test_enumerate_two_components():
    system = ResidueSystem((Component(4, (3,), 2), Component(3, (2,), 3)))
    assert list(enumerate_candidates(system, 0, 30)) == [11, 23]


def test_enumerate_respects_bounds():
    system = ResidueSystem((Component(6, (5,), 0),))
    assert list(enumerate_candidates(system, 11, 23)) == [11, 17]
    assert list(enumerate_candidates(system, 12, 12)) == []


def test_empty_component_warns(caplog):
    system = ResidueSystem((Component(7, (), 7),))
    with caplog.at_level("WARNING"):
        assert list(enumerate_candidates(system, 0, 100)) == []
    assert "no admissible residues" in caplog.text


def test_non_coprime_moduli_rejected():
    with pytest.raises(ValueError, match="not coprime"):
        ResidueSystem((Component(4, (1,), 2), Component(6, (1,), 3)))


def test_k16_full_period_count():
    system = build_system(16)
    assert system.period == 3**6 * 5**2 * 7**3 * 11 * 3617
    assert sum(1 for _ in enumerate_candidates(system, 0, system.period)) == 9


def test_merge_beyond_cap_still_exact(monkeypatch):
    monkeypatch.setattr(sieve, "MERGE_CAP", 4)
    system = ResidueSystem(
        (Component(7, (1, 2, 3), 7), Component(11, (1, 4, 5, 9), 11), Component(13, (2, 6), 13))
    )
    assert list(enumerate_candidates(system, 0, 3000)) == brute(system, 0, 3000)


@st.composite
def small_systems(draw):
    pool = [3, 4, 5, 7, 9, 11, 13, 16, 17, 25]
    moduli = []
    for m in draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3, unique=True)):
        if all(math.gcd(m, x) == 1 for x in moduli):
            moduli.append(m)
    comps = []
    for m in moduli:
        units = [r for r in range(m) if math.gcd(r, m) == 1]
        res = draw(st.lists(st.sampled_from(units), min_size=1, max_size=len(units), unique=True))
        comps.append(Component(m, tuple(sorted(res)), m))
    return ResidueSystem(tuple(comps))


@settings(max_examples=50, deadline=None)
@given(small_systems(), st.integers(0, 500), st.integers(0, 3000))
def test_enumeration_matches_bruteforce(system, lo, width):
    got = list(enumerate_candidates(system, lo, lo + width))
    assert got == brute(system, lo, lo + width)


@settings(max_examples=30, deadline=None)
@given(small_systems())
def test_count_per_period_is_product(system):
    expected = 1
    for c in system.components:
        expected *= len(c.residues)
    assert sum(1 for _ in enumerate_candidates(system, 0, system.period)) == expected


# -- residue systems ---------------------------------------------------------


def test_build_system_k16():
    system = build_system(16)
    got = {c.ell: (c.modulus, c.residues) for c in system.components}
    assert got[3] == (729, (80, 161, 242, 323, 404, 485, 566, 647, 728))
    assert got[5] == (25, (24,))
    assert got[7] == (343, (342,))
    assert got[11] == (11, (10,))
    assert got[3617] == (3617, (3616,))
    assert system.legendre_filters == (LegendreFilter(31, -1),)


def test_build_system_k20_and_k22():
    s20 = {c.ell: c for c in build_system(20).components}
    s22 = {c.ell: c for c in build_system(22).components}
    assert set(s20) == {3, 5, 7, 11, 13, 283, 617}
    assert set(s22) == {3, 5, 7, 13, 17, 131, 593}
    assert s20[7].residues == (19, 31, 48)
    assert s20[283].residues == (282,)
    assert s22[3].residues == (728, 1457, 2186)
    assert s22[593].residues == (592,)
    assert build_system(20).legendre_filters == ()


def test_build_system_k26_uses_legendre_filter_for_seven():
    system = build_system(26)
    assert LegendreFilter(7, -1) in system.legendre_filters
    assert 7 not in {c.ell for c in system.components}


# -- elimination -------------------------------------------------------------


def test_eliminate_principal_split():
    # 47 = 4^2 + 31 * 1^2
    assert eliminate(47, 16, (), (-31,)) == sieve.Elimination("Eliminated", by=31)


def test_eliminate_without_checks_survives():
    assert eliminate(101, 16).status == "Survivor"


def test_eliminate_by_quartic():
    assert eliminate(2, 16, [QUARTIC_59]) == sieve.Elimination("Eliminated", by=59)
    assert eliminate(13, 16, [QUARTIC_59]).status == "Survivor"


def test_eliminate_p_equal_ell_is_indeterminate():
    res = eliminate(59, 16, [QUARTIC_59])
    assert res.status == "Indeterminate" and res.indeterminate == (59,)


# -- certification -----------------------------------------------------------


@pytest.mark.parametrize("k", sorted(PUBLISHED))
def test_published_bounds_certify(k):
    rep = certify_bound_membership(k, PUBLISHED[k])
    assert rep.passed, rep.failures()


def test_b16_residues():
    B = PUBLISHED[16]
    assert B % 25 == 24 and B % 11 == 10
    assert pow(B % 31, 15, 31) == 30


def test_b18_mod_125():
    assert PUBLISHED[18] % 125 == 124


def test_b26_fails_only_the_large_component():
    rep = certify_bound_membership(26, B26)
    assert rep.failures() == ["ell=657931 residues"]
    assert B26 % 657931 == 157780


def test_neighbour_of_bound_fails():
    rep = certify_bound_membership(16, PUBLISHED[16] + 2)
    assert not rep.passed
    assert "ell=11 residues" in rep.failures()


# -- search ------------------------------------------------------------------


def test_k16_no_survivor_below_1e9():
    rep = search(16, 10**9, [QUARTIC_59])
    assert rep.first_survivor is None
    assert rep.scanned_upto == 10**9
    assert rep.unavailable_checks == [17, 19, 23, 29, 43]


def test_k16_first_survivor_below_1e13():
    rep = search(16, 10**13)
    assert rep.first_survivor == 442160888399
    assert rep.survivor_status == "Survivor"
    assert rep.eliminations == {"31": 10, "composite": 5, "direct": 506}


def test_k16_quartic_does_not_rule_out_first_survivor():
    assert search(16, 10**13, [QUARTIC_59]).first_survivor == 442160888399


@pytest.mark.parametrize("k", [12, 20, 22, 26])
def test_other_weights_clean_below_1e12(k):
    rep = search(k, 10**12)
    assert rep.first_survivor is None


def test_small_limit_stays_in_direct_range():
    rep = search(16, 100)
    assert rep.first_survivor is None
    assert rep.eliminations == {"direct": 25}


def test_dense_partition_invariance():
    one = search(16, 120000, [QUARTIC_59], system=DENSE, stop_at_first=False)
    many = search(16, 120000, [QUARTIC_59], system=DENSE, stop_at_first=False, partitions=7)
    assert one.to_dict() == many.to_dict()
    assert len(one.survivors) > 100
    assert one.survivors == sorted(one.survivors)


def test_dense_first_survivor_partition_invariance():
    one = search(16, 120000, [QUARTIC_59], system=DENSE)
    many = search(16, 120000, [QUARTIC_59], system=DENSE, partitions=5)
    assert one.to_dict() == many.to_dict()
    assert one.first_survivor == 3623


def test_process_workers_match_serial():
    one = search(16, 60000, [QUARTIC_59], system=DENSE, stop_at_first=False)
    pool = search(16, 60000, [QUARTIC_59], system=DENSE, stop_at_first=False, partitions=3, workers=3)
    assert one.to_dict() == pool.to_dict()


class Interrupt(Exception):
    pass


def test_resume_after_interrupt(tmp_path, monkeypatch):
    path = tmp_path / "run.json"
    args = (16, 120000, [QUARTIC_59])
    kw = dict(system=DENSE, stop_at_first=False, checkpoint_every=250)
    clean = search(*args, **kw)

    real = sieve.eliminate
    calls = {"n": 0}

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] > 500:
            raise Interrupt
        return real(*a, **k)

    monkeypatch.setattr(sieve, "eliminate", flaky)
    with pytest.raises(Interrupt):
        search(*args, checkpoint_path=path, **kw)
    monkeypatch.setattr(sieve, "eliminate", real)

    ckpt = SieveCheckpoint.load(path)
    assert 3617 < ckpt.scanned_upto < 120000
    resumed = search(*args, checkpoint=ckpt, checkpoint_path=path, **kw)
    assert resumed.to_dict() == clean.to_dict()
    assert SieveCheckpoint.load(path).scanned_upto == 120000


def test_resume_of_finished_run_is_identical(tmp_path):
    path = tmp_path / "run.json"
    first = search(16, 10**9, [QUARTIC_59], checkpoint_path=path)
    again = search(16, 10**9, [QUARTIC_59], checkpoint=SieveCheckpoint.load(path))
    assert first.to_dict() == again.to_dict()


def test_checkpoint_digest_mismatch(tmp_path):
    path = tmp_path / "run.json"
    search(16, 10**6, [QUARTIC_59], checkpoint_path=path)
    with pytest.raises(CheckpointMismatch):
        search(16, 10**7, [], checkpoint=SieveCheckpoint.load(path))


def test_checkpoint_json_round_trip(tmp_path):
    ck = SieveCheckpoint(16, "ab" * 32, 12345, {"31": 4, "composite": 2}, [(3623, "Survivor", [])])
    assert SieveCheckpoint.from_json(ck.to_json()) == ck
    ck.save(tmp_path / "c.json")
    assert SieveCheckpoint.load(tmp_path / "c.json") == ck
    assert not (tmp_path / "c.json.tmp").exists()


def test_checkpoint_refuses_regression(tmp_path):
    path = tmp_path / "c.json"
    SieveCheckpoint(16, "d", 500).save(path)
    with pytest.raises(ValueError, match="regress"):
        SieveCheckpoint(16, "d", 400).save(path)


def test_checkpoint_version_checked():
    blob = json.loads(SieveCheckpoint(16, "d", 5).to_json())
    blob["version"] = "v0"
    with pytest.raises(ValueError, match="version"):
        SieveCheckpoint.from_json(json.dumps(blob))


def test_report_json_is_valid():
    rep = search(22, 10**8)
    d = json.loads(rep.to_json())
    assert d["first_survivor"] is None and d["primality"] == "deterministic"


def test_random_dense_windows_agree_with_direct_filtering():
    rng = random.Random(7)
    for _ in range(3):
        hi = rng.randrange(20000, 60000)
        rep = search(16, hi, [], system=DENSE, stop_at_first=False)
        expected = [
            n
            for n in brute(DENSE, 3618, hi)
            if DENSE.passes_filters(n) is None and is_prime(n) and eliminate(n, 16, [], (-31,)).status != "Eliminated"
        ]
        assert [p for p in rep.survivors if p > 3617] == expected
