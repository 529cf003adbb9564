import itertools
import random

from hypothesis import given, settings, strategies as st

from couplematch.dpda import run_dpda
from couplematch.generate import random_instance
from couplematch.model import Matching, feasible_matchings, make_instance
from couplematch.prefs import EMPTY, LAMBDA, DoctorPref, HospitalPref
from couplematch.stability import (
    COUPLE_PAIR,
    HOSPITAL_EMPTY,
    SINGLE_PAIR,
    enumerate_stable,
    find_blocks,
    hospital_prefers_set,
    individual_rationality_violations,
    is_individually_rational,
    is_stable,
)


def oracle_welcomes(h, incoming, mu, inst):
    """Literal reading: some D'' in mu(h), disjoint from incoming, makes a better feasible set."""
    if h == LAMBDA:
        return True
    pref = inst.hospital_pref(h)
    order = list(pref.set_order)
    current = mu.members(h)

    def pos(s):
        s = frozenset(s)
        # sets outside the order (unacceptable members) rank below every listed set
        return order.index(s) if s in order else len(order)

    rest = sorted(current - frozenset(incoming))
    for k in range(len(rest) + 1):
        for released in itertools.combinations(rest, k):
            result = (current - set(released)) | set(incoming)
            if len(result) <= inst.capacity(h) and pos(result) < pos(current):
                return True
    return False


def oracle_stable(mu, inst):
    alts = inst.hospital_ids + (LAMBDA,)
    for h in inst.hospital_ids:
        pref = inst.hospital_pref(h)
        if not mu.members(h) <= pref.acceptable:
            return False
        order = list(pref.set_order)
        if order.index(EMPTY) < order.index(mu.members(h)):
            return False
    for s in inst.singles:
        p = inst.profile.doctor_prefs[s]
        for h in alts:
            if p.prefers(h, mu[s]) and oracle_welcomes(h, {s}, mu, inst):
                return False
    for c in inst.couples:
        cp = inst.profile.couple_prefs[c.id]
        here = (mu[c.f], mu[c.m])
        for pair in itertools.product(alts, repeat=2):
            if not cp.prefers(pair, here):
                continue
            hf, hm = pair
            if hf == hm:
                ok = oracle_welcomes(hf, {c.f, c.m}, mu, inst)
            else:
                ok = (hf == here[0] or oracle_welcomes(hf, {c.f}, mu, inst)) and (
                    hm == here[1] or oracle_welcomes(hm, {c.m}, mu, inst))
            if ok:
                return False
    return True


def test_couple_can_displace_two_singles(example2):
    mu = Matching({"d1": "h1", "d2": "h1", "f": LAMBDA, "m": LAMBDA})
    got = hospital_prefers_set("h1", {"f", "m"}, mu, example2)
    assert got is not None and got.released == {"d1", "d2"} and got.result == {"f", "m"}


def test_top_set_refuses_lower_doctor(example1):
    mu, _ = run_dpda(example1)
    # h1 holds d1, d2; m is below both
    assert hospital_prefers_set("h1", {"m"}, mu, example1) is None


def test_vacancy_takes_acceptable_doctor(example2):
    mu = Matching({"d1": "h1", "d2": LAMBDA, "f": LAMBDA, "m": LAMBDA})
    got = hospital_prefers_set("h1", {"d2"}, mu, example2)
    assert got is not None and got.released == EMPTY


def test_dummy_always_welcomes(example2):
    mu = Matching({"d1": "h1", "d2": "h1", "f": LAMBDA, "m": LAMBDA})
    assert hospital_prefers_set(LAMBDA, {"d1"}, mu, example2).released == EMPTY


def test_unacceptable_incoming_refused():
    inst = tiny_instance()
    mu = Matching({"a": LAMBDA, "b": LAMBDA})
    assert hospital_prefers_set("h", {"b"}, mu, inst) is None


def tiny_instance():
    prefs = {"a": DoctorPref(("h", LAMBDA)), "b": DoctorPref(("h", LAMBDA))}
    return make_instance([("h", 1)], ["a", "b"], [], prefs, {}, {"h": HospitalPref.canonical(("a",), 1)},
                         strict=False)


def test_example2_dpda_block(example2):
    mu, _ = run_dpda(example2)
    blocks = find_blocks(mu, example2)
    assert [(b.kind, b.hospitals, b.agent, b.subcase) for b in blocks] == [
        (COUPLE_PAIR, ("h1", "h1"), "c", "iii")]
    assert dict(blocks[0].evidence)["h1"] == {"d1", "d2"}
    assert blocks[0].describe() == "((h1, h1), c) [iii] h1 releases {d1, d2}"
    assert is_individually_rational(mu, example2)


def test_example1_dpda_blocked_by_couple_at_h1(example1):
    mu, _ = run_dpda(example1)
    blocks = find_blocks(mu, example1)
    assert any(b.kind == COUPLE_PAIR and b.hospitals == ("h1", "h1") for b in blocks)
    assert not is_stable(mu, example1)


def test_closing_matching_stable(closing):
    inst, mu = closing
    assert find_blocks(mu, inst) == []


def test_no_acceptabilities_everyone_unemployed():
    prefs = {d: DoctorPref(("h", LAMBDA)) for d in ("a", "b")}
    inst = make_instance([("h", 2)], ["a", "b"], [], prefs, {}, {"h": HospitalPref.canonical((), 2)}, strict=False)
    mu = Matching({"a": LAMBDA, "b": LAMBDA})
    assert find_blocks(mu, inst) == []
    assert enumerate_stable(inst) == [mu]


def test_hospital_empty_and_ir_violations():
    inst = tiny_instance()
    mu = Matching({"a": LAMBDA, "b": "h"})
    kinds = {b.kind for b in find_blocks(mu, inst)}
    assert HOSPITAL_EMPTY in kinds and SINGLE_PAIR in kinds
    assert [v.clause for v in individual_rationality_violations(mu, inst)] == ["iii"]


def test_single_preferring_unemployment_blocks_with_dummy():
    prefs = {"a": DoctorPref((LAMBDA, "h"))}
    inst = make_instance([("h", 1)], ["a"], [], prefs, {}, {"h": HospitalPref.canonical(("a",), 1)}, strict=False)
    mu = Matching({"a": "h"})
    blocks = find_blocks(mu, inst)
    assert [(b.kind, b.hospitals) for b in blocks] == [(SINGLE_PAIR, (LAMBDA,))]
    assert [v.clause for v in individual_rationality_violations(mu, inst)] == ["i"]


def random_small(seed):
    rng = random.Random(seed)
    n_c = rng.randint(0, 2)
    return random_instance(rng, rng.randint(1, 3), rng.randint(0, 5 - 2 * n_c) if n_c < 2 else rng.randint(0, 1),
                           n_c, (1, 3), accept_prob=rng.choice((0.6, 0.85, 1.0)), employed=rng.random() < 0.3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_is_stable_matches_definition_oracle(seed):
    inst = random_small(seed)
    for mu in feasible_matchings(inst):
        assert is_stable(mu, inst) == oracle_stable(mu, inst)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_pruned_search_equals_naive(seed):
    inst = random_small(seed)
    pruned = enumerate_stable(inst)
    assert pruned == enumerate_stable(inst, prune=False)
    for mu in pruned:
        assert is_individually_rational(mu, inst)
    mu, _ = run_dpda(inst)
    assert is_stable(mu, inst) == (mu in pruned)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_blocks_are_well_formed(seed):
    inst = random_small(seed)
    mu, _ = run_dpda(inst)
    for b in find_blocks(mu, inst):
        for h, released in b.evidence:
            assert released <= mu.members(h)
        if b.kind == COUPLE_PAIR:
            assert b.subcase in ("i", "ii", "i+ii", "iii")
            assert (b.subcase == "iii") == (b.hospitals[0] == b.hospitals[1])
    assert find_blocks(mu, inst) == find_blocks(mu, inst)


def test_mutual_tops_matched_in_every_stable_matching():
    seen = 0
    for seed in range(200):
        rng = random.Random(seed)
        inst = random_instance(rng, 2, 3, 1, 1, accept_prob=1.0)
        for s in inst.singles:
            h = inst.profile.doctor_prefs[s].top
            if h == LAMBDA or inst.hospital_pref(h).individual_order[0] != s:
                continue
            for mu in enumerate_stable(inst):
                seen += 1
                assert mu[s] == h
    assert seen > 0
