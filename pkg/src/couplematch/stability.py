"""Blocking coalitions, stability and individual rationality.

Three kinds of block exist: a single doctor with a hospital, a couple with
an ordered pair of hospitals, and a hospital that would rather be empty.
A hospital may take newcomers by releasing some of its current doctors;
singles can displace couple members only through the single-doctor
channel, never by the hospital weighing what the couple would do.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .model import DEFAULT_MATCHING_CAP, Instance, Matching, feasible_matchings
from .errors import SearchSpaceExceeded
from .prefs import EMPTY, LAMBDA

SINGLE_PAIR = "single-pair"
COUPLE_PAIR = "couple-pair"
HOSPITAL_EMPTY = "hospital-empty"
_KIND_ORDER = {SINGLE_PAIR: 0, COUPLE_PAIR: 1, HOSPITAL_EMPTY: 2}


@dataclass(frozen=True)
class SetImprovement:
    """Hospital ``hospital`` releases ``released`` and ends up with ``result``."""

    hospital: str
    released: frozenset
    result: frozenset


def hospital_prefers_set(h: str, incoming, matching: Matching, instance: Instance) -> SetImprovement | None:
    """Best way for ``h`` to take ``incoming`` by releasing some current doctors.

    Returns ``None`` when no release D'' (disjoint from ``incoming``) makes
    the resulting set, within capacity, strictly better than ``h``'s
    current set.  Incoming doctors already at ``h`` are simply kept.  The
    dummy hospital always says yes and never releases anyone.
    """
    incoming = frozenset(incoming)
    current = matching.members(h)
    if h == LAMBDA:
        return SetImprovement(h, EMPTY, current | incoming)
    pref = instance.hospital_pref(h)
    if not incoming <= pref.acceptable | current:
        return None
    cap = instance.capacity(h)
    now = pref.set_value(current)
    releasable = sorted(current - incoming, key=lambda d: (-pref.doctor_rank(d), d))
    best = None
    best_key = None
    for k in range(len(releasable) + 1):
        for released in itertools.combinations(releasable, k):
            result = (current - frozenset(released)) | incoming
            if len(result) > cap:
                continue
            value = pref.set_value(result)
            if value < now:
                key = (value, k, released)
                if best_key is None or key < best_key:
                    best, best_key = SetImprovement(h, frozenset(released), result), key
    return best


@dataclass(frozen=True)
class Block:
    """A witnessed violation of stability.

    ``hospitals`` is ``(h,)`` for single-pair and hospital-empty blocks and
    ``(h_f, h_m)`` for couple blocks.  ``agent`` is the single doctor or the
    couple id (``None`` for hospital-empty).  ``subcase`` names the
    couple-block clauses engaged: ``i`` when f moves to a different
    hospital than m, ``ii`` when m does, ``i+ii`` when both move, ``iii``
    when both go to the same hospital.  ``evidence`` maps each hospital
    that admits newcomers to the set it releases.
    """

    kind: str
    hospitals: tuple[str, ...]
    agent: str | None
    subcase: str | None = None
    evidence: tuple[tuple[str, frozenset], ...] = field(default=())

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.agent or "", self.hospitals, self.subcase or "")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "hospitals": list(self.hospitals)}
        if self.agent is not None:
            out["couple" if self.kind == COUPLE_PAIR else "doctor"] = self.agent
        if self.subcase is not None:
            out["subcase"] = self.subcase
        if self.evidence:
            out["released"] = {h: sorted(s) for h, s in self.evidence}
        return out

    def describe(self) -> str:
        if self.kind == SINGLE_PAIR:
            text = f"({self.hospitals[0]}, {self.agent})"
        elif self.kind == COUPLE_PAIR:
            text = f"(({self.hospitals[0]}, {self.hospitals[1]}), {self.agent}) [{self.subcase}]"
        else:
            return f"{self.hospitals[0]} prefers to be empty"
        released = [f"{h} releases {{{', '.join(sorted(s))}}}" for h, s in self.evidence if s]
        return text + (" " + "; ".join(released) if released else "")


def _single_blocks(matching, instance) -> Iterator[Block]:
    for s in instance.singles:
        pref = instance.profile.doctor_prefs[s]
        here = matching[s]
        for h in pref.ranking:
            if h == here:
                break
            ok = hospital_prefers_set(h, {s}, matching, instance)
            if ok is not None:
                yield Block(SINGLE_PAIR, (h,), s, None, ((h, ok.released),) if h != LAMBDA else ())


def _couple_blocks(matching, instance) -> Iterator[Block]:
    for c in instance.couples:
        cp = instance.profile.couple_prefs[c.id]
        here = matching.pair(c)
        for hf, hm in cp.ranking:
            if (hf, hm) == here:
                break
            if hf == hm:
                ok = hospital_prefers_set(hf, {c.f, c.m}, matching, instance)
                if ok is not None:
                    ev = ((hf, ok.released),) if hf != LAMBDA else ()
                    yield Block(COUPLE_PAIR, (hf, hm), c.id, "iii", ev)
                continue
            evidence = []
            clauses = []
            failed = False
            for role, member, target, current in (("i", c.f, hf, here[0]), ("ii", c.m, hm, here[1])):
                if current == target:
                    continue
                ok = hospital_prefers_set(target, {member}, matching, instance)
                if ok is None:
                    failed = True
                    break
                clauses.append(role)
                if target != LAMBDA:
                    evidence.append((target, ok.released))
            if not failed:
                yield Block(COUPLE_PAIR, (hf, hm), c.id, "+".join(clauses), tuple(evidence))


def _empty_blocks(matching, instance) -> Iterator[Block]:
    for h in instance.hospital_ids:
        pref = instance.hospital_pref(h)
        if pref.prefers_sets(EMPTY, matching.members(h)):
            yield Block(HOSPITAL_EMPTY, (h,), None)


def iter_blocks(matching: Matching, instance: Instance) -> Iterator[Block]:
    """Blocks in discovery order; cheaper checks first.  Use for early exit."""
    yield from _empty_blocks(matching, instance)
    yield from _single_blocks(matching, instance)
    yield from _couple_blocks(matching, instance)


def find_blocks(matching: Matching, instance: Instance) -> list[Block]:
    """Every block of ``matching``, sorted by kind then ids."""
    return sorted(iter_blocks(matching, instance), key=Block.sort_key)


def is_stable(matching: Matching, instance: Instance) -> bool:
    return next(iter_blocks(matching, instance), None) is None


@dataclass(frozen=True)
class IRViolation:
    clause: str
    agent: str
    detail: str


def individual_rationality_violations(matching: Matching, instance: Instance) -> list[IRViolation]:
    out = []
    for s in instance.singles:
        if instance.profile.doctor_prefs[s].prefers(LAMBDA, matching[s]):
            out.append(IRViolation("i", s, f"prefers unemployment to {matching[s]}"))
    for c in instance.couples:
        pair = matching.pair(c)
        if instance.profile.couple_prefs[c.id].prefers((LAMBDA, LAMBDA), pair):
            out.append(IRViolation("ii", c.id, f"prefers ({LAMBDA}, {LAMBDA}) to {pair}"))
    for h in instance.hospital_ids:
        pref = instance.hospital_pref(h)
        for d in sorted(matching.members(h)):
            if not pref.accepts(d):
                out.append(IRViolation("iii", d, f"unacceptable to {h}"))
    return out


def is_individually_rational(matching: Matching, instance: Instance) -> bool:
    return not individual_rationality_violations(matching, instance)


def enumerate_stable(instance: Instance, cap: int = DEFAULT_MATCHING_CAP, prune: bool = True) -> list[Matching]:
    """All stable matchings, in :func:`feasible_matchings` order.

    With ``prune`` the search skips branches that break individual
    rationality (every stable matching is individually rational); the
    result is identical to filtering every feasible matching.  The cap is
    checked against the raw assignment space either way.
    """
    if not prune:
        return [m for m in feasible_matchings(instance, cap) if is_stable(m, instance)]
    doctors = instance.doctors
    options = (LAMBDA,) + instance.hospital_ids
    size = len(options) ** len(doctors)
    if size > cap:
        raise SearchSpaceExceeded(size, cap)

    # per doctor: the options compatible with individual rationality
    allowed = []
    partner_index = {}
    for k, d in enumerate(doctors):
        couple = instance.couple_of(d)
        ok = []
        for h in options:
            if h != LAMBDA and not instance.hospital_pref(h).accepts(d):
                continue
            if couple is None and instance.profile.doctor_prefs[d].prefers(LAMBDA, h):
                continue
            ok.append(h)
        allowed.append(ok)
        if couple is not None and d == couple.m:
            partner_index[k] = (doctors.index(couple.f), instance.profile.couple_prefs[couple.id])

    load = {h: 0 for h in instance.hospital_ids}
    current: list[str] = []
    found = []

    def rec(k):
        if k == len(doctors):
            m = Matching(dict(zip(doctors, current)))
            if is_stable(m, instance):
                found.append(m)
            return
        for h in allowed[k]:
            if k in partner_index:
                fi, cp = partner_index[k]
                if cp.prefers((LAMBDA, LAMBDA), (current[fi], h)):
                    continue
            if h != LAMBDA:
                if load[h] >= instance.capacity(h):
                    continue
                load[h] += 1
            current.append(h)
            rec(k + 1)
            current.pop()
            if h != LAMBDA:
                load[h] -= 1

    rec(0)
    return found


def blocks_report(matching: Matching, instance: Instance) -> dict:
    blocks = find_blocks(matching, instance)
    return {
        "matching": matching.to_dict(instance),
        "stable": not blocks,
        "individually_rational": is_individually_rational(matching, instance),
        "blocks": [b.to_dict() for b in blocks],
    }
