"""Matching problems, matchings, and the JSON instance format.

The dummy hospital ``LAMBDA`` ("@" in files) is never declared: it has
room for every doctor, accepts everyone and is indifferent among them.
Doctors are ordered singles first, then couple members (f before m) in
document order; every enumeration follows that order.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import InconsistentOrder, NotResponsive, SearchSpaceExceeded, ValidationError
from .prefs import (
    LAMBDA,
    CouplePref,
    DoctorPref,
    HospitalPref,
    check_hospital_responsive,
    feasible_subsets,
)

DEFAULT_MATCHING_CAP = 10**7


@dataclass(frozen=True)
class Couple:
    id: str
    f: str
    m: str

    @property
    def members(self) -> tuple[str, str]:
        return (self.f, self.m)


@dataclass(frozen=True)
class PreferenceProfile:
    doctor_prefs: dict[str, DoctorPref]
    couple_prefs: dict[str, CouplePref]
    hospital_prefs: dict[str, HospitalPref]


@dataclass(frozen=True)
class Instance:
    """A validated matching problem.  Build with :func:`validate_instance`."""

    hospitals: tuple[tuple[str, int], ...]
    singles: tuple[str, ...]
    couples: tuple[Couple, ...]
    profile: PreferenceProfile
    strict: bool = True
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hospitals", tuple((h, int(k)) for h, k in self.hospitals))
        object.__setattr__(self, "singles", tuple(self.singles))
        object.__setattr__(self, "couples", tuple(self.couples))
        doctors = self.singles + tuple(d for c in self.couples for d in c.members)
        cache = {
            "doctors": doctors,
            "hospital_ids": tuple(h for h, _ in self.hospitals),
            "capacity": dict(self.hospitals) | {LAMBDA: len(doctors)},
            "couple_of": {d: c for c in self.couples for d in c.members},
            "couple_by_id": {c.id: c for c in self.couples},
        }
        object.__setattr__(self, "_cache", cache)

    @property
    def doctors(self) -> tuple[str, ...]:
        return self._cache["doctors"]

    @property
    def hospital_ids(self) -> tuple[str, ...]:
        return self._cache["hospital_ids"]

    def capacity(self, h: str) -> int:
        return self._cache["capacity"][h]

    def couple_of(self, d: str) -> Couple | None:
        return self._cache["couple_of"].get(d)

    def couple(self, cid: str) -> Couple:
        return self._cache["couple_by_id"][cid]

    def hospital_pref(self, h: str) -> HospitalPref:
        return self.profile.hospital_prefs[h]

    def pref_of(self, d: str) -> DoctorPref:
        """Individual ranking of ``d``: its own for singles, the marginal for couple members."""
        couple = self.couple_of(d)
        if couple is None:
            return self.profile.doctor_prefs[d]
        cp = self.profile.couple_prefs[couple.id]
        return cp.f_pref if d == couple.f else cp.m_pref


@dataclass(frozen=True)
class Matching:
    """Total map doctor -> hospital id or ``LAMBDA``."""

    assignment: Mapping[str, str]

    def __post_init__(self):
        assignment = dict(self.assignment)
        object.__setattr__(self, "assignment", assignment)
        members: dict[str, set] = {}
        for d, h in assignment.items():
            members.setdefault(h, set()).add(d)
        object.__setattr__(self, "_members", {h: frozenset(s) for h, s in members.items()})

    def __getitem__(self, d: str) -> str:
        return self.assignment[d]

    def __hash__(self):
        return hash(tuple(sorted(self.assignment.items())))

    def members(self, h: str) -> frozenset:
        return self._members.get(h, frozenset())

    def pair(self, couple: Couple) -> tuple[str, str]:
        return (self.assignment[couple.f], self.assignment[couple.m])

    @classmethod
    def from_hospitals(cls, instance: Instance, holds: Mapping[str, object]) -> "Matching":
        """Build from ``{hospital: doctors}``; unlisted doctors are unemployed."""
        assignment = {d: LAMBDA for d in instance.doctors}
        for h, ds in holds.items():
            for d in ds:
                assignment[d] = h
        return cls(assignment)

    def to_dict(self, instance: Instance | None = None) -> dict:
        order = instance.doctors if instance is not None else sorted(self.assignment)
        return {d: self.assignment[d] for d in order}

    def describe(self, instance: Instance) -> str:
        parts = []
        for h in instance.hospital_ids + (LAMBDA,):
            ds = [d for d in instance.doctors if self.assignment[d] == h]
            parts.append(f"{h}: {{{', '.join(ds)}}}")
        return "; ".join(parts)


def check_matching(matching: Matching, instance: Instance) -> list[str]:
    """Problems with ``matching`` as a matching of ``instance``; empty means valid."""
    problems = []
    known = set(instance.doctors)
    given = set(matching.assignment)
    for d in sorted(known - given):
        problems.append(f"doctor {d} has no assignment")
    for d in sorted(given - known):
        problems.append(f"unknown doctor {d}")
    valid = set(instance.hospital_ids) | {LAMBDA}
    for d, h in matching.assignment.items():
        if h not in valid:
            problems.append(f"doctor {d} assigned to unknown hospital {h}")
    for h in instance.hospital_ids:
        n = sum(1 for x in matching.assignment.values() if x == h)
        if n > instance.capacity(h):
            problems.append(f"hospital {h} holds {n} doctors, capacity {instance.capacity(h)}")
    return problems


def feasible_matchings(instance: Instance, cap: int = DEFAULT_MATCHING_CAP) -> Iterator[Matching]:
    """Every capacity-respecting total assignment, each exactly once.

    Lexicographic over the instance's doctor order, with each doctor's
    options tried as ``LAMBDA`` then hospitals in document order.  Raises
    :class:`SearchSpaceExceeded` up front when the raw space of
    ``(|H| + 1) ** |D|`` assignments is larger than ``cap``.
    """
    doctors = instance.doctors
    options = (LAMBDA,) + instance.hospital_ids
    size = len(options) ** len(doctors)
    if size > cap:
        raise SearchSpaceExceeded(size, cap)
    load = {h: 0 for h in instance.hospital_ids}
    current: list[str] = []

    def rec(k):
        if k == len(doctors):
            yield Matching(dict(zip(doctors, current)))
            return
        for h in options:
            if h != LAMBDA:
                if load[h] >= instance.capacity(h):
                    continue
                load[h] += 1
            current.append(h)
            yield from rec(k + 1)
            current.pop()
            if h != LAMBDA:
                load[h] -= 1

    yield from rec(0)


# --- file format -------------------------------------------------------------


def _set_to_list(s, order) -> list[str]:
    rank = {d: i for i, d in enumerate(order)}
    return sorted(s, key=lambda d: rank.get(d, len(rank)))


def instance_to_dict(instance: Instance) -> dict:
    hospitals = []
    for h, k in instance.hospitals:
        hp = instance.hospital_pref(h)
        entry = {
            "id": h,
            "capacity": k,
            "individual_order": list(hp.individual_order),
            "set_order": [_set_to_list(s, hp.individual_order) for s in hp.set_order],
        }
        if hp.set_constraints:
            entry["set_constraints"] = [
                [_set_to_list(a, hp.individual_order), _set_to_list(b, hp.individual_order)]
                for a, b in hp.set_constraints
            ]
        hospitals.append(entry)
    return {
        "strict": instance.strict,
        "hospitals": hospitals,
        "singles": list(instance.singles),
        "couples": [
            {
                "id": c.id,
                "f": c.f,
                "m": c.m,
                "pair_order": [list(p) for p in instance.profile.couple_prefs[c.id].ranking],
            }
            for c in instance.couples
        ],
        "doctor_orders": {
            s: list(instance.profile.doctor_prefs[s].ranking) for s in instance.singles
        },
    }


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, ensure_ascii=False) + "\n"


def load_instance(path, strict: bool | None = None) -> Instance:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return validate_instance(raw, strict=strict)


def _is_id(x) -> bool:
    return isinstance(x, str) and x != "" and x != LAMBDA


def _complete_order(order, ground, what, problems) -> bool:
    if not isinstance(order, list):
        problems.append(f"{what}: order must be an array")
        return False
    seen = set()
    ok = True
    for x in order:
        key = tuple(x) if isinstance(x, list) else x
        if key in seen:
            problems.append(f"{what}: {x} listed twice (orders must be strict)")
            ok = False
        elif key not in ground:
            problems.append(f"{what}: unknown alternative {x}")
            ok = False
        seen.add(key)
    missing = set(ground) - seen
    if missing:
        problems.append(f"{what}: order incomplete, missing {sorted(map(str, missing))}")
        ok = False
    return ok


def validate_instance(raw, strict: bool | None = None) -> Instance:
    """Check an instance document and build an :class:`Instance`.

    ``raw`` is a parsed JSON document (or an :class:`Instance`, which is
    re-validated from its document form).  Raises :class:`ValidationError`
    listing every problem found.  In strict mode the global size assumptions
    (|H| >= 2, |D| >= 4, at least one couple, every capacity >= 2) are
    errors; in relaxed mode they become warnings on the result.
    """
    if isinstance(raw, Instance):
        if strict is None:
            strict = raw.strict
        raw = instance_to_dict(raw)
    if not isinstance(raw, dict):
        raise ValidationError(["instance document must be a JSON object"])
    if strict is None:
        strict = bool(raw.get("strict", True))
    problems: list[str] = []
    warnings: list[str] = []
    for key in ("hospitals", "singles", "couples", "doctor_orders"):
        if key not in raw:
            problems.append(f"missing top-level key {key!r}")
    extra = set(raw) - {"hospitals", "singles", "couples", "doctor_orders", "strict", "notes"}
    for key in sorted(extra):
        warnings.append(f"ignored top-level key {key!r}")
    if problems:
        raise ValidationError(problems)

    all_ids: dict[str, str] = {}

    def claim(x, kind):
        if not _is_id(x):
            problems.append(f"invalid {kind} id {x!r}")
            return False
        if x in all_ids:
            problems.append(f"duplicate id {x!r} ({all_ids[x]} and {kind})")
            return False
        all_ids[x] = kind
        return True

    hospitals = []
    for entry in raw["hospitals"] or []:
        if not isinstance(entry, dict) or "id" not in entry:
            problems.append(f"hospital entry {entry!r} lacks an id")
            continue
        if not claim(entry["id"], "hospital"):
            continue
        cap = entry.get("capacity")
        if not isinstance(cap, int) or isinstance(cap, bool) or cap < 1:
            problems.append(f"hospital {entry['id']}: capacity must be an integer >= 1, got {cap!r}")
            continue
        hospitals.append((entry["id"], cap, entry))
    hospital_ids = [h for h, _, _ in hospitals]
    alts = hospital_ids + [LAMBDA]

    singles = []
    for s in raw["singles"] or []:
        if claim(s, "single doctor"):
            singles.append(s)
    couples = []
    for entry in raw["couples"] or []:
        if not isinstance(entry, dict) or not {"id", "f", "m"} <= set(entry):
            problems.append(f"couple entry {entry!r} needs id, f and m")
            continue
        ok = claim(entry["id"], "couple")
        for role in ("f", "m"):
            x = entry[role]
            if x in singles:
                problems.append(f"couple {entry['id']}: {role}={x} is also listed as a single")
                ok = False
            elif not claim(x, "couple member"):
                ok = False
        if ok:
            couples.append(entry)
    doctors = singles + [d for c in couples for d in (c["f"], c["m"])]
    doctor_set = set(doctors)

    doctor_prefs = {}
    orders = raw["doctor_orders"] or {}
    if not isinstance(orders, dict):
        problems.append("doctor_orders must be an object")
        orders = {}
    for d in orders:
        if d not in singles:
            problems.append(f"doctor_orders lists {d!r}, which is not a single doctor")
    for s in singles:
        if s not in orders:
            problems.append(f"single {s}: no entry in doctor_orders")
        elif _complete_order(orders[s], set(alts), f"single {s}", problems):
            doctor_prefs[s] = DoctorPref(tuple(orders[s]))

    couple_prefs = {}
    pair_ground = {(a, b) for a in alts for b in alts}
    for c in couples:
        order = c.get("pair_order")
        if order is None:
            problems.append(f"couple {c['id']}: missing pair_order")
            continue
        if not isinstance(order, list) or not all(isinstance(p, list) and len(p) == 2 for p in order):
            problems.append(f"couple {c['id']}: pair_order must be an array of 2-element arrays")
            continue
        if not _complete_order(order, pair_ground, f"couple {c['id']}", problems):
            continue
        try:
            couple_prefs[c["id"]] = CouplePref(tuple(tuple(p) for p in order))
        except NotResponsive as exc:
            problems.append(f"couple {c['id']}: {exc}")

    hospital_prefs = {}
    for h, cap, entry in hospitals:
        order = entry.get("individual_order", [])
        if not isinstance(order, list):
            problems.append(f"hospital {h}: individual_order must be an array")
            continue
        bad = False
        for d in order:
            if d not in doctor_set:
                problems.append(f"hospital {h}: preference over unknown doctor {d!r}")
                bad = True
        if len(set(order)) != len(order):
            problems.append(f"hospital {h}: individual_order lists a doctor twice (orders must be strict)")
            bad = True
        if bad:
            continue
        acc = set(order)
        constraints = []
        for item in entry.get("set_constraints", []) or []:
            if not (isinstance(item, list) and len(item) == 2):
                problems.append(f"hospital {h}: set constraint {item!r} must be a pair of sets")
                bad = True
                continue
            a, b = (frozenset(x) for x in item)
            for s in (a, b):
                if not s <= acc or len(s) > cap:
                    problems.append(f"hospital {h}: set constraint over {sorted(s)} is not a feasible acceptable set")
                    bad = True
            constraints.append((a, b))
        if bad:
            continue
        set_order = entry.get("set_order")
        if set_order is None:
            try:
                hp = HospitalPref.canonical(tuple(order), cap, tuple(constraints))
            except InconsistentOrder as exc:
                problems.append(f"hospital {h}: set constraints are inconsistent ({exc})")
                continue
        else:
            ground = {frozenset(s) for s in feasible_subsets(order, cap)}
            sets = [frozenset(s) if isinstance(s, list) else s for s in set_order]
            if not _complete_order(sets, ground, f"hospital {h} set_order", problems):
                continue
            hp = HospitalPref(tuple(order), cap, tuple(sets), tuple(constraints))
            for v in check_hospital_responsive(hp):
                problems.append(
                    f"hospital {h}: set_order not responsive (clause {v.clause}: "
                    f"{sorted(v.first)} vs {sorted(v.second)}"
                    + (f" with {v.common}" if v.common else "") + ")"
                )
            for a, b in constraints:
                if not hp.prefers_sets(a, b):
                    problems.append(f"hospital {h}: set_order violates constraint {sorted(a)} > {sorted(b)}")
        hospital_prefs[h] = hp

    size_rules = []
    if len(hospital_ids) < 2:
        size_rules.append(f"|H| = {len(hospital_ids)} < 2")
    if len(doctors) < 4:
        size_rules.append(f"|D| = {len(doctors)} < 4")
    if len(couples) < 1:
        size_rules.append("no couples")
    for h, cap, _ in hospitals:
        if cap < 2:
            size_rules.append(f"capacity of {h} is {cap} < 2")
    if strict:
        problems.extend(f"strict mode: {r}" for r in size_rules)
    else:
        warnings.extend(f"strict mode would reject: {r}" for r in size_rules)

    if problems:
        raise ValidationError(problems)
    return Instance(
        hospitals=tuple((h, cap) for h, cap, _ in hospitals),
        singles=tuple(singles),
        couples=tuple(Couple(c["id"], c["f"], c["m"]) for c in couples),
        profile=PreferenceProfile(doctor_prefs, couple_prefs, hospital_prefs),
        strict=strict,
        warnings=tuple(warnings),
    )


def make_instance(hospitals, singles, couples, doctor_prefs, couple_prefs, hospital_prefs, strict=False):
    """Assemble an :class:`Instance` from preference objects without validation.

    For generators whose output is valid by construction.
    """
    return Instance(
        hospitals=tuple(hospitals),
        singles=tuple(singles),
        couples=tuple(couples),
        profile=PreferenceProfile(dict(doctor_prefs), dict(couple_prefs), dict(hospital_prefs)),
        strict=strict,
    )


def parse_matching(raw, instance: Instance) -> Matching:
    """Read a matching document: ``{doctor: hospital-or-"@"}``.

    An object with a single ``assignment`` key holding that map is accepted
    too.  Raises :class:`ValidationError` for incomplete or infeasible input.
    """
    if isinstance(raw, dict) and set(raw) == {"assignment"}:
        raw = raw["assignment"]
    if not isinstance(raw, dict) or not all(isinstance(v, str) for v in raw.values()):
        raise ValidationError(["matching must map doctor ids to hospital ids or \"@\""])
    matching = Matching(raw)
    problems = check_matching(matching, instance)
    if problems:
        raise ValidationError(problems)
    return matching
