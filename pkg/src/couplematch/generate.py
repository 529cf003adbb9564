"""Seeded random preferences and instances.

Every function takes a ``random.Random`` and is deterministic given its
state.  Responsive couple and hospital orders are drawn as random linear
extensions of the corresponding posets, optionally with extra constraints
that impose extreme-altruism or aversion to couple diversity.
"""
from __future__ import annotations

import itertools
import random
from typing import Sequence

from .errors import InconsistentOrder
from .model import Couple, Instance, make_instance
from .poset import sample_extension
from .prefs import (
    LAMBDA,
    CouplePref,
    DoctorPref,
    HospitalPref,
    couple_poset,
    hospital_poset,
)

MAX_TRIES = 1000


def _seed(rng: random.Random) -> int:
    return rng.getrandbits(32)


def random_doctor_pref(rng: random.Random, hospitals: Sequence[str], employed: bool = False) -> DoctorPref:
    """Uniform order over hospitals and unemployment; ``employed`` puts unemployment last."""
    hs = list(hospitals)
    rng.shuffle(hs)
    if employed:
        return DoctorPref(tuple(hs) + (LAMBDA,))
    alts = hs + [LAMBDA]
    rng.shuffle(alts)
    return DoctorPref(tuple(alts))


def random_couple_pref(rng, hospitals, f_pref=None, m_pref=None, employed=False) -> CouplePref:
    f_pref = f_pref or random_doctor_pref(rng, hospitals, employed)
    m_pref = m_pref or random_doctor_pref(rng, hospitals, employed)
    return CouplePref(sample_extension(couple_poset(f_pref, m_pref), _seed(rng)))


def altruism_constraints(f_pref, m_pref, hospitals, guarded) -> list[tuple]:
    """Pairs ``(better, worse)`` extreme-altruism requires.

    ``guarded`` are the real hospitals whose capacity is at most |D| - 2.
    """
    alts = tuple(hospitals) + (LAMBDA,)
    out = []
    for h in guarded:
        for better in alts:
            for low in alts:
                if f_pref.prefers(better, h) and f_pref.weakly_prefers(better, low) and m_pref.weakly_prefers(low, LAMBDA):
                    out.append(((better, low), (h, h)))
                if m_pref.prefers(better, h) and m_pref.weakly_prefers(better, low) and f_pref.weakly_prefers(low, LAMBDA):
                    out.append(((low, better), (h, h)))
    return out


def altruistic_couple_pref(rng, hospitals, guarded, employed=False) -> CouplePref:
    """Random responsive couple order satisfying extreme-altruism.

    Marginals are redrawn until the required constraints are consistent
    (they are not when the two members order mutually acceptable
    hospitals differently).
    """
    for _ in range(MAX_TRIES):
        f_pref = random_doctor_pref(rng, hospitals, employed)
        m_pref = f_pref if rng.random() < 0.5 else random_doctor_pref(rng, hospitals, employed)
        extra = altruism_constraints(f_pref, m_pref, hospitals, guarded)
        try:
            poset = couple_poset(f_pref, m_pref, extra)
        except InconsistentOrder:
            continue
        return CouplePref(sample_extension(poset, _seed(rng)))
    raise RuntimeError("could not draw an altruistic couple preference")


def random_hospital_pref(rng, doctors, capacity, accept_prob=0.85, constraints=()) -> HospitalPref:
    acc = [d for d in doctors if rng.random() < accept_prob]
    rng.shuffle(acc)
    return sample_hospital_pref(rng, acc, capacity, constraints)


def sample_hospital_pref(rng, individual_order, capacity, constraints=()) -> HospitalPref:
    """A random responsive set order over a fixed individual order."""
    poset = hospital_poset(individual_order, capacity, constraints)
    return HospitalPref(tuple(individual_order), capacity, sample_extension(poset, _seed(rng)), tuple(constraints))


def aversion_constraints(individual_order, capacity, couples) -> list[tuple]:
    """``({d1, d2}, {f, m})`` pairs aversion to couple diversity requires."""
    rank = {d: i for i, d in enumerate(individual_order)}
    out = []
    if capacity < 2:
        return out
    for c in couples:
        if c.f not in rank or c.m not in rank:
            continue
        top, bottom = sorted((c.f, c.m), key=rank.__getitem__)
        if rank[bottom] <= capacity:
            continue
        between = individual_order[rank[top] + 1 : rank[bottom]]
        for d1, d2 in itertools.combinations(between, 2):
            out.append((frozenset((d1, d2)), frozenset((c.f, c.m))))
    return out


def averse_hospital_pref(rng, doctors, capacity, couples, accept_prob=0.85) -> HospitalPref:
    for _ in range(MAX_TRIES):
        acc = [d for d in doctors if rng.random() < accept_prob]
        rng.shuffle(acc)
        try:
            return sample_hospital_pref(rng, acc, capacity, aversion_constraints(acc, capacity, couples))
        except InconsistentOrder:
            continue
    raise RuntimeError("could not draw an averse hospital preference")


def _ids(n_hospitals, n_singles, n_couples):
    hospitals = [f"h{i + 1}" for i in range(n_hospitals)]
    singles = [f"s{i + 1}" for i in range(n_singles)]
    if n_couples == 1:
        couples = [Couple("c", "f", "m")]
    else:
        couples = [Couple(f"c{i + 1}", f"f{i + 1}", f"m{i + 1}") for i in range(n_couples)]
    return hospitals, singles, couples


def random_instance(
    rng: random.Random,
    n_hospitals: int = 3,
    n_singles: int = 4,
    n_couples: int = 1,
    capacity: int | tuple[int, int] = 2,
    accept_prob: float = 0.85,
    couples_mode: str = "random",
    hospitals_mode: str = "random",
    employed: bool = False,
) -> Instance:
    """A random instance with generated ids ``h1..``, ``s1..``, couples ``c``/``f``/``m``.

    ``couples_mode`` is ``random`` or ``altruistic``; ``hospitals_mode`` is
    ``random`` or ``averse``.  ``capacity`` is fixed or a ``(lo, hi)`` range.
    """
    hospitals, singles, couples = _ids(n_hospitals, n_singles, n_couples)
    caps = {
        h: capacity if isinstance(capacity, int) else rng.randint(*capacity) for h in hospitals
    }
    doctors = singles + [d for c in couples for d in c.members]
    guarded = [h for h in hospitals if caps[h] <= len(doctors) - 2]
    doctor_prefs = {s: random_doctor_pref(rng, hospitals, employed) for s in singles}
    couple_prefs = {}
    for c in couples:
        if couples_mode == "altruistic":
            couple_prefs[c.id] = altruistic_couple_pref(rng, hospitals, guarded, employed)
        else:
            couple_prefs[c.id] = random_couple_pref(rng, hospitals, employed=employed)
    hospital_prefs = {}
    for h in hospitals:
        if hospitals_mode == "averse":
            hospital_prefs[h] = averse_hospital_pref(rng, doctors, caps[h], couples, accept_prob)
        else:
            hospital_prefs[h] = random_hospital_pref(rng, doctors, caps[h], accept_prob)
    return make_instance(
        [(h, caps[h]) for h in hospitals], singles, couples, doctor_prefs, couple_prefs, hospital_prefs
    )


def with_profile(instance: Instance, doctor_prefs=None, couple_prefs=None, hospital_prefs=None) -> Instance:
    """Copy of ``instance`` with some preference maps replaced."""
    p = instance.profile
    return make_instance(
        instance.hospitals,
        instance.singles,
        instance.couples,
        doctor_prefs if doctor_prefs is not None else p.doctor_prefs,
        couple_prefs if couple_prefs is not None else p.couple_prefs,
        hospital_prefs if hospital_prefs is not None else p.hospital_prefs,
        strict=instance.strict,
    )


def resample_hospital_sets(rng, instance: Instance) -> Instance:
    """Same individual orders and constraints, fresh responsive set orders."""
    prefs = {
        h: sample_hospital_pref(rng, hp.individual_order, hp.capacity, hp.set_constraints)
        for h, hp in instance.profile.hospital_prefs.items()
    }
    return with_profile(instance, hospital_prefs=prefs)


def resample_couple_orders(rng, instance: Instance) -> Instance:
    """Same marginals, fresh responsive joint orders."""
    prefs = {
        cid: CouplePref(sample_extension(couple_poset(cp.f_pref, cp.m_pref), _seed(rng)))
        for cid, cp in instance.profile.couple_prefs.items()
    }
    return with_profile(instance, couple_prefs=prefs)


def resample_doctors(rng, instance: Instance, employed: bool = False) -> Instance:
    """Fresh orders for singles and fresh couple orders (marginals included)."""
    hs = instance.hospital_ids
    return with_profile(
        instance,
        doctor_prefs={s: random_doctor_pref(rng, hs, employed) for s in instance.singles},
        couple_prefs={c.id: random_couple_pref(rng, hs, employed=employed) for c in instance.couples},
    )
