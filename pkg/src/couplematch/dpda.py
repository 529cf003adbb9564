"""Doctor-proposing deferred acceptance.

Couple members propose on their own, each following the marginal ranking
derived from the couple's joint order; the joint order itself plays no
part.  The dummy hospital never rejects anyone, so a doctor who proposes
there stays there.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import Instance, Matching
from .prefs import LAMBDA, HospitalPref


def hospital_choice(h: str, candidates, pref: HospitalPref, capacity: int):
    """Split ``candidates`` into (held, rejected) for hospital ``h``.

    Holds the ``capacity`` best acceptable candidates by the individual
    order; unacceptable candidates are always rejected.  By responsiveness
    the held set is the best feasible subset of the candidates.
    """
    candidates = frozenset(candidates)
    if h == LAMBDA:
        return candidates, frozenset()
    acceptable = sorted((d for d in candidates if pref.accepts(d)), key=pref.doctor_rank)
    held = frozenset(acceptable[:capacity])
    return held, candidates - held


@dataclass
class Round:
    proposals: dict[str, str]
    holds: dict[str, frozenset]
    rejections: dict[str, frozenset]


@dataclass
class Trace:
    rounds: list[Round] = field(default_factory=list)

    def rejected_by(self, h: str) -> frozenset:
        out = set()
        for r in self.rounds:
            out |= r.rejections.get(h, frozenset())
        return frozenset(out)

    def to_text(self, instance: Instance | None = None) -> str:
        order = instance.doctors if instance is not None else None

        def fmt(ds):
            ds = [d for d in order if d in ds] if order is not None else sorted(ds)
            return "{" + ", ".join(ds) + "}"

        lines = []
        for k, r in enumerate(self.rounds, 1):
            props = ", ".join(f"{d}->{h}" for d, h in r.proposals.items())
            holds = "; ".join(f"{h}: {fmt(ds)}" for h, ds in r.holds.items())
            rej = "; ".join(f"{h}: {fmt(ds)}" for h, ds in r.rejections.items() if ds)
            lines.append(f"round {k}")
            lines.append(f"  proposals: {props or '-'}")
            lines.append(f"  holds: {holds or '-'}")
            lines.append(f"  rejections: {rej or '-'}")
        return "\n".join(lines) + "\n"


def run_dpda(instance: Instance, sequential: bool = False, seed: int = 0) -> tuple[Matching, Trace]:
    """Run deferred acceptance and return the final matching and its trace.

    The default schedule is simultaneous rounds.  With ``sequential=True``
    one free doctor, picked with ``random.Random(seed)``, proposes per
    step; that mode exists to check that the schedule does not matter.
    """
    doctors = instance.doctors
    rankings = {d: instance.pref_of(d).ranking for d in doctors}
    nxt = {d: 0 for d in doctors}
    order = instance.hospital_ids + (LAMBDA,)
    holds: dict[str, frozenset] = {h: frozenset() for h in order}
    free = list(doctors)
    trace = Trace()
    rng = random.Random(seed) if sequential else None

    while free:
        if rng is not None:
            movers = [free.pop(rng.randrange(len(free)))]
        else:
            movers, free = free, []
        proposals = {d: rankings[d][nxt[d]] for d in movers}
        incoming: dict[str, set] = {}
        for d, h in proposals.items():
            incoming.setdefault(h, set()).add(d)
        rejections = {}
        for h, ds in incoming.items():
            pool = holds[h] | ds
            if h == LAMBDA:
                held, rejected = pool, frozenset()
            else:
                held, rejected = hospital_choice(h, pool, instance.hospital_pref(h), instance.capacity(h))
            holds[h] = held
            rejections[h] = rejected
            for d in sorted(rejected, key=doctors.index):
                nxt[d] += 1
                free.append(d)
        trace.rounds.append(
            Round(
                proposals=proposals,
                holds={h: holds[h] for h in order},
                rejections={h: rejections[h] for h in order if h in rejections},
            )
        )
    return Matching.from_hospitals(instance, holds), trace


@dataclass(frozen=True)
class RejectionWitness:
    doctor: str
    hospital: str
    holder: str | None
    detail: str


def verify_dpda_rejection_property(matching: Matching, trace: Trace, instance: Instance) -> list[RejectionWitness]:
    """Witnesses against "a doctor who prefers h was out-ranked by all of h's holders".

    For every doctor d and real hospital h with h above d's match, d must
    appear among h's rejections and every doctor held by h must rank above
    d.  An empty list means the property holds.
    """
    out = []
    for d in instance.doctors:
        pref = instance.pref_of(d)
        here = matching[d]
        for h in instance.hospital_ids:
            if h == here or not pref.prefers(h, here):
                continue
            if trace is not None and d not in trace.rejected_by(h):
                out.append(RejectionWitness(d, h, None, "never rejected by a preferred hospital"))
            hp = instance.hospital_pref(h)
            for other in sorted(matching.members(h)):
                if not hp.prefers_doctor(other, d):
                    out.append(RejectionWitness(d, h, other, "held doctor does not out-rank"))
    return out
