"""Preferences of doctors, couples and hospitals.

Hospitals rank sets of doctors; couples rank ordered pairs of hospitals.
Both must be *responsive*: a unilateral improvement in one coordinate (one
doctor swapped for a better one, or one couple member moved to a better
hospital) is an improvement overall.  Responsiveness pins down only part of
each ranking; the remaining freedom is represented by a
:class:`~couplematch.poset.ResponsivePoset` whose linear extensions are
exactly the responsive completions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, NamedTuple, Sequence

from .errors import NotResponsive
from .poset import ResponsivePoset, first_extension

if TYPE_CHECKING:
    from .model import Instance

LAMBDA = "@"
"""Reserved id of the dummy hospital: being matched to it means unemployed."""

EMPTY: frozenset = frozenset()


@dataclass(frozen=True)
class DoctorPref:
    """Strict ranking over real hospitals and ``LAMBDA``, best first."""

    ranking: tuple[str, ...]
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        object.__setattr__(self, "_rank", {h: i for i, h in enumerate(self.ranking)})

    def rank(self, h: str) -> int:
        return self._rank[h]

    def prefers(self, a: str, b: str) -> bool:
        return self._rank[a] < self._rank[b]

    def weakly_prefers(self, a: str, b: str) -> bool:
        return self._rank[a] <= self._rank[b]

    @property
    def top(self) -> str:
        return self.ranking[0]

    @property
    def acceptable(self) -> tuple[str, ...]:
        """Real hospitals ranked strictly above unemployment."""
        return self.ranking[: self._rank[LAMBDA]]


def derive_marginals(ranking: Sequence[tuple[str, str]]) -> tuple[DoctorPref, DoctorPref]:
    """Marginal rankings of the two couple members.

    ``ranking`` must be a complete strict order over all ordered pairs of a
    common alternative set.  Raises :class:`NotResponsive` with a witness
    when two columns (or two rows) order the same alternatives differently.
    """
    ranking = [tuple(p) for p in ranking]
    alts = sorted({p[0] for p in ranking} | {p[1] for p in ranking})
    if len(set(ranking)) != len(ranking) or len(ranking) != len(alts) ** 2:
        raise ValueError("couple ranking must list every ordered pair exactly once")
    pos = {p: i for i, p in enumerate(ranking)}
    out = []
    for coord, member in ((0, "f"), (1, "m")):
        def pair(x, other):
            return (x, other) if coord == 0 else (other, x)

        base_other = alts[0]
        order = sorted(alts, key=lambda x: pos[pair(x, base_other)])
        for other in alts[1:]:
            for hi, lo in itertools.combinations(order, 2):
                if pos[pair(hi, other)] > pos[pair(lo, other)]:
                    raise NotResponsive(
                        member,
                        (pair(hi, base_other), pair(lo, base_other),
                         pair(hi, other), pair(lo, other)),
                    )
        out.append(DoctorPref(tuple(order)))
    return out[0], out[1]


@dataclass(frozen=True)
class CouplePref:
    """Strict ranking over ordered pairs ``(f's hospital, m's hospital)``.

    Construction fails with :class:`NotResponsive` for non-responsive input.
    """

    ranking: tuple[tuple[str, str], ...]
    _rank: dict = field(init=False, repr=False, compare=False)
    f_pref: DoctorPref = field(init=False, repr=False, compare=False)
    m_pref: DoctorPref = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ranking = tuple(tuple(p) for p in self.ranking)
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "_rank", {p: i for i, p in enumerate(ranking)})
        f_pref, m_pref = derive_marginals(ranking)
        object.__setattr__(self, "f_pref", f_pref)
        object.__setattr__(self, "m_pref", m_pref)

    def rank(self, pair) -> int:
        return self._rank[tuple(pair)]

    def prefers(self, a, b) -> bool:
        return self._rank[tuple(a)] < self._rank[tuple(b)]

    def weakly_prefers(self, a, b) -> bool:
        return self._rank[tuple(a)] <= self._rank[tuple(b)]


@dataclass(frozen=True)
class HospitalPref:
    """Ranking of individual acceptable doctors plus a ranking of sets.

    ``individual_order`` lists the acceptable doctors, best first.
    ``set_order`` ranks every subset of them of size at most ``capacity``
    (the empty set included).  Sets containing an unacceptable doctor rank
    below the empty set and are tied with each other.
    ``set_constraints`` records extra "left above right" requirements the
    set order was produced under; they are kept for round-tripping.
    """

    individual_order: tuple[str, ...]
    capacity: int
    set_order: tuple[frozenset, ...]
    set_constraints: tuple[tuple[frozenset, frozenset], ...] = ()
    _drank: dict = field(init=False, repr=False, compare=False)
    _srank: dict = field(init=False, repr=False, compare=False)
    _acc: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "individual_order", tuple(self.individual_order))
        object.__setattr__(self, "_acc", frozenset(self.individual_order))
        object.__setattr__(self, "set_order", tuple(frozenset(s) for s in self.set_order))
        object.__setattr__(
            self,
            "set_constraints",
            tuple((frozenset(a), frozenset(b)) for a, b in self.set_constraints),
        )
        object.__setattr__(self, "_drank", {d: i for i, d in enumerate(self.individual_order)})
        object.__setattr__(self, "_srank", {s: i for i, s in enumerate(self.set_order)})

    @classmethod
    def canonical(cls, individual_order, capacity, constraints=()):
        """The first responsive set order honouring ``constraints``."""
        poset = hospital_poset(individual_order, capacity, constraints)
        return cls(tuple(individual_order), capacity, first_extension(poset), tuple(constraints))

    @property
    def acceptable(self) -> frozenset:
        return self._acc

    def accepts(self, d: str) -> bool:
        return d in self._drank

    def doctor_rank(self, d: str) -> float:
        """Position in the individual order; unacceptable doctors rank last."""
        return self._drank.get(d, float("inf"))

    def prefers_doctor(self, a: str, b: str) -> bool:
        return self.doctor_rank(a) < self.doctor_rank(b)

    def set_value(self, s) -> float:
        """Lower is better.  Unacceptable sets share the worst value."""
        s = frozenset(s)
        rank = self._srank.get(s)
        if rank is not None:
            return rank
        if not s <= self._acc:
            return float("inf")
        raise ValueError(f"set {sorted(s)} exceeds capacity {self.capacity}")

    def prefers_sets(self, a, b) -> bool:
        return self.set_value(a) < self.set_value(b)


def feasible_subsets(doctors: Sequence[str], capacity: int) -> list[frozenset]:
    out = []
    for k in range(min(capacity, len(doctors)) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(doctors, k))
    return out


# --- responsiveness checks -------------------------------------------------


class HospitalViolation(NamedTuple):
    clause: str
    first: frozenset
    second: frozenset
    common: str | None = None


def check_hospital_responsive(pref: HospitalPref) -> list[HospitalViolation]:
    """All violations of hospital responsiveness; empty means responsive.

    Clause ``i``: a nonempty set ranked below the empty set.  Clause ``ii``:
    two singletons ordered against the individual order.  Clause ``iii``:
    adding a common doctor ``common`` to ``first`` and ``second`` flips
    their comparison.
    """
    expected = feasible_subsets(pref.individual_order, pref.capacity)
    if set(pref.set_order) != set(expected) or len(pref.set_order) != len(expected):
        raise ValueError("set_order must list every feasible subset exactly once")
    out = []
    rank = pref._srank
    for s in pref.set_order:
        if s and rank[s] > rank[EMPTY]:
            out.append(HospitalViolation("i", EMPTY, s))
    for a, b in itertools.combinations(pref.individual_order, 2):
        if rank[frozenset([a])] > rank[frozenset([b])]:
            out.append(HospitalViolation("ii", frozenset([a]), frozenset([b])))
    small = [s for s in pref.set_order if len(s) < pref.capacity]
    small.sort(key=lambda s: sorted(map(pref.doctor_rank, s)))
    for s1, s2 in itertools.combinations(small, 2):
        before = rank[s1] < rank[s2]
        for d in pref.individual_order:
            if d in s1 or d in s2:
                continue
            if (rank[s1 | {d}] < rank[s2 | {d}]) != before:
                hi, lo = (s1, s2) if before else (s2, s1)
                out.append(HospitalViolation("iii", hi, lo, d))
    return out


# --- posets of responsive completions --------------------------------------


def couple_poset(
    f_pref: DoctorPref, m_pref: DoctorPref, extra: Iterable[tuple] = ()
) -> ResponsivePoset:
    """Pairs ordered by the product of the two marginals, plus ``extra``.

    Every linear extension is a responsive couple ranking with exactly these
    marginals.
    """
    f_alts, m_alts = f_pref.ranking, m_pref.ranking
    if set(f_alts) != set(m_alts):
        raise ValueError("marginals must rank the same alternatives")
    pairs = sorted(
        itertools.product(f_alts, m_alts),
        key=lambda p: (f_pref.rank(p[0]) + m_pref.rank(p[1]), f_pref.rank(p[0])),
    )
    rel = []
    for y in m_alts:
        rel.extend(((a, y), (b, y)) for a, b in zip(f_alts, f_alts[1:]))
    for x in f_alts:
        rel.extend(((x, a), (x, b)) for a, b in zip(m_alts, m_alts[1:]))
    rel.extend((tuple(a), tuple(b)) for a, b in extra)
    return ResponsivePoset(pairs, rel)


def hospital_poset(
    individual_order: Sequence[str], capacity: int, extra: Iterable[tuple] = ()
) -> ResponsivePoset:
    """Feasible sets under the literal responsiveness clauses, plus ``extra``.

    Relations: every nonempty set above the empty set; singletons in the
    individual order; adding a common doctor preserves comparisons (as links
    between the two comparisons).  No other comparison is inferred.
    """
    drank = {d: i for i, d in enumerate(individual_order)}
    sets = feasible_subsets(individual_order, capacity)
    sets.sort(key=lambda s: (-len(s), sorted(drank[d] for d in s)))
    rel = [(s, EMPTY) for s in sets if s]
    singles = [frozenset([d]) for d in individual_order]
    rel.extend(zip(singles, singles[1:]))
    links = []
    small = [s for s in sets if len(s) < capacity]
    for s1, s2 in itertools.combinations(small, 2):
        for d in individual_order:
            if d not in s1 and d not in s2:
                links.append((s1 | {d}, s2 | {d}, s1, s2))
    members = set(sets)
    for a, b in extra:
        a, b = frozenset(a), frozenset(b)
        if a not in members or b not in members:
            raise ValueError(f"constraint {sorted(a)} > {sorted(b)} is not over feasible acceptable sets")
        rel.append((a, b))
    return ResponsivePoset(sets, rel, links)


# --- conditions on couples and hospitals ----------------------------------


class AltruismWitness(NamedTuple):
    """Couple ``couple`` should rank ``pair`` above ``(hospital, hospital)``."""

    couple: str
    hospital: str
    better: str
    other: str
    clause: str

    @property
    def pair(self) -> tuple[str, str]:
        if self.clause == "i":
            return (self.better, self.other)
        return (self.other, self.better)


def check_extreme_altruism(instance: "Instance") -> list[AltruismWitness]:
    """Every violation of extreme-altruism, sorted; empty means satisfied.

    For a couple {f, m} and a real hospital h with capacity at most
    |D| - 2: whenever f strictly prefers h' to h, weakly prefers h' to h''
    and m weakly prefers h'' to unemployment, the couple must rank
    (h', h'') above (h, h).  Clause ``ii`` swaps the roles of f and m.
    """
    n_doctors = len(instance.doctors)
    alts = instance.hospital_ids + (LAMBDA,)
    out = []
    for couple in instance.couples:
        cp = instance.profile.couple_prefs[couple.id]
        for clause, me, other in (("i", cp.f_pref, cp.m_pref), ("ii", cp.m_pref, cp.f_pref)):
            for h in instance.hospital_ids:
                if instance.capacity(h) > n_doctors - 2:
                    continue
                for better in alts:
                    if not me.prefers(better, h):
                        continue
                    for low in alts:
                        if not (me.weakly_prefers(better, low) and other.weakly_prefers(low, LAMBDA)):
                            continue
                        pair = (better, low) if clause == "i" else (low, better)
                        if not cp.prefers(pair, (h, h)):
                            out.append(AltruismWitness(couple.id, h, better, low, clause))
    out.sort()
    return out


class DiversityWitness(NamedTuple):
    """Hospital ``hospital`` should rank {d1, d2} above the couple."""

    hospital: str
    couple: str
    d1: str
    d2: str
    clause: str


def check_diversity_aversion(instance: "Instance") -> list[DiversityWitness]:
    """Every violation of aversion to couple diversity, sorted.

    For hospital h and couple {f, m} both acceptable to h, with
    f > d1 > d2 > m in h's individual order and more than capacity-many
    acceptable doctors above m, h must rank {d1, d2} above {f, m}.  Clause
    ``ii`` swaps f and m.  Hospitals of capacity one cannot hold a pair and
    are skipped.
    """
    out = []
    for h in instance.hospital_ids:
        hp = instance.profile.hospital_prefs[h]
        if hp.capacity < 2:
            continue
        order = hp.individual_order
        for couple in instance.couples:
            for clause, top, bottom in (("i", couple.f, couple.m), ("ii", couple.m, couple.f)):
                if not (hp.accepts(top) and hp.accepts(bottom)):
                    continue
                lo, hi = hp.doctor_rank(top), hp.doctor_rank(bottom)
                if lo > hi or hi <= hp.capacity:
                    # fewer than capacity+1 doctors above ``bottom``
                    continue
                between = order[lo + 1 : hi]
                pair = frozenset([top, bottom])
                for d1, d2 in itertools.combinations(between, 2):
                    if not hp.prefers_sets({d1, d2}, pair):
                        out.append(DiversityWitness(h, couple.id, d1, d2, clause))
    out.sort()
    return out
