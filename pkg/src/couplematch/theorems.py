"""Worked examples, counterexample builders and the claim-verification harness.

Two examples have no stable matching.  One has three hospitals and a
couple whose joint order puts sharing one hospital above a split
that one member prefers.  The other has one hospital that rates the
couple above two doctors ranked between its members.  A third example
has a fixed matching that stays stable whatever the doctors want.

The builders turn any violation of extreme-altruism (a condition on
couples) or of aversion to couple diversity (a condition on hospitals)
into a full profile with no stable matching.  The side the condition
talks about is left unchanged.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Iterator

from .dpda import run_dpda
from .errors import (
    ConstructionError,
    ExtensionCapExceeded,
    InsufficientDoctors,
    SearchSpaceExceeded,
)
from .generate import (
    random_doctor_pref,
    random_hospital_pref,
    random_instance,
    resample_doctors,
    resample_hospital_sets,
    with_profile,
)
from .model import (
    DEFAULT_MATCHING_CAP,
    Couple,
    Instance,
    Matching,
    feasible_matchings,
    make_instance,
    validate_instance,
)
from .poset import (
    DEFAULT_EXTENSION_CAP,
    count_extensions,
    enumerate_extensions,
    first_extension,
    sample_extension,
)
from .prefs import (
    LAMBDA,
    AltruismWitness,
    CouplePref,
    DoctorPref,
    HospitalPref,
    check_diversity_aversion,
    check_extreme_altruism,
    couple_poset,
    hospital_poset,
)
from .stability import COUPLE_PAIR, enumerate_stable, find_blocks, is_stable

CLAIMS = (
    "example-1",
    "example-2",
    "thm1-i",
    "thm1-ii",
    "thm2-i",
    "thm2-ii",
    "closing-example",
    "lemma-suite",
)


def _completion(ranked, hospitals) -> tuple[str, ...]:
    """``ranked`` first, then the other real hospitals in id order, then ``LAMBDA``."""
    rest = [h for h in hospitals if h not in ranked]
    return tuple(ranked) + tuple(rest) + ((LAMBDA,) if LAMBDA not in ranked else ())


def _tail(hospitals, exclude=()) -> tuple[str, ...]:
    return tuple(h for h in hospitals if h not in exclude)


# --- the three-hospital example ---------------------------------------------

EX1_HOSPITALS = ("h1", "h2", "h3")
EX1_INDIVIDUAL = {
    "h1": ("d3", "d4", "f", "d1", "d2", "m"),
    "h2": ("d3", "d4", "f", "d1", "m", "d2"),
    "h3": ("d4", "d3", "d1", "f", "m", "d2"),
}
EX1_STATED = {
    "d1": ("h2", "h1"),
    "d2": ("h1",),
    "d3": ("h2",),
    "d4": ("h3",),
    "f": ("h2", "h1", "h3"),
    "m": ("h1", "h2", "h3"),
}
EX1_HOSPITAL_CONSTRAINTS = {"h1": ((frozenset({"f", "m"}), frozenset({"d1", "d2"})),)}


@dataclass
class Example1Family:
    """The three-hospital example with its free slots.

    Doctors' orders are completed by :func:`_completion` (listed in
    ``completion``).  Hospital set orders range over the responsive orders
    honouring ``{f, m}`` above ``{d1, d2}`` at h1; the couple order is the
    first extension of its constrained poset unless varied explicitly.
    """

    base: Instance
    completion: dict[str, tuple[str, ...]]
    hospital_posets: dict
    couple_poset: object

    def _with(self, hospital_prefs, couple_pref=None) -> Instance:
        p = self.base.profile
        return make_instance(
            self.base.hospitals,
            self.base.singles,
            self.base.couples,
            p.doctor_prefs,
            {"c": couple_pref} if couple_pref is not None else p.couple_prefs,
            hospital_prefs,
            strict=True,
        )

    def sample(self, seed: int, vary_couple: bool = False) -> Instance:
        rng = random.Random(seed)
        prefs = {}
        for h in EX1_HOSPITALS:
            order = sample_extension(self.hospital_posets[h], rng.getrandbits(32))
            prefs[h] = HospitalPref(EX1_INDIVIDUAL[h], 2, order, EX1_HOSPITAL_CONSTRAINTS.get(h, ()))
        cp = CouplePref(sample_extension(self.couple_poset, rng.getrandbits(32))) if vary_couple else None
        return self._with(prefs, cp)

    def count(self, cap: int) -> int | None:
        """Number of hospital completions, or ``None`` when above ``cap``."""
        total = 1
        for h in EX1_HOSPITALS:
            try:
                total *= count_extensions(self.hospital_posets[h], cap)
            except ExtensionCapExceeded:
                return None
            if total > cap:
                return None
        return total

    def enumerate(self, cap: int) -> Iterator[Instance]:
        per = [list(enumerate_extensions(self.hospital_posets[h], cap)) for h in EX1_HOSPITALS]
        for combo in itertools.product(*per):
            yield self._with(
                {
                    h: HospitalPref(EX1_INDIVIDUAL[h], 2, order, EX1_HOSPITAL_CONSTRAINTS.get(h, ()))
                    for h, order in zip(EX1_HOSPITALS, combo)
                }
            )


def build_example_1() -> Example1Family:
    completion = {d: _completion(r, EX1_HOSPITALS) for d, r in EX1_STATED.items()}
    f_pref, m_pref = DoctorPref(completion["f"]), DoctorPref(completion["m"])
    extra = [
        (("h1", "h1"), ("h2", "h3")),
        # both members employed beats either one unemployed
        (("h3", "h3"), ("h2", LAMBDA)),
        (("h3", "h3"), (LAMBDA, "h1")),
    ]
    cposet = couple_poset(f_pref, m_pref, extra)
    hposets = {
        h: hospital_poset(EX1_INDIVIDUAL[h], 2, EX1_HOSPITAL_CONSTRAINTS.get(h, ())) for h in EX1_HOSPITALS
    }
    hospital_prefs = {
        h: HospitalPref(EX1_INDIVIDUAL[h], 2, first_extension(hposets[h]), EX1_HOSPITAL_CONSTRAINTS.get(h, ()))
        for h in EX1_HOSPITALS
    }
    base = validate_instance(
        make_instance(
            [(h, 2) for h in EX1_HOSPITALS],
            ["d1", "d2", "d3", "d4"],
            [Couple("c", "f", "m")],
            {d: DoctorPref(completion[d]) for d in ("d1", "d2", "d3", "d4")},
            {"c": CouplePref(first_extension(cposet))},
            hospital_prefs,
            strict=True,
        ),
        strict=True,
    )
    return Example1Family(base, completion, hposets, cposet)


# --- the one-hospital example ----------------------------------------------


def build_example_2() -> Instance:
    sets = [
        ("f", "d1"), ("f", "d2"), ("f", "m"), ("d1", "d2"), ("d1", "m"), ("d2", "m"),
        ("f",), ("d1",), ("d2",), ("m",), (),
    ]
    doc = {
        "strict": False,
        "hospitals": [
            {
                "id": "h1",
                "capacity": 2,
                "individual_order": ["f", "d1", "d2", "m"],
                "set_order": [list(s) for s in sets],
            }
        ],
        "singles": ["d1", "d2"],
        "couples": [
            {
                "id": "c",
                "f": "f",
                "m": "m",
                "pair_order": [[LAMBDA, "h1"], ["h1", "h1"], [LAMBDA, LAMBDA], ["h1", LAMBDA]],
            }
        ],
        "doctor_orders": {"d1": ["h1", LAMBDA], "d2": ["h1", LAMBDA]},
    }
    return validate_instance(doc, strict=False)


# --- the closing example ----------------------------------------------------

CLOSING_INDIVIDUAL = {"h1": ("f", "s1", "s2", "m"), "h2": ("s2", "m", "f", "s1")}
CLOSING_CONSTRAINTS = {"h1": ((frozenset({"f", "m"}), frozenset({"s1", "s2"})),)}
CLOSING_MATCHING = {"f": "h1", "s1": "h1", "s2": "h2", "m": "h2"}


def build_closing_example() -> tuple[Instance, Matching]:
    """Two hospitals, a couple and two singles, with the fixed matching.

    Hospital set orders are the canonical responsive completions (h1 with
    ``{f, m}`` above ``{s1, s2}``); doctors start with the first
    employed-above-unemployment orders.  Use :func:`closing_completions`
    to range over every doctor and couple preference.
    """
    hs = ("h1", "h2")
    hospital_prefs = {
        h: HospitalPref.canonical(CLOSING_INDIVIDUAL[h], 2, CLOSING_CONSTRAINTS.get(h, ())) for h in hs
    }
    pref = DoctorPref(hs + (LAMBDA,))
    inst = make_instance(
        [(h, 2) for h in hs],
        ["s1", "s2"],
        [Couple("c", "f", "m")],
        {"s1": pref, "s2": pref},
        {"c": CouplePref(first_extension(couple_poset(pref, pref)))},
        hospital_prefs,
        strict=True,
    )
    inst = validate_instance(inst, strict=True)
    return inst, Matching(CLOSING_MATCHING)


def closing_completions(base: Instance, cap: int = DEFAULT_EXTENSION_CAP) -> Iterator[Instance]:
    """Every doctor profile where all doctors rank both hospitals above unemployment."""
    hs = base.hospital_ids
    orders = [DoctorPref(p + (LAMBDA,)) for p in itertools.permutations(hs)]
    couple_orders = []
    for fp, mp in itertools.product(orders, repeat=2):
        couple_orders.extend(CouplePref(o) for o in enumerate_extensions(couple_poset(fp, mp), cap))
    for p1, p2 in itertools.product(orders, repeat=2):
        for cp in couple_orders:
            yield make_instance(
                base.hospitals, base.singles, base.couples,
                {"s1": p1, "s2": p2}, {"c": cp}, base.profile.hospital_prefs, strict=True,
            )


# --- counterexample builders ------------------------------------------------


@dataclass
class Counterexample:
    instance: Instance
    witness: tuple
    roles: dict


def _rest_order(first, hospitals) -> tuple[str, ...]:
    return tuple(first) + _tail(hospitals, first)


def _reduce_altruism(w: AltruismWitness, instance: Instance):
    """Reduce a violation to one of the two buildable shapes, or ``None``.

    A violation in which the better hospital is above unemployment for the
    moving member reduces to the same hospital paired with the partner
    unemployed.  A violation with the better hospital equal to
    unemployment is already in the second shape.  The remaining shape
    (better hospital real but below unemployment) is not buildable.
    """
    cp = instance.profile.couple_prefs[w.couple]
    top = cp.f_pref if w.clause == "i" else cp.m_pref
    if w.better == LAMBDA:
        return ("unemployed", w.better)
    if top.prefers(w.better, LAMBDA):
        return ("split", w.better)
    return None


def always_stable_certificate(instance: Instance) -> str | None:
    """Reason why every extension of the couples' profile has a stable matching, or ``None``.

    Covers one pattern: a single couple, one member x ranks unemployment
    first, and the couple ranks (@, @) above (h, h) for every real h.  In
    any stable matching x is unemployed (otherwise the couple blocks with
    x moving to @), so the couple behaves like its other member alone.
    A stable matching of that singles market is stable here too: every
    pair the couple prefers either improves the other member alone or
    puts x in a real hospital, which the couple ranks lower.  Extreme
    altruism can still fail for such a profile, through a better
    hospital that x ranks below unemployment.
    """
    if len(instance.couples) != 1:
        return None
    c = instance.couples[0]
    cp = instance.profile.couple_prefs[c.id]
    for x, pref in ((c.f, cp.f_pref), (c.m, cp.m_pref)):
        if pref.top != LAMBDA:
            continue
        if all(cp.prefers((LAMBDA, LAMBDA), (h, h)) for h in instance.hospital_ids):
            return f"{x} ranks {LAMBDA} first and {c.id} ranks ({LAMBDA}, {LAMBDA}) above every shared hospital"
    return None


def build_altruism_counterexample(instance: Instance, witness: AltruismWitness | None = None) -> Counterexample:
    """Extend the couples' profile to one with no stable matching.

    Couple orders are kept as given.  Singles and hospital preferences are
    rewritten: filler singles take all but two places at the violating
    hospital h (and all but one at the better hospital), two more singles
    d1, d2 sit between the couple members at h, and h rates the couple
    above {d1, d2}.  Raises :class:`ConstructionError` when no violation is
    in a buildable shape and :class:`InsufficientDoctors` when there are
    too few singles for the fillers.
    """
    witnesses = [witness] if witness is not None else check_extreme_altruism(instance)
    if not witnesses:
        raise ConstructionError("the couples' profile satisfies extreme-altruism")
    hospitals = instance.hospital_ids
    singles = list(instance.singles)
    chosen = None
    short = None
    for w in witnesses:
        reduced = _reduce_altruism(w, instance)
        if reduced is None:
            continue
        shape, better = reduced
        cap_h = instance.capacity(w.hospital)
        if cap_h < 2:
            short = short or f"capacity of {w.hospital} is below 2"
            continue
        need = cap_h if shape == "unemployed" else cap_h + instance.capacity(better) - 1
        if need > len(singles):
            short = short or f"{need} singles needed for witness {tuple(w)}, {len(singles)} available"
            continue
        chosen = (w, shape, better)
        break
    if chosen is None:
        if short is not None:
            raise InsufficientDoctors(short)
        raise ConstructionError(
            "every violation has the better hospital below unemployment for the moving member; "
            "no counterexample is built for that shape"
        )
    w, shape, better = chosen
    h = w.hospital
    couple = instance.couple(w.couple)
    top, bottom = (couple.f, couple.m) if w.clause == "i" else (couple.m, couple.f)

    pool = iter(singles)
    d1, d2 = next(pool), next(pool)
    fill_h = [next(pool) for _ in range(instance.capacity(h) - 2)]
    fill_b = [next(pool) for _ in range(instance.capacity(better) - 1)] if shape == "split" else []
    idle = list(pool)

    doctor_prefs = {}
    for s in fill_h:
        doctor_prefs[s] = DoctorPref(_rest_order((h, LAMBDA), hospitals))
    for s in fill_b:
        doctor_prefs[s] = DoctorPref(_rest_order((better, LAMBDA), hospitals))
    if shape == "split":
        doctor_prefs[d1] = DoctorPref(_rest_order((better, h, LAMBDA), hospitals))
    else:
        doctor_prefs[d1] = DoctorPref(_rest_order((h, LAMBDA), hospitals))
    doctor_prefs[d2] = DoctorPref(_rest_order((h, LAMBDA), hospitals))
    for s in idle:
        doctor_prefs[s] = DoctorPref(_rest_order((LAMBDA,), hospitals))

    constraint = ((frozenset({top, bottom}), frozenset({d1, d2})),)
    hospital_prefs = {}
    for x, cap in instance.hospitals:
        if x == h:
            hospital_prefs[x] = HospitalPref.canonical(tuple(fill_h) + (top, d1, d2, bottom), cap, constraint)
        elif x == better:
            hospital_prefs[x] = HospitalPref.canonical(tuple(fill_b) + (top, d1), cap)
        else:
            hospital_prefs[x] = HospitalPref.canonical((), cap)

    out = make_instance(
        instance.hospitals, instance.singles, instance.couples,
        {s: doctor_prefs[s] for s in instance.singles},
        instance.profile.couple_prefs, hospital_prefs, strict=instance.strict,
    )
    roles = {
        "shape": shape,
        "couple": couple.id,
        "moving_member": top,
        "other_member": bottom,
        "hospital": h,
        "better": better,
        "reduced_witness": [couple.id, h, better, LAMBDA, w.clause],
        "between": [d1, d2],
        "fillers": {h: fill_h, **({better: fill_b} if shape == "split" else {})},
        "idle": idle,
    }
    return Counterexample(out, tuple(w), roles)


def build_diversity_counterexample(instance: Instance, witness=None) -> Counterexample:
    """Extend the hospitals' profile to one with no stable matching.

    Hospital preferences are kept as given.  The couple member ranked
    higher at the violating hospital h prefers unemployment to h and the
    other prefers h to unemployment, while the couple ranks sharing h
    above both being unemployed.  Exactly capacity-many doctors ranked
    above the lower member (d1 and d2 among them) want h first.  Everyone
    else prefers unemployment.
    """
    witnesses = [witness] if witness is not None else check_diversity_aversion(instance)
    if not witnesses:
        raise ConstructionError("the hospitals' profile satisfies aversion to couple diversity")
    w = witnesses[0]
    h = w.hospital
    hp = instance.hospital_pref(h)
    couple = instance.couple(w.couple)
    top, bottom = (couple.f, couple.m) if w.clause == "i" else (couple.m, couple.f)
    cap = instance.capacity(h)
    above = hp.individual_order[: hp.doctor_rank(bottom)]
    others = [d for d in above if d not in (top, w.d1, w.d2)]
    if len(others) < cap - 2:
        raise InsufficientDoctors(f"{h} needs {cap} doctors above {bottom} besides {top}")
    eager = [w.d1, w.d2] + others[: cap - 2]
    hospitals = instance.hospital_ids

    wants_h = DoctorPref(_rest_order((h, LAMBDA), hospitals))
    idle = DoctorPref(_rest_order((LAMBDA,), hospitals))
    doctor_prefs = {s: wants_h if s in eager else idle for s in instance.singles}

    couple_prefs = {}
    for c in instance.couples:
        if c.id == couple.id:
            continue
        fp = wants_h if c.f in eager else idle
        mp = wants_h if c.m in eager else idle
        couple_prefs[c.id] = CouplePref(first_extension(couple_poset(fp, mp)))

    top_pref = DoctorPref(_rest_order((LAMBDA, h), hospitals))
    bottom_pref = wants_h

    def pair(t, b):
        return (t, b) if top == couple.f else (b, t)

    block = [pair(LAMBDA, h), pair(h, h), pair(LAMBDA, LAMBDA), pair(h, LAMBDA)]
    fp, mp = (top_pref, bottom_pref) if top == couple.f else (bottom_pref, top_pref)
    ground = couple_poset(fp, mp).elements
    extra = list(zip(block, block[1:])) + [(block[-1], p) for p in ground if p not in block]
    couple_prefs[couple.id] = CouplePref(first_extension(couple_poset(fp, mp, extra)))

    out = make_instance(
        instance.hospitals, instance.singles, instance.couples,
        doctor_prefs, {c.id: couple_prefs[c.id] for c in instance.couples},
        instance.profile.hospital_prefs, strict=instance.strict,
    )
    roles = {
        "couple": couple.id,
        "upper_member": top,
        "lower_member": bottom,
        "hospital": h,
        "between": [w.d1, w.d2],
        "eager": eager,
        "couple_top": [list(p) for p in block],
    }
    return Counterexample(out, tuple(w), roles)


# --- verification harness ---------------------------------------------------


@dataclass
class Budget:
    """How much work a claim may do.  ``None`` picks the claim's default."""

    instances: int | None = None
    samples: int | None = None
    max_extensions: int = DEFAULT_EXTENSION_CAP
    matching_cap: int = DEFAULT_MATCHING_CAP
    seed: int = 0


DEFAULTS = {
    "example-1": (1, 100),
    "thm1-i": (200, 50),
    "thm1-ii": (50, 1),
    "thm2-i": (200, 50),
    "thm2-ii": (50, 1),
    "lemma-suite": (500, 1),
}


@dataclass
class WitnessReport:
    claim: str
    instances_checked: int = 0
    extensions_checked: int = 0
    outcome: str = "pass"
    label: str = "verified"
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def fail(self, instance, extension, detail):
        self.failures.append({"instance": instance, "extension": extension, "detail": detail})

    def finish(self, sampled: int = 0):
        self.outcome = "fail" if self.failures else "pass"
        if sampled:
            self.label = f"statistically verified ({sampled} samples)"
        if self.failures:
            self.label = "refuted"
        return self

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable) + "\n"

    def to_text(self) -> str:
        lines = [
            f"claim: {self.claim}",
            f"outcome: {self.outcome} ({self.label})",
            f"instances checked: {self.instances_checked}",
            f"extensions checked: {self.extensions_checked}",
        ]
        for k in sorted(self.details):
            v = self.details[k]
            if isinstance(v, dict):
                lines.append(f"{k.replace('_', ' ')}:")
                lines.extend(f"  {kk}: {_fmt(vv)}" for kk, vv in v.items())
            else:
                lines.append(f"{k.replace('_', ' ')}: {_fmt(v)}")
        for fl in self.failures[:20]:
            lines.append(f"FAIL instance={fl['instance']} extension={fl['extension']}: {fl['detail']}")
        if len(self.failures) > 20:
            lines.append(f"... {len(self.failures) - 20} more failures")
        return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(type(x))


def _fmt(v):
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, default=_jsonable)
    return str(v)


def _rng(budget: Budget, claim: str, i: int) -> random.Random:
    return random.Random(f"{budget.seed}:{claim}:{i}")


def _sizes(rng):
    n_h = rng.choice((2, 3))
    n_c = rng.choice((1, 1, 2))
    n_s = rng.randint(max(0, 4 - 2 * n_c), 6 - 2 * n_c)
    return n_h, n_s, n_c


def _verify_example_1(budget, report):
    fam = build_example_1()
    n = budget.samples
    report.details["completion"] = {d: " > ".join(v) for d, v in fam.completion.items()}
    report.details["couple_order_top"] = [list(p) for p in fam.base.profile.couple_prefs["c"].ranking[:6]]
    report.details["feasible_matchings"] = sum(1 for _ in feasible_matchings(fam.base, budget.matching_cap))
    witnesses = check_extreme_altruism(fam.base)
    report.details["altruism_witness"] = list(witnesses[0]) if witnesses else None
    if ("c", "h1", "h2", "h3", "i") not in [tuple(w) for w in witnesses]:
        report.fail("base", None, "expected altruism violation (c, h1, h2, h3, i) not reported")
    total = fam.count(budget.max_extensions)
    if total is not None and total <= budget.max_extensions:
        family, sampled = fam.enumerate(budget.max_extensions), 0
    else:
        family, sampled = (fam.sample(budget.seed * 100003 + k) for k in range(n)), n
    report.details["completions_available"] = total if total is not None else f"> {budget.max_extensions}"
    stable_total = 0
    for k, inst in enumerate(family):
        report.extensions_checked += 1
        stable = enumerate_stable(inst, budget.matching_cap)
        stable_total += len(stable)
        if stable:
            report.fail(0, k, f"stable matching found: {stable[0].describe(inst)}")
        mu, _ = run_dpda(inst)
        blocks = find_blocks(mu, inst)
        if not blocks:
            report.fail(0, k, "deferred acceptance output is stable")
        elif any(b.kind != COUPLE_PAIR or b.hospitals[0] != b.hospitals[1] for b in blocks):
            report.fail(0, k, "deferred acceptance output has a block other than a same-hospital couple block")
    report.instances_checked = 1
    report.details["stable_matchings"] = stable_total
    return report.finish(sampled)


def _verify_example_2(budget, report):
    inst = build_example_2()
    feasible = sum(1 for _ in feasible_matchings(inst, budget.matching_cap))
    stable = enumerate_stable(inst, budget.matching_cap)
    mu, _ = run_dpda(inst)
    blocks = find_blocks(mu, inst)
    report.instances_checked = 1
    report.details.update(
        feasible_matchings=feasible,
        stable_matchings=len(stable),
        dpda=mu.to_dict(inst),
        dpda_blocks=[b.describe() for b in blocks],
        diversity_witnesses=[list(w) for w in check_diversity_aversion(inst)],
    )
    if feasible != 11:
        report.fail(0, None, f"expected 11 feasible matchings, got {feasible}")
    if stable:
        report.fail(0, None, f"stable matching found: {stable[0].describe(inst)}")
    return report.finish()


def _hospital_completions(inst, cap):
    per = []
    for h in inst.hospital_ids:
        hp = inst.hospital_pref(h)
        poset = hospital_poset(hp.individual_order, hp.capacity, hp.set_constraints)
        try:
            orders = list(enumerate_extensions(poset, cap))
        except ExtensionCapExceeded:
            return None
        per.append([HospitalPref(hp.individual_order, hp.capacity, o, hp.set_constraints) for o in orders])
        if _product_size(per) > cap:
            return None
    out = []
    for combo in itertools.product(*per):
        prefs = dict(zip(inst.hospital_ids, combo))
        out.append(
            make_instance(inst.hospitals, inst.singles, inst.couples, inst.profile.doctor_prefs,
                          inst.profile.couple_prefs, prefs)
        )
    return out


def _product_size(lists):
    n = 1
    for x in lists:
        n *= len(x)
    return n


def _verify_existence(budget, report, claim, enforce=True):
    """Deferred acceptance is stable on every completion of the fixed side.

    With ``enforce=False`` the fixed side is drawn without the condition;
    that control run is expected to find failures.
    """
    n_inst = budget.instances
    sampled_any = False
    exhaustive = 0
    for i in range(n_inst):
        rng = _rng(budget, claim, i)
        n_h, n_s, n_c = _sizes(rng)
        employed = rng.random() < 0.5
        if claim == "thm1-i":
            mode = "altruistic" if enforce else "random"
            inst = random_instance(rng, n_h, n_s, n_c, 2, couples_mode=mode, employed=employed)
            bad = check_extreme_altruism(inst) if enforce else []
            completions = _hospital_completions(inst, budget.samples)
        else:
            mode = "averse" if enforce else "random"
            inst = random_instance(rng, n_h, n_s, n_c, 2, hospitals_mode=mode, employed=employed)
            bad = check_diversity_aversion(inst) if enforce else []
            completions = None  # doctor-side completions are never few enough
        if bad:
            report.fail(i, None, f"generator produced a violating profile: {bad[0]}")
            continue
        if completions is not None:
            exhaustive += 1
        else:
            if claim == "thm1-i":
                completions = [resample_hospital_sets(rng, inst) for _ in range(budget.samples)]
            else:
                completions = [resample_doctors(rng, inst, employed) for _ in range(budget.samples)]
            sampled_any = True
        report.instances_checked += 1
        for k, ext in enumerate(completions):
            report.extensions_checked += 1
            mu, _ = run_dpda(ext)
            if not is_stable(mu, ext):
                blocks = find_blocks(mu, ext)
                report.fail(i, k, f"deferred acceptance output blocked by {blocks[0].describe()}")
                continue
            if mu not in enumerate_stable(ext, budget.matching_cap):
                report.fail(i, k, "deferred acceptance output missing from the stable set")
    report.details["exhaustive_instances"] = exhaustive
    return report.finish(report.extensions_checked if sampled_any else 0)


def control_sweep(claim: str, budget: Budget | None = None) -> WitnessReport:
    """The thm1-i / thm2-i sweep with the condition switched off."""
    if claim not in ("thm1-i", "thm2-i"):
        raise ValueError("control sweeps exist for thm1-i and thm2-i only")
    budget = budget or Budget(instances=200, samples=10)
    return _verify_existence(budget, WitnessReport(claim + "-control"), claim, enforce=False)


CERTIFICATE_CHECKS = 20


def _random_extensions(rng, inst, n):
    """Fresh singles' orders and hospital preferences; the couples stay fixed."""
    for _ in range(n):
        yield with_profile(
            inst,
            doctor_prefs={s: random_doctor_pref(rng, inst.hospital_ids) for s in inst.singles},
            hospital_prefs={
                h: random_hospital_pref(rng, inst.doctors, cap, rng.choice((0.6, 1.0))) for h, cap in inst.hospitals
            },
        )


def _verify_builder(budget, report, claim):
    """Every drawn violating profile becomes an instance with an empty stable set.

    Profiles without enough singles for the fillers are redrawn.  A
    profile the builder cannot handle counts as a failure; when it also
    carries :func:`always_stable_certificate` the failure is a refutation,
    since no extension of it lacks a stable matching.
    """
    n_inst = budget.instances
    attempts = 0
    shapes = {}
    certified = []
    insufficient = 0
    while report.instances_checked < n_inst and attempts < 50 * n_inst:
        rng = _rng(budget, claim, attempts)
        attempts += 1
        n_h = rng.choice((2, 3))
        if claim == "thm1-ii":
            inst = random_instance(rng, n_h, rng.randint(3, 4), 1, 2)
            if not check_extreme_altruism(inst):
                continue
            builder = build_altruism_counterexample
        else:
            inst = random_instance(rng, n_h, 4, 1, 2, accept_prob=1.0)
            if not check_diversity_aversion(inst):
                continue
            builder = build_diversity_counterexample
        i = report.instances_checked
        try:
            built = builder(inst)
        except InsufficientDoctors:
            insufficient += 1
            continue
        except ConstructionError as exc:
            report.instances_checked += 1
            reason = always_stable_certificate(inst) if claim == "thm1-ii" else None
            if reason is not None:
                certified.append(attempts - 1)
                report.fail(i, None, f"no counterexample exists: {reason}")
                for ext in _random_extensions(rng, inst, CERTIFICATE_CHECKS):
                    report.extensions_checked += 1
                    mu, _ = run_dpda(ext)
                    if not is_stable(mu, ext):
                        report.fail(i, None, "certificate contradicted: deferred acceptance output unstable")
            else:
                report.fail(i, None, f"builder refused: {exc}")
            continue
        report.instances_checked += 1
        out = built.instance
        try:
            validate_instance(out, strict=False)
        except Exception as exc:  # a builder bug, not an input problem
            report.fail(i, None, f"built instance invalid: {exc}")
        if claim == "thm1-ii" and out.profile.couple_prefs != inst.profile.couple_prefs:
            report.fail(i, None, "couple preferences changed")
        if claim == "thm2-ii" and out.profile.hospital_prefs != inst.profile.hospital_prefs:
            report.fail(i, None, "hospital preferences changed")
        stable = enumerate_stable(out, budget.matching_cap)
        if stable:
            report.fail(i, None, f"stable matching found for witness {built.witness}: {stable[0].describe(out)}")
        shape = built.roles.get("shape", "averse")
        shapes[shape] = shapes.get(shape, 0) + 1
    report.details["built"] = shapes
    report.details["always_stable_profiles"] = len(certified)
    report.details["redrawn_for_too_few_singles"] = insufficient
    report.details["profiles_drawn"] = attempts
    if report.instances_checked < n_inst:
        report.fail(None, None, f"budget exhausted: drew {report.instances_checked} of {n_inst} violating profiles")
    return report.finish()


def _verify_closing(budget, report):
    base, mu = build_closing_example()
    report.instances_checked = 1
    report.details["matching"] = mu.to_dict(base)
    for k, inst in enumerate(closing_completions(base, budget.max_extensions)):
        report.extensions_checked += 1
        blocks = find_blocks(mu, inst)
        if blocks:
            report.fail(0, k, f"blocked by {blocks[0].describe()}")
    report.details["diversity_witnesses"] = [list(w) for w in check_diversity_aversion(base)]
    return report.finish()


def lemma_violations(mu: Matching, instance: Instance) -> list[str]:
    """Blocks of a deferred-acceptance outcome that should be impossible.

    Allowed are only same-hospital couple blocks at a real hospital that
    holds neither member, where no member ranked higher by that hospital
    would rather be there.
    """
    out = []
    for b in find_blocks(mu, instance):
        if b.kind == COUPLE_PAIR and b.hospitals[0] == b.hospitals[1]:
            h = b.hospitals[0]
            c = instance.couple(b.agent)
            if h == LAMBDA:
                out.append(f"couple block at unemployment: {b.describe()}")
                continue
            hp = instance.hospital_pref(h)
            if mu[c.f] == h or mu[c.m] == h:
                out.append(f"couple block at a member's own hospital: {b.describe()}")
            for x, y in ((c.f, c.m), (c.m, c.f)):
                if hp.prefers_doctor(x, y) and instance.pref_of(x).prefers(h, mu[x]):
                    out.append(f"couple block led by the higher-ranked member: {b.describe()}")
        elif b.kind == COUPLE_PAIR:
            out.append(f"split couple block: {b.describe()}")
        elif b.kind == "single-pair":
            out.append(f"single-pair block: {b.describe()}")
        else:
            out.append(f"individual rationality: {b.describe()}")
    return out


def _verify_lemmas(budget, report):
    same_hospital = 0
    for i in range(budget.instances):
        rng = _rng(budget, "lemma-suite", i)
        n_h, n_s, n_c = _sizes(rng)
        n_h = rng.randint(1, 3)
        inst = random_instance(rng, n_h, n_s, n_c, (1, 3), accept_prob=rng.choice((0.6, 0.85, 1.0)))
        mu, trace = run_dpda(inst)
        report.instances_checked += 1
        for v in lemma_violations(mu, inst):
            report.fail(i, None, v)
        same_hospital += sum(1 for b in find_blocks(mu, inst) if b.kind == COUPLE_PAIR)
    report.details["remaining_same_hospital_blocks"] = same_hospital
    return report.finish()


def verify_claim(claim: str, budget: Budget | None = None) -> WitnessReport:
    """Run the protocol for ``claim`` (one of :data:`CLAIMS`)."""
    if claim not in CLAIMS:
        raise ValueError(f"unknown claim {claim!r}; expected one of {', '.join(CLAIMS)}")
    budget = budget or Budget()
    inst_default, samples_default = DEFAULTS.get(claim, (1, 1))
    budget = Budget(
        instances=budget.instances if budget.instances is not None else inst_default,
        samples=budget.samples if budget.samples is not None else samples_default,
        max_extensions=budget.max_extensions,
        matching_cap=budget.matching_cap,
        seed=budget.seed,
    )
    report = WitnessReport(claim)
    try:
        if claim == "example-1":
            return _verify_example_1(budget, report)
        if claim == "example-2":
            return _verify_example_2(budget, report)
        if claim in ("thm1-i", "thm2-i"):
            return _verify_existence(budget, report, claim)
        if claim in ("thm1-ii", "thm2-ii"):
            return _verify_builder(budget, report, claim)
        if claim == "closing-example":
            return _verify_closing(budget, report)
        return _verify_lemmas(budget, report)
    except (SearchSpaceExceeded, ExtensionCapExceeded) as exc:
        report.fail(None, None, f"budget exhausted: {exc}")
        return report.finish()
