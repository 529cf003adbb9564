"""Command-line front end.

Exit codes: 0 success, 1 a claim failed or the checked matching is
unstable, 2 bad input.  All randomness comes from ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .dpda import run_dpda
from .errors import CoupleMatchError, ValidationError
from .model import (
    DEFAULT_MATCHING_CAP,
    Instance,
    Matching,
    dumps_instance,
    load_instance,
    parse_matching,
    validate_instance,
)
from .poset import DEFAULT_EXTENSION_CAP
from .prefs import LAMBDA, check_diversity_aversion, check_extreme_altruism
from .stability import blocks_report, enumerate_stable, find_blocks
from .theorems import (
    CLAIMS,
    Budget,
    build_altruism_counterexample,
    build_diversity_counterexample,
    verify_claim,
)

REPRO = {"example-1": "example-1", "example-2": "example-2", "closing": "closing-example"}


@dataclass
class RunConfig:
    command: str
    instance: str | None
    strict: bool | None
    matching_cap: int
    extension_cap: int
    seed: int
    output: str
    trace: bool


class InputError(Exception):
    pass


def _env_cap(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise InputError(f"{name} must be positive")
    return value


def _count(n, noun) -> str:
    return f"{n} {noun}{'' if n == 1 else 's'}"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _load(cfg: RunConfig) -> Instance:
    try:
        return load_instance(cfg.instance, strict=cfg.strict)
    except OSError as exc:
        raise InputError(f"cannot read {cfg.instance}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{cfg.instance} is not valid JSON: {exc}")


def _matching_lines(mu: Matching, inst: Instance) -> list[str]:
    lines = []
    for h in inst.hospital_ids + (LAMBDA,):
        ds = [d for d in inst.doctors if mu[d] == h]
        lines.append(f"{h}: {{{', '.join(ds)}}}")
    for c in inst.couples:
        lines.append(f"{c.id}: ({mu[c.f]}, {mu[c.m]})")
    return lines


def cmd_validate(cfg, args, out):
    inst = _load(cfg)
    if cfg.output == "json":
        out.write(_dump({
            "valid": True,
            "strict": inst.strict,
            "warnings": list(inst.warnings),
            "hospitals": len(inst.hospitals),
            "doctors": len(inst.doctors),
            "couples": len(inst.couples),
        }))
    else:
        mode = "strict" if inst.strict else "relaxed"
        out.write(f"valid ({mode}): {len(inst.hospitals)} hospitals, {len(inst.doctors)} doctors, "
                  f"{len(inst.couples)} couples\n")
        for w in inst.warnings:
            out.write(f"warning: {w}\n")
    return 0


def cmd_dpda(cfg, args, out):
    inst = _load(cfg)
    mu, trace = run_dpda(inst)
    if cfg.output == "json":
        doc = {"matching": mu.to_dict(inst), "rounds": len(trace.rounds)}
        if cfg.trace:
            doc["trace"] = [
                {
                    "proposals": r.proposals,
                    "holds": {h: [d for d in inst.doctors if d in s] for h, s in r.holds.items()},
                    "rejections": {h: [d for d in inst.doctors if d in s] for h, s in r.rejections.items()},
                }
                for r in trace.rounds
            ]
        out.write(_dump(doc))
    else:
        if cfg.trace:
            out.write(trace.to_text(inst))
        out.write("\n".join(_matching_lines(mu, inst)) + "\n")
    return 0


def cmd_check_stability(cfg, args, out):
    inst = _load(cfg)
    try:
        with open(args.matching, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.matching}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.matching} is not valid JSON: {exc}")
    mu = parse_matching(raw, inst)
    report = blocks_report(mu, inst)
    if cfg.output == "json":
        out.write(_dump(report))
    else:
        out.write("stable\n" if report["stable"] else "not stable\n")
        for b in find_blocks(mu, inst):
            out.write(f"block: {b.describe()}\n")
    return 0 if report["stable"] else 1


def cmd_find_stable(cfg, args, out):
    inst = _load(cfg)
    stable = enumerate_stable(inst, cfg.matching_cap)
    if cfg.output == "json":
        out.write(_dump({"count": len(stable), "stable": [m.to_dict(inst) for m in stable]}))
    else:
        out.write(f"stable matchings: {len(stable)}\n")
        for m in stable:
            out.write("  " + m.describe(inst) + "\n")
    return 0


def cmd_check_conditions(cfg, args, out):
    inst = _load(cfg)
    alt = check_extreme_altruism(inst)
    div = check_diversity_aversion(inst)
    if cfg.output == "json":
        out.write(_dump({
            "extreme_altruism": {"satisfied": not alt, "violations": [w._asdict() for w in alt]},
            "diversity_aversion": {"satisfied": not div, "violations": [w._asdict() for w in div]},
        }))
    else:
        out.write(f"extreme-altruism: {'satisfied' if not alt else _count(len(alt), 'violation')}\n")
        for w in alt:
            pair = w.pair
            out.write(f"  couple {w.couple} ranks ({w.hospital}, {w.hospital}) above ({pair[0]}, {pair[1]}) "
                      f"[clause {w.clause}]\n")
        out.write(f"aversion to couple diversity: {'satisfied' if not div else _count(len(div), 'violation')}\n")
        for w in div:
            out.write(f"  hospital {w.hospital} does not rank {{{w.d1}, {w.d2}}} above couple {w.couple} "
                      f"[clause {w.clause}]\n")
    return 0


def cmd_build(cfg, args, out):
    inst = _load(cfg)
    builder = build_altruism_counterexample if args.kind == "altruism" else build_diversity_counterexample
    built = builder(inst)
    text = dumps_instance(built.instance)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        summary = {"witness": list(built.witness), "roles": built.roles, "written": args.out}
        out.write(_dump(summary) if cfg.output == "json" else
                  f"wrote {args.out}\nwitness: {list(built.witness)}\nroles: {json.dumps(built.roles, sort_keys=True)}\n")
    else:
        out.write(text)
    return 0


def _budget(cfg, args):
    return Budget(
        instances=getattr(args, "instances", None),
        samples=getattr(args, "samples", None),
        max_extensions=cfg.extension_cap,
        matching_cap=cfg.matching_cap,
        seed=cfg.seed,
    )


def _report(report, cfg, out):
    out.write(report.to_json() if cfg.output == "json" else report.to_text())
    return 0 if report.passed else 1


def cmd_repro(cfg, args, out):
    return _report(verify_claim(REPRO[args.example], _budget(cfg, args)), cfg, out)


def cmd_verify(cfg, args, out):
    return _report(verify_claim(args.claim, _budget(cfg, args)), cfg, out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_const", const=True, default=argparse.SUPPRESS,
                      help="enforce the global size assumptions (default unless the file says otherwise)")
    mode.add_argument("--relaxed", dest="strict", action="store_const", const=False, default=argparse.SUPPRESS,
                      help="downgrade the global size assumptions to warnings")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--output", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--matching-cap", type=int, default=argparse.SUPPRESS,
                        help="max assignments to enumerate (env MATCHING_CAP)")
    common.add_argument("--extension-cap", type=int, default=argparse.SUPPRESS,
                        help="max linear extensions to enumerate (env EXTENSION_CAP)")

    parser = argparse.ArgumentParser(prog="couplematch", parents=[common],
                                     description="Stable matching with couples under responsive preferences.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, instance=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if instance:
            p.add_argument("instance", help="instance JSON file")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check an instance file")
    p = add("dpda", cmd_dpda, "run doctor-proposing deferred acceptance")
    p.add_argument("--trace", action="store_true", help="print the round-by-round log")
    p = add("check-stability", cmd_check_stability, "list the blocks of a matching")
    p.add_argument("matching", help="matching JSON file: doctor -> hospital or \"@\"")
    add("find-stable", cmd_find_stable, "list every stable matching by brute force")
    add("check-conditions", cmd_check_conditions, "extreme-altruism and diversity-aversion witnesses")
    p = sub.add_parser("build-counterexample", parents=[common], help="emit an instance with no stable matching")
    p.add_argument("kind", choices=("altruism", "diversity"))
    p.add_argument("instance")
    p.add_argument("-o", "--out", help="write the instance here instead of standard output")
    p.set_defaults(func=cmd_build)
    p = add("repro", cmd_repro, "reproduce a worked example", instance=False)
    p.add_argument("example", choices=tuple(REPRO))
    p.add_argument("--samples", type=int)
    p = add("verify", cmd_verify, "run a verification protocol", instance=False)
    p.add_argument("claim", choices=CLAIMS)
    p.add_argument("--instances", type=int)
    p.add_argument("--samples", type=int)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = RunConfig(
            command=args.command,
            instance=getattr(args, "instance", None),
            strict=getattr(args, "strict", None),
            matching_cap=getattr(args, "matching_cap", None) or _env_cap("MATCHING_CAP", DEFAULT_MATCHING_CAP),
            extension_cap=getattr(args, "extension_cap", None) or _env_cap("EXTENSION_CAP", DEFAULT_EXTENSION_CAP),
            seed=getattr(args, "seed", 0),
            output=getattr(args, "output", "text"),
            trace=getattr(args, "trace", False),
        )
        if cfg.matching_cap < 1 or cfg.extension_cap < 1:
            raise InputError("caps must be positive")
        for name in ("instances", "samples"):
            v = getattr(args, name, None)
            if v is not None and v < 1:
                raise InputError(f"--{name} must be positive")
        return args.func(cfg, args, out)
    except ValidationError as exc:
        for p in exc.problems:
            err.write(f"error: {p}\n")
        return 2
    except (InputError, CoupleMatchError) as exc:
        err.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
