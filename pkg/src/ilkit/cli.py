"""Command-line front end.

Exit codes: 0 positive answer, 1 negative answer, 2 unknown / budget
exhausted, 3 usage or parse errors. All output is deterministic for fixed
inputs and budgets.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import classify as cls
from .construction import close_frame
from .decide import Budget, Derivable, Refuted, Unknown, check_proof, derivable, parse_proof, satisfiable, Sat, Unsat
from .semantics import (
    ILM,
    LOGICS,
    forces,
    model_from_dict,
    model_to_dict,
    model_to_dot,
    validate,
)
from .syntax import Neg, ParseError, parse, render

_POSITIVE, _NEGATIVE, _UNKNOWN, _USAGE = 0, 1, 2, 3

RULES_CHOICES = ("i", "ii", "iii", "iv", "v", "vi", "vii")


def _budget(args) -> Budget:
    return Budget(args.max_worlds, args.max_steps, args.max_backtracks)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _write_cert(args, payload: dict) -> None:
    if getattr(args, "cert", None):
        with open(args.cert, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _verdict_payload(logic: str, f, v) -> dict:
    out = {"logic": logic, "query": render(f), "verdict": v.kind}
    if isinstance(v, Refuted):
        out["countermodel"] = model_to_dict(v.model)
        out["world"] = v.world
    if isinstance(v, Unknown):
        out["budget"] = {k: n for k, n in v.report}
    return out


def cmd_prove(args) -> int:
    f = parse(args.formula)
    v = derivable(args.logic, f, _budget(args))
    payload = _verdict_payload(args.logic, f, v)
    _emit(args, payload, f"{v.kind}")
    if isinstance(v, Refuted):
        _write_cert(
            args,
            {
                "logic": args.logic,
                "query": render(f),
                "holds": render(Neg(f)),
                "world": v.world,
                "model": model_to_dict(v.model),
            },
        )
        return _NEGATIVE
    if isinstance(v, Derivable):
        return _POSITIVE
    return _UNKNOWN


def cmd_sat(args) -> int:
    f = parse(args.formula)
    res = satisfiable(args.logic, f, _budget(args))
    if isinstance(res, Sat):
        payload = {
            "logic": args.logic,
            "query": render(f),
            "answer": "satisfiable",
            "world": res.world,
            "model": model_to_dict(res.model),
        }
        _emit(args, payload, f"satisfiable at {res.world}")
        _write_cert(
            args,
            {
                "logic": args.logic,
                "query": render(f),
                "holds": render(f),
                "world": res.world,
                "model": model_to_dict(res.model),
            },
        )
        return _POSITIVE
    if isinstance(res, Unsat):
        _emit(args, {"logic": args.logic, "query": render(f), "answer": "unsatisfiable"}, "unsatisfiable")
        return _NEGATIVE
    _emit(args, {"logic": args.logic, "query": render(f), "answer": "unknown"}, "unknown (budget)")
    return _UNKNOWN


def cmd_countermodel(args) -> int:
    f = parse(args.formula)
    v = derivable(args.logic, f, _budget(args))
    if isinstance(v, Refuted):
        payload = {
            "logic": args.logic,
            "query": render(f),
            "world": v.world,
            "model": model_to_dict(v.model),
        }
        _emit(args, payload, f"countermodel at {v.world}:\n{json.dumps(model_to_dict(v.model), indent=2, sort_keys=True)}")
        _write_cert(args, {**payload, "holds": render(Neg(f))})
        return _POSITIVE
    if isinstance(v, Derivable):
        _emit(args, {"logic": args.logic, "query": render(f), "verdict": "derivable"}, "derivable: no countermodel")
        return _NEGATIVE
    _emit(args, {"logic": args.logic, "query": render(f), "verdict": "unknown"}, "unknown (budget)")
    return _UNKNOWN


def _load_model(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if "model" in data:
        return model_from_dict(data["model"]), data
    return model_from_dict(data), data


def cmd_modelcheck(args) -> int:
    model, data = _load_model(args.model)
    rep = validate(model.frame, args.logic)
    formula_text = args.formula or data.get("holds")
    world = args.world or data.get("world")
    if formula_text is None or world is None:
        print("modelcheck: need a formula and a world (flags or cert fields)", file=sys.stderr)
        return _USAGE
    f = parse(formula_text)
    holds = forces(model, world, f) if rep.ok else False
    payload = {
        "frame_valid": rep.ok,
        "violations": [str(v) for v in rep.violations],
        "world": world,
        "formula": render(f),
        "forces": holds,
    }
    _emit(args, payload, f"frame {'ok' if rep.ok else 'INVALID: ' + str(rep)}; {world} forces {render(f)}: {holds}")
    return _POSITIVE if (rep.ok and holds) else _NEGATIVE


def cmd_close(args) -> int:
    with open(args.frame) as fh:
        data = json.load(fh)
    model = model_from_dict(data)
    closed = close_frame(model.frame, args.logic)
    out = {
        "worlds": sorted(closed.worlds),
        "R": sorted([x, y] for (x, y) in closed.R),
        "S": sorted([x, y, z] for (x, y, z) in closed.S),
        "val": {w: sorted(model.val.get(w, ())) for w in sorted(closed.worlds)},
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return _POSITIVE


def cmd_checkproof(args) -> int:
    with open(args.proof) as fh:
        proof = parse_proof(fh.read())
    ok = check_proof(proof, args.logic)
    _emit(args, {"logic": args.logic, "lines": len(proof.lines), "ok": ok}, "ok" if ok else "invalid")
    return _POSITIVE if ok else _NEGATIVE


def cmd_classify(args) -> int:
    f = parse(args.formula)
    budget = _budget(args)
    kind = args.kind
    if kind == "sigma1":
        rep = cls.classify_sigma1(f, budget)
        _emit(args, rep.to_dict(), f"{rep.answer}" + (f" (witness {render(rep.witness)})" if rep.witness is not None else ""))
        if args.cert and rep.countermodel is not None:
            _write_cert(
                args,
                {
                    "logic": ILM,
                    "query": render(rep.reduction_query),
                    "holds": f"~({render(rep.reduction_query)})",
                    "world": rep.countermodel[1],
                    "model": model_to_dict(rep.countermodel[0]),
                },
            )
        return {"yes": _POSITIVE, "no": _NEGATIVE}.get(rep.answer, _UNKNOWN)
    if kind == "delta1":
        rep = cls.classify_delta1(f, budget)
        _emit(args, rep.to_dict(), rep.answer)
        return {"top": _POSITIVE, "bottom": _POSITIVE, "no": _NEGATIVE}.get(rep.answer, _UNKNOWN)
    if kind == "tsg":
        rep = cls.is_tsg(f, budget)
        _emit(args, rep.to_dict(), f"{rep.answer}" + (f" (witness {render(rep.witness)})" if rep.witness is not None else ""))
        return {"yes": _POSITIVE, "no": _NEGATIVE}.get(rep.answer, _UNKNOWN)
    if kind == "selfprover":
        v = cls.is_self_prover(f, budget)
        _emit(args, _verdict_payload(ILM, f, v), v.kind)
        return {"derivable": _POSITIVE, "refuted": _NEGATIVE}.get(v.kind, _UNKNOWN)
    if kind == "almostloeb":
        rep = cls.almost_loeb(f, budget)
        _emit(args, rep.to_dict(), str(rep.witness))
        if rep.witness == "unknown":
            return _UNKNOWN
        return _POSITIVE if rep.witness else _NEGATIVE
    if kind == "dagger":
        rep = cls.dagger_check(f, budget)
        _emit(args, rep.to_dict(), f"dagger_holds={rep.dagger_holds} biconditional_ok={rep.biconditional_ok}")
        if rep.biconditional_ok is None:
            return _UNKNOWN
        return _POSITIVE if rep.biconditional_ok else _NEGATIVE
    print(f"unknown classification {kind!r}", file=sys.stderr)
    return _USAGE


def cmd_rules(args) -> int:
    budget = _budget(args)
    instance: tuple
    if args.rule in ("i", "vi", "vii"):
        if len(args.formulas) != 1:
            print(f"rule {args.rule} takes one formula", file=sys.stderr)
            return _USAGE
        instance = (parse(args.formulas[0]),)
    elif args.rule in ("ii", "iii", "iv"):
        if len(args.formulas) != 2:
            print(f"rule {args.rule} takes two formulas", file=sys.stderr)
            return _USAGE
        instance = tuple(parse(t) for t in args.formulas)
    else:  # v
        if len(args.formulas) < 3:
            print("rule v takes at least three formulas: A_1 .. A_n A B", file=sys.stderr)
            return _USAGE
        fs = [parse(t) for t in args.formulas]
        instance = (fs[:-2], fs[-2], fs[-1])
    rep = cls.check_rule(args.rule, instance, budget)
    _emit(args, rep.to_dict(), f"agree={rep.agree}")
    if rep.agree is None:
        return _UNKNOWN
    return _POSITIVE if rep.agree else _NEGATIVE


def cmd_export_dot(args) -> int:
    model, _ = _load_model(args.model)
    sys.stdout.write(model_to_dot(model))
    return _POSITIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ilkit",
        description="decision procedures and sentence classification for GL, IL and ILM",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp, logic=True):
        if logic:
            sp.add_argument("--logic", choices=LOGICS, default=ILM)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--max-worlds", type=int, default=Budget().max_worlds)
        sp.add_argument("--max-steps", type=int, default=Budget().max_steps)
        sp.add_argument("--max-backtracks", type=int, default=Budget().max_backtracks)

    sp = sub.add_parser("prove", help="decide derivability")
    sp.add_argument("formula")
    sp.add_argument("--cert", help="write the countermodel certificate here")
    common(sp)
    sp.set_defaults(fn=cmd_prove)

    sp = sub.add_parser("sat", help="decide satisfiability")
    sp.add_argument("formula")
    sp.add_argument("--cert")
    common(sp)
    sp.set_defaults(fn=cmd_sat)

    sp = sub.add_parser("countermodel", help="countermodel of a non-theorem")
    sp.add_argument("formula")
    sp.add_argument("--cert")
    common(sp)
    sp.set_defaults(fn=cmd_countermodel)

    sp = sub.add_parser("modelcheck", help="validate a model file and evaluate a formula")
    sp.add_argument("model")
    sp.add_argument("formula", nargs="?")
    sp.add_argument("--world")
    common(sp)
    sp.set_defaults(fn=cmd_modelcheck)

    sp = sub.add_parser("close", help="close a frame file under the frame conditions")
    sp.add_argument("frame")
    common(sp)
    sp.set_defaults(fn=cmd_close)

    sp = sub.add_parser("checkproof", help="check a Hilbert proof file")
    sp.add_argument("proof")
    common(sp)
    sp.set_defaults(fn=cmd_checkproof)

    sp = sub.add_parser("classify", help="sentence classification")
    sp.add_argument("kind", choices=["sigma1", "delta1", "tsg", "selfprover", "almostloeb", "dagger"])
    sp.add_argument("formula")
    sp.add_argument("--cert")
    common(sp, logic=False)
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("rules", help="check an admissible-rule instance")
    sp.add_argument("rule", choices=list(RULES_CHOICES))
    sp.add_argument("formulas", nargs="+")
    common(sp, logic=False)
    sp.set_defaults(fn=cmd_rules)

    sp = sub.add_parser("export-dot", help="DOT rendering of a model file")
    sp.add_argument("model")
    sp.add_argument("--json", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(fn=cmd_export_dot)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return _USAGE if e.code not in (0,) else 0
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return _USAGE
    except (OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return _USAGE


if __name__ == "__main__":
    sys.exit(main())
