"""Sentence classification over the decision engine.

Admissible-rule checking, the two-point classification of essentially
Delta_1 sentences, the essentially Sigma_1 test via the fresh-variable
reduction (with best-effort witness extraction), self-provers, trivial
self-prover generators and their modal disjunctive decompositions, the
almost-Löb classification of f & []~f, and the two-sided check relating
Sigma-ness of f & []f, f & []~f and f.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .construction import (
    LabeledFrame,
    close,
    quasi_frame_violations,
    refresh_worklist,
    verify_truth_lemma,
)
from .decide import (
    Budget,
    DEFAULT_BUDGET,
    Derivable,
    Refuted,
    Unknown,
    Verdict,
    complete_frame,
    derivable,
)
from .semantics import ILM, VeltmanModel, forces, model_to_dict, validate_ilm
from .syntax import (
    And,
    BOT,
    Box,
    Diamond,
    Formula,
    Iff,
    Implies,
    Neg,
    Or,
    Rhd,
    Top,
    adequate_closure,
    conj,
    disj,
    fresh_atoms,
    is_neg,
    modal_atoms_of,
    render,
    subformulas,
)
from .theory import common_predecessor, search_preference, solve_theories


def _kind(v: Verdict) -> str:
    return v.kind


def _holds(v: Verdict) -> bool | None:
    if isinstance(v, Derivable):
        return True
    if isinstance(v, Refuted):
        return False
    return None


def _and3(a, b):
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


def _or3(a, b):
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return None


def _impl3(a, b):
    if a is False or b is True:
        return True
    if a is True and b is False:
        return False
    return None


# --- admissible rules ---------------------------------------------------------


RULES = ("i", "ii", "iii", "iv", "v", "vi", "vii")


@dataclass(frozen=True)
class RuleReport:
    rule: str
    lhs: tuple[Verdict, ...]
    rhs: tuple[Verdict, ...]
    side: tuple[Verdict, ...]
    agree: bool | None

    def to_dict(self):
        return {
            "rule": self.rule,
            "lhs": [v.kind for v in self.lhs],
            "rhs": [v.kind for v in self.rhs],
            "side": [v.kind for v in self.side],
            "agree": self.agree,
        }


def check_rule(rule: str, instance, budget: Budget = DEFAULT_BUDGET) -> RuleReport:
    """Decide both sides of an admissibility equivalence on one instance.

    Instances: i/vi/vii take one formula A; ii/iii/iv take (A, B); v takes
    (list of A_i, A, B) and carries the side conditions that each A_i is
    consistent.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    side: list[Verdict] = []
    if rule == "i":
        (a,) = instance
        lhs = [Box(a)]
        rhs = [a]
        rhs_mode = "all"
    elif rule == "ii":
        a, b = instance
        lhs = [Or(Box(a), Box(b))]
        rhs = [Box(a), Box(b)]
        rhs_mode = "any"
    elif rule == "iii":
        a, b = instance
        lhs = [Rhd(a, b)]
        rhs = [Implies(a, Or(b, Diamond(b)))]
        rhs_mode = "all"
    elif rule == "iv":
        a, b = instance
        lhs = [Rhd(a, b)]
        rhs = [Implies(Diamond(a), Diamond(b))]
        rhs_mode = "all"
    elif rule == "v":
        ais, a, b = instance
        if not ais:
            raise ValueError("rule v needs at least one side formula")
        lhs = [Implies(conj([Diamond(ai) for ai in ais]), Rhd(a, b))]
        rhs = [Rhd(a, b)]
        rhs_mode = "all"
        side = [derivable(ILM, Neg(ai), budget) for ai in ais]
    elif rule == "vi":
        (a,) = instance
        lhs = [Or(a, Diamond(a))]
        rhs = [Implies(Box(BOT), a)]
        rhs_mode = "all"
    else:  # vii
        (a,) = instance
        lhs = [Rhd(Top(), a)]
        rhs = [Implies(Box(BOT), a)]
        rhs_mode = "all"

    lhs_v = tuple(derivable(ILM, f, budget) for f in lhs)
    rhs_v = tuple(derivable(ILM, f, budget) for f in rhs)
    agree: bool | None
    if side and any(_holds(v) is not False for v in side):
        # some A_i is provably inconsistent (or undecided): rule not applicable
        agree = None
    else:
        l = _holds(lhs_v[0])
        if rhs_mode == "any":
            r: bool | None = False
            for v in rhs_v:
                r = _or3(r, _holds(v))
        else:
            r = _holds(rhs_v[0])
        agree = None if (l is None or r is None) else (l == r)
    return RuleReport(rule, lhs_v, tuple(rhs_v), tuple(side), agree)


# --- essentially Delta_1 --------------------------------------------------------


@dataclass(frozen=True)
class Delta1Report:
    answer: str  # "top" | "bottom" | "no" | "unknown"
    top_verdict: Verdict
    bottom_verdict: Verdict
    cross_verdict: Verdict
    cross_agrees: bool | None

    def to_dict(self):
        return {
            "answer": self.answer,
            "top": self.top_verdict.kind,
            "bottom": self.bottom_verdict.kind,
            "cross": self.cross_verdict.kind,
            "cross_agrees": self.cross_agrees,
        }


def classify_delta1(f: Formula, budget: Budget = DEFAULT_BUDGET) -> Delta1Report:
    """Top iff f is derivable, Bottom iff ~f is, No if both are certified
    refutable. The disjunction-of-boxes route ([]f | []~f derivable) is
    computed as a cross-check."""
    t = derivable(ILM, f, budget)
    b = derivable(ILM, Neg(f), budget)
    cross = derivable(ILM, Or(Box(f), Box(Neg(f))), budget)
    if isinstance(t, Derivable):
        answer = "top"
    elif isinstance(b, Derivable):
        answer = "bottom"
    elif isinstance(t, Refuted) and isinstance(b, Refuted):
        answer = "no"
    else:
        answer = "unknown"
    ch = _holds(cross)
    agrees = None if (ch is None or answer == "unknown") else ch == (answer in ("top", "bottom"))
    return Delta1Report(answer, t, b, cross, agrees)


# --- essentially Sigma_1 ---------------------------------------------------------


@dataclass(frozen=True)
class Sigma1Report:
    answer: str  # "yes" | "no" | "unknown"
    reduction_query: Formula
    fresh: tuple[Formula, Formula]
    verdict: Verdict
    witness: Formula | None = None
    witness_note: str = ""
    countermodel: tuple[VeltmanModel, str] | None = None

    def to_dict(self):
        out = {
            "answer": self.answer,
            "reduction_query": render(self.reduction_query),
            "fresh": [render(self.fresh[0]), render(self.fresh[1])],
            "verdict": self.verdict.kind,
            "witness": render(self.witness) if self.witness is not None else None,
            "witness_note": self.witness_note,
        }
        if self.countermodel is not None:
            out["countermodel"] = model_to_dict(self.countermodel[0])
            out["countermodel_world"] = self.countermodel[1]
        return out


def sigma1_reduction_query(f: Formula) -> tuple[Formula, Formula, Formula]:
    p, q = fresh_atoms(f, 2)
    return Implies(Rhd(p, q), Rhd(And(p, f), And(q, f))), p, q


def _is_box_disjunction(f: Formula) -> bool:
    if f == BOT or isinstance(f, Box):
        return True
    if isinstance(f, Implies) and is_neg(f.left):  # expanded a | b
        return _is_box_disjunction(f.left.left) and _is_box_disjunction(f.right)
    return False


def _witness_candidates(f: Formula, cap: int) -> list[Formula]:
    subs = sorted(subformulas(f), key=lambda g: g.key())
    base = [Top(), BOT] + subs + [Neg(s) for s in subs if not is_neg(s)]
    seen: dict[Formula, None] = {}
    for b in base:
        seen.setdefault(b, None)
    pool = list(seen)
    cands: list[Formula] = [BOT]
    cands += [Box(b) for b in pool]
    cands += [Box(And(a, b)) for a, b in itertools.combinations(pool, 2)]
    cands += [Or(Box(a), Box(b)) for a, b in itertools.combinations(pool, 2)]
    return cands[:cap]


def classify_sigma1(
    f: Formula, budget: Budget = DEFAULT_BUDGET, witness_cap: int = 400
) -> Sigma1Report:
    """yes iff the fresh-variable reduction query is derivable; on yes a
    disjunction-of-boxes equivalent is searched for (best effort, bounded);
    on no the engine's countermodel of the query is attached."""
    query, p, q = sigma1_reduction_query(f)
    v = derivable(ILM, query, budget)
    if isinstance(v, Refuted):
        return Sigma1Report("no", query, (p, q), v, countermodel=(v.model, v.world))
    if isinstance(v, Unknown):
        return Sigma1Report("unknown", query, (p, q), v)
    if _is_box_disjunction(f):
        return Sigma1Report("yes", query, (p, q), v, witness=f, witness_note="syntactic")
    for cand in _witness_candidates(f, witness_cap):
        w = derivable(ILM, Iff(f, cand), budget)
        if isinstance(w, Derivable):
            return Sigma1Report("yes", query, (p, q), v, witness=cand, witness_note="certified")
    return Sigma1Report(
        "yes", query, (p, q), v, witness=None, witness_note="witness not found within bound"
    )


class Sigma1CountermodelError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sigma1Countermodel:
    model: VeltmanModel
    world: str
    fresh: tuple[Formula, Formula]
    query: Formula


def sigma1_countermodel(
    f: Formula, budget: Budget = DEFAULT_BUDGET
) -> Sigma1Countermodel:
    """Build the seeded three-world countermodel for a non-Sigma_1 formula:
    a root below worlds l (with f) and r (with ~f and l's boxes), l S r at
    the root, completed by the construction with the root exempt from the
    box-growth invariant, then decorated with the two fresh atoms."""
    D = adequate_closure([f])
    query, p, q = sigma1_reduction_query(f)
    pre = derivable(ILM, query, budget)
    if isinstance(pre, Derivable):
        raise ValueError("formula is essentially Sigma_1; no countermodel exists")

    d0s = sorted(solve_theories(D, ILM, [(f, True)]), key=search_preference)
    for d0 in d0s:
        d1_cs = [(f, False)] + [(b, True) for b in d0.boxes()]
        for d1 in sorted(solve_theories(D, ILM, d1_cs), key=search_preference):
            for gamma in common_predecessor(d0, d1):
                frame = LabeledFrame(D, ILM)
                frame.worlds = ["m0", "l", "r"]
                frame.nu = {"m0": gamma, "l": d0, "r": d1}
                frame.obligations = {w: frozenset() for w in frame.worlds}
                frame.R = {("m0", "l"), ("m0", "r")}
                frame.S = {("m0", "l", "r")}
                frame.exempt_root = "m0"
                frame = close(frame)
                if quasi_frame_violations(frame):
                    continue
                refresh_worklist(frame)
                found, st = complete_frame(frame, budget)
                if found is None:
                    if st.cut:
                        raise Sigma1CountermodelError(
                            f"budget exhausted while completing the seed: {st.report()}"
                        )
                    continue
                base = found.to_model()
                if not verify_truth_lemma(base, found.nu, D):
                    continue
                val = dict(base.val)
                val["l"] = val["l"] | {p.name}
                val["r"] = val["r"] | {q.name}
                model = VeltmanModel(base.frame, val)
                if not validate_ilm(model.frame).ok:
                    continue
                if forces(model, "m0", query):
                    continue
                return Sigma1Countermodel(model, "m0", (p, q), query)
    raise Sigma1CountermodelError(
        "no realizable theory pair (f in d0, boxes of d0 in d1, ~f in d1) "
        "completes to a certified model"
    )


# --- self provers and t.s.g.'s ---------------------------------------------------


def is_self_prover(f: Formula, budget: Budget = DEFAULT_BUDGET, logic: str = ILM) -> Verdict:
    """Does f imply its own provability?"""
    return derivable(logic, Implies(f, Box(f)), budget)


def is_tsg(f: Formula, budget: Budget = DEFAULT_BUDGET) -> Sigma1Report:
    """Is the generated self-prover f & []f essentially Sigma_1?"""
    return classify_sigma1(And(f, Box(f)), budget)


@dataclass(frozen=True)
class TsgDecomposition:
    """Modal disjunctive shape: disjuncts (phi_l, A_l) with phi_l a tuple of
    literals and diamond-style literals and A_l the merged box body, plus
    pure box disjuncts C_m."""

    conjuncts: tuple[tuple[tuple[Formula, ...], Formula], ...]
    boxes: tuple[Formula, ...]
    flags: tuple[str, ...]

    def formula(self) -> Formula:
        parts = [conj(list(phi) + [Box(a)]) for phi, a in self.conjuncts]
        parts += [Box(c) for c in self.boxes]
        return disj(parts)

    def box_part(self) -> Formula:
        return disj([Box(c) for c in self.boxes])

    def to_dict(self):
        return {
            "conjuncts": [
                {"phi": [render(x) for x in phi], "box_body": render(a)}
                for phi, a in self.conjuncts
            ],
            "boxes": [render(c) for c in self.boxes],
            "flags": list(self.flags),
        }


def _prime_implicants(n_atoms: int, minterms: list[int]) -> list[tuple[int, int]]:
    """Quine-McCluskey merge; implicants as (value, mask) with mask bits 1
    where the atom is fixed."""
    full = (1 << n_atoms) - 1
    level = {(m, full) for m in minterms}
    primes: set[tuple[int, int]] = set()
    while level:
        merged: set[tuple[int, int]] = set()
        used: set[tuple[int, int]] = set()
        items = sorted(level)
        for i, (v1, m1) in enumerate(items):
            for v2, m2 in items[i + 1 :]:
                if m1 != m2:
                    continue
                diff = v1 ^ v2
                if diff and (diff & (diff - 1)) == 0:
                    merged.add((v1 & ~diff, m1 & ~diff))
                    used.add((v1, m1))
                    used.add((v2, m2))
        primes |= level - used
        level = merged
    return sorted(primes)


def _covers(imp: tuple[int, int], m: int) -> bool:
    v, mask = imp
    return (m & mask) == (v & mask)


def _min_cover(primes, minterms) -> list[tuple[int, int]]:
    remaining = set(minterms)
    chosen: list[tuple[int, int]] = []
    # essential primes first
    for m in sorted(remaining):
        hits = [p for p in primes if _covers(p, m)]
        if len(hits) == 1 and hits[0] not in chosen:
            chosen.append(hits[0])
    for p in chosen:
        remaining -= {m for m in remaining if _covers(p, m)}
    while remaining:
        best = max(
            primes,
            key=lambda p: (len({m for m in remaining if _covers(p, m)}), -p[1], -p[0]),
        )
        got = {m for m in remaining if _covers(best, m)}
        if not got:  # pragma: no cover
            break
        chosen.append(best)
        remaining -= got
    return chosen


def canonical_modal_dnf(f: Formula, max_atoms: int = 14) -> TsgDecomposition:
    """Reduced disjunctive normal form over the modal atoms of f, with the
    positive boxes of each disjunct merged into one box. Disjuncts that
    cannot fit the required shape are flagged, not repaired."""
    atoms = sorted(modal_atoms_of(f), key=lambda g: g.key())
    if len(atoms) > max_atoms:
        raise ValueError(f"too many modal atoms ({len(atoms)})")
    from .syntax import eval_bool

    minterms = []
    for bits in range(1 << len(atoms)):
        assign = {a: bool(bits >> i & 1) for i, a in enumerate(atoms)}
        if eval_bool(f, assign):
            minterms.append(bits)
    if not minterms:
        return TsgDecomposition((), (), ())
    primes = _prime_implicants(len(atoms), minterms)
    cover = _min_cover(primes, minterms)
    conjuncts = []
    boxes = []
    flags: list[str] = []
    for v, mask in sorted(cover):
        pos_boxes: list[Formula] = []
        lits: list[Formula] = []
        for i, a in enumerate(atoms):
            if not (mask >> i) & 1:
                continue
            positive = bool((v >> i) & 1)
            if isinstance(a, Box) and positive:
                pos_boxes.append(a.body)
            else:
                lits.append(a if positive else Neg(a))
                if isinstance(a, Rhd):
                    flags.append(f"rhd literal in a disjunct: {render(a)}")
        if not lits and not pos_boxes:
            flags.append("empty disjunct (formula has a tautological case)")
            conjuncts.append(((), Top()))
        elif not lits:
            boxes.append(conj(pos_boxes))
        else:
            conjuncts.append((tuple(lits), conj(pos_boxes) if pos_boxes else Top()))
    return TsgDecomposition(tuple(conjuncts), tuple(boxes), tuple(dict.fromkeys(flags)))


@dataclass(frozen=True)
class TsgReport:
    equivalent: Verdict
    irredundant: tuple[Verdict, ...]
    shape_flags: tuple[str, ...]
    conclusion: Verdict

    @property
    def conditions_ok(self) -> bool | None:
        c1 = _holds(self.equivalent)
        c2: bool | None = True
        for v in self.irredundant:
            c2 = _and3(c2, None if _holds(v) is None else not _holds(v))
        c3 = not self.shape_flags
        return _and3(_and3(c1, c2), c3)

    def to_dict(self):
        return {
            "equivalent": self.equivalent.kind,
            "irredundant": [v.kind for v in self.irredundant],
            "shape_flags": list(self.shape_flags),
            "conditions_ok": self.conditions_ok,
            "conclusion": self.conclusion.kind,
        }


def check_tsg_decomposition(
    f: Formula, d: TsgDecomposition, budget: Budget = DEFAULT_BUDGET
) -> TsgReport:
    """Verify the three decomposition conditions against the engine, then
    decide whether f & []f is equivalent to the pure box part."""
    equivalent = derivable(ILM, Iff(f, d.formula()), budget)
    irredundant = tuple(
        derivable(ILM, Implies(Box(a), f), budget) for _, a in d.conjuncts
    )
    conclusion = derivable(ILM, Iff(And(f, Box(f)), d.box_part()), budget)
    return TsgReport(equivalent, irredundant, d.flags, conclusion)


# --- almost-Löb and the two-sided check ------------------------------------------


@dataclass(frozen=True)
class AlmostLoebReport:
    witness: str | None  # "boxbot" | "bottom" | None | "unknown"
    boxbot_verdict: Verdict
    bottom_verdict: Verdict
    certificate: Verdict | None

    def to_dict(self):
        return {
            "witness": self.witness,
            "boxbot": self.boxbot_verdict.kind,
            "bottom": self.bottom_verdict.kind,
            "certificate": self.certificate.kind if self.certificate else None,
        }


def almost_loeb(f: Formula, budget: Budget = DEFAULT_BUDGET) -> AlmostLoebReport:
    """f & []~f is a disjunction of boxes iff []bot -> f or ~f is derivable;
    the matching equivalence ([]bot or bot) is certified alongside."""
    vb = derivable(ILM, Implies(Box(BOT), f), budget)
    vn = derivable(ILM, Neg(f), budget)
    core = And(f, Box(Neg(f)))
    if isinstance(vn, Derivable):
        cert = derivable(ILM, Iff(core, BOT), budget)
        return AlmostLoebReport("bottom", vb, vn, cert)
    if isinstance(vb, Derivable):
        cert = derivable(ILM, Iff(core, Box(BOT)), budget)
        return AlmostLoebReport("boxbot", vb, vn, cert)
    if isinstance(vb, Refuted) and isinstance(vn, Refuted):
        return AlmostLoebReport(None, vb, vn, None)
    return AlmostLoebReport("unknown", vb, vn, None)


@dataclass(frozen=True)
class DaggerReport:
    sigma_selfprover: Sigma1Report  # f & []f
    sigma_antiprover: Sigma1Report  # f & []~f
    sigma_f: Sigma1Report
    escape_verdict: Verdict  # f -> <>top
    dagger_holds: bool | None
    biconditional_ok: bool | None

    def to_dict(self):
        return {
            "sigma_f_and_box_f": self.sigma_selfprover.answer,
            "sigma_f_and_box_not_f": self.sigma_antiprover.answer,
            "sigma_f": self.sigma_f.answer,
            "f_implies_diamond_top": self.escape_verdict.kind,
            "dagger_holds": self.dagger_holds,
            "biconditional_ok": self.biconditional_ok,
        }


def _answer3(rep: Sigma1Report) -> bool | None:
    return {"yes": True, "no": False}.get(rep.answer)


def dagger_check(f: Formula, budget: Budget = DEFAULT_BUDGET) -> DaggerReport:
    """Compute Sigma(f & []f), Sigma(f & []~f), Sigma(f) and f -> <>top, and
    check that [Sigma(f&[]f) and Sigma(f&[]~f) => Sigma(f)] holds exactly
    when [Sigma(f&[]f) => Sigma(f)] or f -> <>top is derivable."""
    s1 = classify_sigma1(And(f, Box(f)), budget)
    s2 = classify_sigma1(And(f, Box(Neg(f))), budget)
    s3 = classify_sigma1(f, budget)
    esc = derivable(ILM, Implies(f, Diamond(Top())), budget)
    a1, a2, a3 = _answer3(s1), _answer3(s2), _answer3(s3)
    dagger = _impl3(_and3(a1, a2), a3)
    rhs = _or3(_impl3(a1, a3), _holds(esc))
    bic = None if (dagger is None or rhs is None) else dagger == rhs
    return DaggerReport(s1, s2, s3, esc, dagger, bic)
