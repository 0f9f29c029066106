"""Decision engine for GL, IL and ILM, plus a Hilbert-style proof checker.

Satisfiability is decided by the model construction: seed a root theory
containing the query, repeatedly eliminate problems and deficiencies with
closure and invariant checking in between, backtrack over all candidate
extensions, and certify any finished model with an independent truth-lemma
and forcing re-check. Derivability is the complement of certified
satisfiability of the negation. Searches that hit a budget limit are
reported as Unknown, never converted into an answer.
"""

from __future__ import annotations

import itertools
import re
import sys
from dataclasses import dataclass

from .construction import (
    LabeledFrame,
    eliminate,
    fresh_candidate_theories,
    seed_frame,
    quasi_frame_violations,
    verify_truth_lemma,
)
from .semantics import (
    GL,
    IL,
    ILM,
    VeltmanModel,
    check_logic,
    forces,
    validate,
)
from .syntax import (
    And,
    BOT,
    Box,
    Diamond,
    Formula,
    Implies,
    Neg,
    Or,
    Rhd,
    is_neg,
    is_rhd_free,
    modal_atoms_of,
    parse,
    render,
)
from .theory import enumerate_theories, search_preference


@dataclass(frozen=True)
class Budget:
    max_worlds: int = 16
    max_steps: int = 2500
    max_backtracks: int = 8000


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class Sat:
    model: VeltmanModel
    world: str


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Exhausted:
    report: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Derivable:
    proof: "Proof | None" = None

    kind = "derivable"


@dataclass(frozen=True)
class Refuted:
    model: VeltmanModel
    world: str

    kind = "refuted"


@dataclass(frozen=True)
class Unknown:
    report: tuple[tuple[str, int], ...]

    kind = "unknown"


Verdict = Derivable | Refuted | Unknown


class _State:
    __slots__ = ("budget", "steps", "backtracks", "cut", "observer")

    def __init__(self, budget: Budget, observer=None):
        self.budget = budget
        self.steps = 0
        self.backtracks = 0
        self.cut = False
        self.observer = observer

    def report(self):
        return (
            ("steps", self.steps),
            ("backtracks", self.backtracks),
            ("max_worlds", self.budget.max_worlds),
            ("max_steps", self.budget.max_steps),
            ("max_backtracks", self.budget.max_backtracks),
        )


def _engine_logic(logic: str) -> str:
    check_logic(logic)
    return ILM if logic == GL else logic


def _search(frame: LabeledFrame, st: _State) -> LabeledFrame | None:
    if not frame.worklist:
        model = frame.to_model()
        if verify_truth_lemma(model, frame.nu, frame.adequate):
            return frame
        return None
    if st.steps >= st.budget.max_steps:
        st.cut = True
        return None
    # most-constrained item first; an item with no candidate theory can
    # never be eliminated on any extension, so the frame is dead
    best = None
    for pos, it in enumerate(frame.worklist):
        n = len(fresh_candidate_theories(frame, it))
        if n == 0:
            return None
        if best is None or n < best[0]:
            best = (n, pos, it)
    item = best[2]
    for cand in eliminate(frame, item, st):
        st.steps += 1
        if st.observer is not None:
            st.observer("eliminated", item, cand)
        found = _search(cand, st)
        if found is not None:
            return found
        st.backtracks += 1
        if st.backtracks >= st.budget.max_backtracks:
            st.cut = True
            return None
        if st.steps >= st.budget.max_steps:
            st.cut = True
            return None
    return None


_sat_cache: dict[tuple[str, Formula, Budget], Sat | Unsat | Exhausted] = {}


def satisfiable(
    logic: str, f: Formula, budget: Budget = DEFAULT_BUDGET, observer=None
) -> Sat | Unsat | Exhausted:
    """Search for a certified finite model of f.

    Sat carries a model and world that pass frame validation, a forcing
    check and the truth lemma. Unsat means the whole backtracking space was
    exhausted within the budget; Exhausted means a limit cut the search.
    """
    check_logic(logic)
    if logic == GL and not is_rhd_free(f):
        raise ValueError("GL queries must not contain |>")
    key = (logic, f, budget)
    if observer is None:
        got = _sat_cache.get(key)
        if got is not None:
            return got
    eng = _engine_logic(logic)
    from .syntax import adequate_closure

    # one _search level per elimination step, a handful of Python frames each
    need = 20 * budget.max_steps + 1000
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)
    D = adequate_closure([f])
    st = _State(budget, observer)
    result: Sat | Unsat | Exhausted | None = None
    roots = sorted(enumerate_theories(D, include=[f], logic=eng), key=search_preference)
    for root in roots:
        frame = seed_frame(D, eng, root)
        if quasi_frame_violations(frame):
            continue
        if observer is not None:
            observer("root", None, frame)
        found = _search(frame, st)
        if found is not None:
            model = found.to_model()
            world = found.worlds[0]
            if not _certify(logic, model, world, f, found):
                continue
            result = Sat(model, world)
            break
        if st.cut:
            break
    if result is None:
        result = Exhausted(st.report()) if st.cut else Unsat()
    if observer is None:
        _sat_cache[key] = result
    return result


def complete_frame(
    frame: LabeledFrame, budget: Budget = DEFAULT_BUDGET, observer=None
) -> tuple[LabeledFrame | None, "_State"]:
    """Run the elimination search from a prepared labeled frame; returns the
    finished frame (or None) and the search state with its counters."""
    st = _State(budget, observer)
    found = _search(frame, st)
    return found, st


def _certify(logic: str, model: VeltmanModel, world: str, f: Formula, frame) -> bool:
    rep = validate(model.frame, ILM if logic == GL else logic)
    if not rep.ok:
        return False
    if not forces(model, world, f):
        return False
    return verify_truth_lemma(model, frame.nu, frame.adequate)


def derivable(logic: str, f: Formula, budget: Budget = DEFAULT_BUDGET) -> Verdict:
    """Refuted iff the negation has a certified model (attached); Derivable
    iff that search is exhausted; Unknown on a budget cut."""
    check_logic(logic)
    if logic == GL and not is_rhd_free(f):
        raise ValueError("GL queries must not contain |>")
    res = satisfiable(logic, Neg(f), budget)
    if isinstance(res, Sat):
        return Refuted(res.model, res.world)
    if isinstance(res, Unsat):
        return Derivable()
    return Unknown(res.report)


def countermodel(logic: str, f: Formula, budget: Budget = DEFAULT_BUDGET):
    """The certificate of a Refuted verdict, as (model, world)."""
    v = derivable(logic, f, budget)
    if not isinstance(v, Refuted):
        raise ValueError(f"no countermodel: verdict is {v.kind}")
    return v.model, v.world


# --- axiom schemata -----------------------------------------------------------


def axiom_instance(name: str, *args: Formula) -> Formula:
    """Build a schema instance; args are the substituted formulas."""
    if name == "L1":
        a, b = args
        return Implies(Box(Implies(a, b)), Implies(Box(a), Box(b)))
    if name == "L2":
        (a,) = args
        return Implies(Box(a), Box(Box(a)))
    if name == "L3":
        (a,) = args
        return Implies(Box(Implies(Box(a), a)), Box(a))
    if name == "J1":
        a, b = args
        return Implies(Box(Implies(a, b)), Rhd(a, b))
    if name == "J2":
        a, b, c = args
        return Implies(And(Rhd(a, b), Rhd(b, c)), Rhd(a, c))
    if name == "J3":
        a, b, c = args
        return Implies(And(Rhd(a, c), Rhd(b, c)), Rhd(Or(a, b), c))
    if name == "J4":
        a, b = args
        return Implies(Rhd(a, b), Implies(Diamond(a), Diamond(b)))
    if name == "J5":
        (a,) = args
        return Rhd(Diamond(a), a)
    if name == "M":
        a, b, c = args
        return Implies(Rhd(a, b), Rhd(And(a, Box(c)), And(b, Box(c))))
    raise ValueError(f"unknown schema {name!r}")


SCHEMATA = ("L1", "L2", "L3", "J1", "J2", "J3", "J4", "J5", "M")
_ARITY = {"L1": 2, "L2": 1, "L3": 1, "J1": 2, "J2": 3, "J3": 3, "J4": 2, "J5": 1, "M": 3}


def _and_parts(f: Formula):
    if (
        isinstance(f, Implies)
        and f.right == BOT
        and isinstance(f.left, Implies)
        and is_neg(f.left.right)
    ):
        return f.left.left, f.left.right.left
    return None


def _diamond_body(f: Formula):
    if is_neg(f) and isinstance(f.left, Box) and is_neg(f.left.body):
        return f.left.body.left
    return None


def _match_schema(name: str, f: Formula) -> bool:
    try:
        if name == "L1":
            assert isinstance(f, Implies) and isinstance(f.left, Box)
            body = f.left.body
            assert isinstance(body, Implies)
            return f == axiom_instance("L1", body.left, body.right)
        if name == "L2":
            assert isinstance(f, Implies) and isinstance(f.left, Box)
            return f == axiom_instance("L2", f.left.body)
        if name == "L3":
            assert isinstance(f, Implies) and isinstance(f.left, Box)
            body = f.left.body
            assert isinstance(body, Implies) and isinstance(body.left, Box)
            return f == axiom_instance("L3", body.right)
        if name == "J1":
            assert isinstance(f, Implies) and isinstance(f.right, Rhd)
            return f == axiom_instance("J1", f.right.left, f.right.right)
        if name == "J2":
            assert isinstance(f, Implies) and isinstance(f.right, Rhd)
            parts = _and_parts(f.left)
            assert parts is not None and isinstance(parts[0], Rhd)
            return f == axiom_instance(
                "J2", parts[0].left, parts[0].right, f.right.right
            )
        if name == "J3":
            assert isinstance(f, Implies) and isinstance(f.right, Rhd)
            parts = _and_parts(f.left)
            assert parts is not None and isinstance(parts[0], Rhd) and isinstance(parts[1], Rhd)
            return f == axiom_instance(
                "J3", parts[0].left, parts[1].left, parts[0].right
            )
        if name == "J4":
            assert isinstance(f, Implies) and isinstance(f.left, Rhd)
            return f == axiom_instance("J4", f.left.left, f.left.right)
        if name == "J5":
            assert isinstance(f, Rhd)
            return f == axiom_instance("J5", f.right)
        if name == "M":
            assert isinstance(f, Implies) and isinstance(f.left, Rhd)
            assert isinstance(f.right, Rhd)
            parts = _and_parts(f.right.left)
            assert parts is not None and isinstance(parts[1], Box)
            return f == axiom_instance(
                "M", f.left.left, f.left.right, parts[1].body
            )
    except AssertionError:
        return False
    return False


def is_tautology(f: Formula, limit: int = 1 << 18) -> bool:
    """Propositional tautology over the modal atoms of f."""
    atoms = sorted(modal_atoms_of(f), key=lambda g: g.key())
    if 2 ** len(atoms) > limit:
        raise ValueError(f"too many modal atoms ({len(atoms)})")
    from .syntax import eval_bool

    for bits in itertools.product((False, True), repeat=len(atoms)):
        if not eval_bool(f, dict(zip(atoms, bits))):
            return False
    return True


# --- proofs ---------------------------------------------------------------------


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    rule: str
    premises: tuple[int, ...] = ()


@dataclass(frozen=True)
class Proof:
    lines: tuple[ProofLine, ...]

    @property
    def conclusion(self) -> Formula:
        return self.lines[-1].formula


_GL_RULES = {"Taut", "L1", "L2", "L3", "MP", "Nec"}
_IL_RULES = _GL_RULES | {"J1", "J2", "J3", "J4", "J5"}
_ILM_RULES = _IL_RULES | {"M"}


def check_proof(proof: Proof, logic: str) -> bool:
    """Every line a valid schema instance or rule application, with the
    axioms gated by the logic. GL proofs must stay rhd-free."""
    check_logic(logic)
    allowed = {GL: _GL_RULES, IL: _IL_RULES, ILM: _ILM_RULES}[logic]
    for i, line in enumerate(proof.lines):
        for k in line.premises:
            if not (1 <= k <= i):
                raise ValueError(f"line {i + 1}: bad premise index {k}")
        if line.rule not in allowed:
            return False
        if logic == GL and not is_rhd_free(line.formula):
            return False
        if line.rule == "Taut":
            if not is_tautology(line.formula):
                return False
        elif line.rule == "MP":
            if len(line.premises) != 2:
                raise ValueError(f"line {i + 1}: MP needs two premises")
            imp = proof.lines[line.premises[0] - 1].formula
            ante = proof.lines[line.premises[1] - 1].formula
            if not (isinstance(imp, Implies) and imp.left == ante and imp.right == line.formula):
                return False
        elif line.rule == "Nec":
            if len(line.premises) != 1:
                raise ValueError(f"line {i + 1}: Nec needs one premise")
            prem = proof.lines[line.premises[0] - 1].formula
            if line.formula != Box(prem):
                return False
        else:
            if not _match_schema(line.rule, line.formula):
                return False
    return True


_LINE_RE = re.compile(r"\s*(\d+)\.\s*(.*?)\s*;\s*(\w+)\s*((?:\d+\s*)*)\s*$")


def parse_proof(text: str) -> Proof:
    """One line per step: `<index>. <formula> ; <rule>[ <premise indices>]`."""
    lines: list[ProofLine] = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        m = _LINE_RE.match(raw)
        if not m:
            raise ValueError(f"bad proof line: {raw!r}")
        idx, formula, rule, prems = m.groups()
        if int(idx) != len(lines) + 1:
            raise ValueError(f"line numbered {idx}, expected {len(lines) + 1}")
        lines.append(
            ProofLine(parse(formula), rule, tuple(int(t) for t in prems.split()))
        )
    return Proof(tuple(lines))


def render_proof(proof: Proof) -> str:
    out = []
    for i, line in enumerate(proof.lines, start=1):
        prems = (" " + " ".join(str(k) for k in line.premises)) if line.premises else ""
        out.append(f"{i}. {render(line.formula)} ; {line.rule}{prems}")
    return "\n".join(out) + "\n"
