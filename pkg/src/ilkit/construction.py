"""Labeled frames and the model construction machinery.

The working state of a decision run is a labeled frame: worlds carrying
DTheories, R-edges optionally carrying a criticality formula, and worlds
carrying successor obligations (formulas every later world must satisfy;
these stand in for boxed formulas that live outside the adequate set).

The construction alternates two moves until no requirement is left open:

  * eliminate a problem (a false rhd or box member needing a witness) or a
    deficiency (an unanswered rhd member needing an S-exit), by reusing an
    existing world or attaching a fresh one, then
  * close the frame under the frame conditions (imperfection elimination).

Every candidate extension is re-validated against the quasi-frame
invariants; invalid candidates are dropped, which is what drives
backtracking in the decision engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .semantics import IL, ILM, VeltmanFrame, VeltmanModel, _Forcer, check_logic
from .syntax import (
    AdequateSet,
    Atom,
    BOT,
    Box,
    Formula,
    Neg,
    Rhd,
    render,
    single_neg,
)
from .theory import (
    DTheory,
    box_incl,
    crit_obligations,
    crit_succ,
    extend_deficiency_il,
    extend_deficiency_ilm,
    extend_problem,
    search_preference,
    solve_theories,
    succ,
)


@dataclass(frozen=True)
class Problem:
    """A world whose theory makes a rhd or box formula false without a
    witness for the failure."""

    world: str
    formula: Formula  # ~(A |> B) or ~[]A

    def key(self, order: dict[str, int]):
        return (0, order[self.world], "", self.formula.key())


@dataclass(frozen=True)
class Deficiency:
    """An rhd member C |> D of x, a successor y carrying C, and no S_x exit
    from y to a D world."""

    x: str
    y: str
    formula: Rhd

    def key(self, order: dict[str, int]):
        return (1, order[self.x], self.y, self.formula.key())


@dataclass(frozen=True)
class Imperfection:
    """A local violation of a frame closure condition.

    kind 0: aRbRc without aRc        (payload a, b, c)
    kind 1: aRb without bS_ab        (payload a, b)
    kind 2: bS_acS_ad without bS_ad  (payload a, b, c, d)
    kind 3: aRbRc without bS_ac      (payload a, b, c)
    kind 4: bS_acRd without bRd      (payload a, b, c, d)  [ILM only]
    """

    kind: int
    payload: tuple[str, ...]


class LabeledFrame:
    """Mutable working frame; value-semantic copies back the search."""

    def __init__(
        self,
        adequate: AdequateSet,
        logic: str,
        worlds: list[str] | None = None,
        R: set[tuple[str, str]] | None = None,
        S: set[tuple[str, str, str]] | None = None,
        nu: dict[str, DTheory] | None = None,
        edge_label: dict[tuple[str, str], Formula] | None = None,
        obligations: dict[str, frozenset[Formula]] | None = None,
        exempt_root: str | None = None,
    ):
        check_logic(logic)
        self.adequate = adequate
        self.logic = ILM if logic == "gl" else logic
        self.worlds = list(worlds or [])
        self.R = set(R or ())
        self.S = set(S or ())
        self.nu = dict(nu or {})
        self.edge_label = dict(edge_label or {})
        self.obligations = {w: frozenset(v) for w, v in (obligations or {}).items()}
        for w in self.worlds:
            self.obligations.setdefault(w, frozenset())
        self.exempt_root = exempt_root
        self.worklist: list = []

    def copy(self) -> "LabeledFrame":
        g = LabeledFrame.__new__(LabeledFrame)
        g.adequate = self.adequate
        g.logic = self.logic
        g.worlds = list(self.worlds)
        g.R = set(self.R)
        g.S = set(self.S)
        g.nu = dict(self.nu)
        g.edge_label = dict(self.edge_label)
        g.obligations = dict(self.obligations)
        g.exempt_root = self.exempt_root
        g.worklist = list(self.worklist)
        return g

    def order(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.worlds)}

    def add_world(self, theory: DTheory, obligations: Iterable[Formula] = ()) -> str:
        k = len(self.worlds)
        name = f"w{k}"
        while name in self.nu:
            k += 1
            name = f"w{k}"
        self.worlds.append(name)
        self.nu[name] = theory
        self.obligations[name] = frozenset(obligations)
        return name

    def successors(self, w: str) -> list[str]:
        return [y for y in self.worlds if (w, y) in self.R]

    def predecessors(self, w: str) -> list[str]:
        return [a for a in self.worlds if (a, w) in self.R]

    def effective_obligations(self, w: str) -> frozenset[Formula]:
        """Constraints on every R-successor of w: w's own obligations plus
        those of all its R-predecessors (R is kept transitive)."""
        out = set(self.obligations.get(w, ()))
        for a in self.worlds:
            if (a, w) in self.R:
                out |= self.obligations.get(a, frozenset())
        return frozenset(out)

    def effective_boxes(self, w: str) -> frozenset[Formula]:
        """Formulas boxed at w: bodies of box members plus all obligations
        in force at w."""
        out = {b.body for b in self.nu[w].boxes()}
        out |= self.effective_obligations(w)
        return frozenset(out)

    def labels_from(self, x: str) -> list[Formula]:
        seen = []
        for (a, b), lab in sorted(
            self.edge_label.items(), key=lambda kv: (kv[0], kv[1].key())
        ):
            if a == x and lab not in seen:
                seen.append(lab)
        return seen

    def to_frame(self) -> VeltmanFrame:
        return VeltmanFrame(frozenset(self.worlds), frozenset(self.R), frozenset(self.S))

    def to_model(self) -> VeltmanModel:
        val = {}
        for w in self.worlds:
            t = self.nu[w]
            val[w] = frozenset(
                a.name
                for a in self.adequate.modal_atoms
                if isinstance(a, Atom) and t.models(a)
            )
        return VeltmanModel(self.to_frame(), val)


def seed_frame(adequate: AdequateSet, logic: str, root_theory: DTheory) -> LabeledFrame:
    f = LabeledFrame(adequate, logic)
    f.add_world(root_theory)
    refresh_worklist(f)
    return f


# --- cones -------------------------------------------------------------------


def _lfp(seed: set[str], step) -> set[str]:
    out = set(seed)
    todo = list(seed)
    while todo:
        y = todo.pop()
        for z in step(y):
            if z not in out:
                out.add(z)
                todo.append(z)
    return out


def critical_cone(F: LabeledFrame, x: str, C: Formula) -> set[str]:
    """Worlds reached from a C-labeled edge of x via S_x and R steps."""
    seed = {y for ((a, y), lab) in F.edge_label.items() if a == x and lab == C}

    def step(y):
        for (a, b, c) in F.S:
            if a == x and b == y:
                yield c
        for (a, b) in F.R:
            if a == y:
                yield b

    return _lfp(seed, step)


def generalized_cone(F: LabeledFrame, x: str, C: Formula) -> set[str]:
    """The critical cone closed under S steps with arbitrary index."""
    seed = {y for ((a, y), lab) in F.edge_label.items() if a == x and lab == C}

    def step(y):
        for (a, b, c) in F.S:
            if b == y:
                yield c
        for (a, b) in F.R:
            if a == y:
                yield b

    return _lfp(seed, step)


def m_cone(F: LabeledFrame, x: str, A: Formula) -> set[str]:
    """Critical cone closed additionally under (S-path then R-step)."""
    seed = {y for ((a, y), lab) in F.edge_label.items() if a == x and lab == A}
    s_pair: dict[str, set[str]] = {}
    for (a, b, c) in F.S:
        s_pair.setdefault(b, set()).add(c)
    str_reach: dict[str, set[str]] = {}

    def s_reach(y):
        got = str_reach.get(y)
        if got is None:
            got = _lfp(set(s_pair.get(y, ())), lambda u: s_pair.get(u, ()))
            str_reach[y] = got
        return got

    def step(y):
        for (a, b) in F.R:
            if a == y:
                yield b
        for (a, b, c) in F.S:
            if a == x and b == y:
                yield c
        for u in s_reach(y):
            for (a, b) in F.R:
                if a == u:
                    yield b

    return _lfp(seed, step)


# --- imperfections and closure ----------------------------------------------


def find_imperfections(F, logic: str | None = None) -> list[Imperfection]:
    """All imperfections of kinds 0-3 (plus 4 under ILM), deterministically
    ordered. Accepts a labeled frame or a plain Veltman frame."""
    logic = check_logic(logic or getattr(F, "logic", IL))
    R, S = F.R, F.S
    succ_map: dict[str, set[str]] = {}
    for (a, b) in R:
        succ_map.setdefault(a, set()).add(b)
    s_index: dict[str, dict[str, set[str]]] = {}
    for (a, b, c) in S:
        s_index.setdefault(a, {}).setdefault(b, set()).add(c)
    out = []
    for (a, b) in R:
        for c in succ_map.get(b, ()):
            if (a, c) not in R:
                out.append(Imperfection(0, (a, b, c)))
    for (a, b) in R:
        if (a, b, b) not in S:
            out.append(Imperfection(1, (a, b)))
    for a, rows in s_index.items():
        for b, cs in rows.items():
            for c in cs:
                for d in rows.get(c, ()):
                    if d not in cs:
                        out.append(Imperfection(2, (a, b, c, d)))
    for (a, b) in R:
        for c in succ_map.get(b, ()):
            if (a, b, c) not in S:
                out.append(Imperfection(3, (a, b, c)))
    if logic == ILM:
        for (a, b, c) in S:
            for d in succ_map.get(c, ()):
                if (b, d) not in R:
                    out.append(Imperfection(4, (a, b, c, d)))
    out.sort(key=lambda i: (i.kind, i.payload))
    return out


def _apply_imperfection(imp: Imperfection, R: set, S: set) -> None:
    k, p = imp.kind, imp.payload
    if k == 0:
        R.add((p[0], p[2]))
    elif k == 1:
        S.add((p[0], p[1], p[1]))
    elif k == 2:
        S.add((p[0], p[1], p[3]))
    elif k == 3:
        S.add(p)
    elif k == 4:
        R.add((p[1], p[3]))
    else:  # pragma: no cover
        raise ValueError(imp)


def _propagate_obligations(F: LabeledFrame) -> None:
    """Under ILM, obligations flow along S-transitions (the obligation set
    is the out-of-D part of the boxes, and S preserves boxes)."""
    if F.logic != ILM:
        return
    changed = True
    while changed:
        changed = False
        for (a, b, c) in F.S:
            ob = F.obligations.get(b, frozenset())
            oc = F.obligations.get(c, frozenset())
            if not ob <= oc:
                F.obligations[c] = oc | ob
                changed = True


def close_trace(F: LabeledFrame, logic: str | None = None) -> Iterator[tuple[Imperfection, LabeledFrame]]:
    """One-imperfection-at-a-time closure; yields each step's result. The
    final yielded frame is the closure."""
    logic = check_logic(logic or F.logic)
    g = F.copy()
    while True:
        imps = find_imperfections(g, logic)
        if not imps:
            _propagate_obligations(g)
            return
        imp = imps[0]
        g = g.copy()
        _apply_imperfection(imp, g.R, g.S)
        _propagate_obligations(g)
        yield imp, g


def close(F: LabeledFrame, logic: str | None = None) -> LabeledFrame:
    """Fixpoint of imperfection elimination: same worlds and labels, R and S
    only grow, no imperfection remains. The fixpoint is unique, so the
    batched computation below agrees with close_trace."""
    logic = check_logic(logic or F.logic)
    g = F.copy()
    R, S = g.R, g.S
    changed = True
    while changed:
        changed = False
        # transitive closure of R
        added = True
        while added:
            added = False
            for (a, b) in list(R):
                for (b2, c) in list(R):
                    if b == b2 and (a, c) not in R:
                        R.add((a, c))
                        added = True
        before = len(S)
        for (a, b) in R:
            S.add((a, b, b))
        for (a, b) in list(R):
            for (b2, c) in list(R):
                if b == b2:
                    S.add((a, b, c))
        # S_x transitivity
        added = True
        while added:
            added = False
            s_index: dict[str, dict[str, set[str]]] = {}
            for (a, b, c) in S:
                s_index.setdefault(a, {}).setdefault(b, set()).add(c)
            for a, rows in s_index.items():
                for b, cs in list(rows.items()):
                    for c in list(cs):
                        for d in rows.get(c, ()):
                            if d not in cs:
                                S.add((a, b, d))
                                cs.add(d)
                                added = True
        if len(S) != before:
            changed = True
        if logic == ILM:
            for (a, b, c) in list(S):
                for (c2, d) in list(R):
                    if c == c2 and (b, d) not in R:
                        R.add((b, d))
                        changed = True
    _propagate_obligations(g)
    return g


def close_frame(frame: VeltmanFrame, logic: str) -> VeltmanFrame:
    """Closure of a plain frame under the same conditions."""
    check_logic(logic)
    g = LabeledFrame(AdequateSet(()), ILM if logic != IL else IL)
    g.worlds = sorted(frame.worlds)
    g.R = set(frame.R)
    g.S = set(frame.S)
    g.obligations = {w: frozenset() for w in g.worlds}
    closed = close(g, g.logic)
    return VeltmanFrame(frozenset(closed.worlds), frozenset(closed.R), frozenset(closed.S))


def check_mcone_invariance(before: LabeledFrame, after: LabeledFrame) -> bool:
    """True iff every labeled M-cone coincides on the two frames."""
    for x in before.worlds:
        for lab in before.labels_from(x):
            if m_cone(before, x, lab) != m_cone(after, x, lab):
                return False
    return True


def depth(F) -> int:
    """Length of the longest R-chain (0 for edgeless frames)."""
    worlds = list(F.worlds)
    R = F.R
    memo: dict[str, int] = {}
    on_path: set[str] = set()

    def longest(w: str) -> int:
        if w in memo:
            return memo[w]
        if w in on_path:
            raise ValueError("R has a cycle")
        on_path.add(w)
        best = 0
        for (a, b) in R:
            if a == w:
                best = max(best, 1 + longest(b))
        on_path.discard(w)
        memo[w] = best
        return best

    return max((longest(w) for w in worlds), default=0)


# --- frame validation ---------------------------------------------------------


def _acyclic(worlds, pairs) -> bool:
    adj: dict[str, list[str]] = {}
    for (a, b) in pairs:
        adj.setdefault(a, []).append(b)
    color: dict[str, int] = {}

    def visit(n) -> bool:
        color[n] = 1
        for m in adj.get(n, ()):
            c = color.get(m)
            if c == 1:
                return False
            if c is None and not visit(m):
                return False
        color[n] = 2
        return True

    return all(visit(n) for n in worlds if n not in color)


def _pairs_transitive_closure(pairs) -> set[tuple[str, str]]:
    out = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(out):
            for (b2, c) in list(out):
                if b == b2 and (a, c) not in out:
                    out.add((a, c))
                    changed = True
    return out


def quasi_frame_violations(F: LabeledFrame) -> list[str]:
    """Violated invariants of the working frame, as readable strings.
    Checks the quasi-frame conditions, the ILM additions when applicable,
    obligation satisfaction, and strict box growth along R."""
    out: list[str] = []
    if not _acyclic(F.worlds, F.R):
        out.append("R has a cycle")
    for (x, y, z) in sorted(F.S):
        if (x, y) not in F.R or (x, z) not in F.R:
            out.append(f"S triple outside R: {(x, y, z)}")
    for (x, y) in sorted(F.R):
        if not succ(F.nu[x], F.nu[y]):
            out.append(f"succ fails on edge {(x, y)}")
    for (x, y) in sorted(F.R):
        for o in sorted(F.effective_obligations(x), key=lambda f: f.key()):
            if not F.nu[y].models(o):
                out.append(f"obligation {render(o)} of {x} fails at {y}")
    for (x, y) in sorted(F.R):
        if F.exempt_root is not None and x == F.exempt_root:
            continue
        bx, by = F.effective_boxes(x), F.effective_boxes(y)
        if not (bx <= by and bx != by):
            out.append(f"no box growth on edge {(x, y)}")
    for x in F.worlds:
        labs = F.labels_from(x)
        cones = {render(lab): generalized_cone(F, x, lab) for lab in labs}
        for i, a in enumerate(labs):
            for b in labs[i + 1 :]:
                if cones[render(a)] & cones[render(b)]:
                    out.append(f"generalized cones overlap at {x}: {render(a)} / {render(b)}")
        for lab in labs:
            for y in sorted(critical_cone(F, x, lab)):
                if not crit_succ(F.nu[x], lab, F.nu[y]):
                    out.append(f"criticality {render(lab)} fails at {y} (cone of {x})")
    if F.logic == ILM:
        for (x, y, z) in sorted(F.S):
            if not box_incl(F.nu[y], F.nu[z]):
                out.append(f"box inclusion fails on {(x, y, z)}")
            if not F.obligations.get(y, frozenset()) <= F.obligations.get(z, frozenset()):
                out.append(f"obligation inclusion fails on {(x, y, z)}")
        for x in F.worlds:
            for lab in F.labels_from(x):
                for y in sorted(m_cone(F, x, lab)):
                    if not crit_succ(F.nu[x], lab, F.nu[y]):
                        out.append(f"m-criticality {render(lab)} fails at {y} (cone of {x})")
        rtr = _pairs_transitive_closure(F.R)
        stro = _pairs_transitive_closure({(y, z) for (_, y, z) in F.S})
        comp = {(a, c) for (a, b) in rtr for (b2, c) in stro if b == b2}
        if not _acyclic(F.worlds, comp):
            out.append("R;S composition has a cycle")
    return out


# --- problems and deficiencies -----------------------------------------------


def find_problems(F: LabeledFrame, D: AdequateSet | None = None) -> list[Problem]:
    """False rhd members without a witness in the right critical cone, and
    false box members without a refuting successor."""
    D = D or F.adequate
    out = []
    for x in F.worlds:
        t = F.nu[x]
        for a in D.modal_atoms:
            if isinstance(a, Rhd) and not t.models(a):
                cone = critical_cone(F, x, a.right)
                if not any(F.nu[y].models(a.left) for y in cone):
                    out.append(Problem(x, Neg(a)))
            elif isinstance(a, Box) and not t.models(a):
                if not any(
                    F.nu[y].models(Neg(a.body)) for y in F.successors(x)
                ):
                    out.append(Problem(x, Neg(a)))
    return out


def find_deficiencies(F: LabeledFrame, D: AdequateSet | None = None) -> list[Deficiency]:
    D = D or F.adequate
    out = []
    s_index: dict[tuple[str, str], list[str]] = {}
    for (a, b, c) in F.S:
        s_index.setdefault((a, b), []).append(c)
    for x in F.worlds:
        t = F.nu[x]
        for a in D.modal_atoms:
            if not isinstance(a, Rhd) or not t.models(a):
                continue
            for y in F.successors(x):
                if not F.nu[y].models(a.left):
                    continue
                if not any(F.nu[z].models(a.right) for z in s_index.get((x, y), ())):
                    out.append(Deficiency(x, y, a))
    return out


def refresh_worklist(F: LabeledFrame) -> None:
    order = F.order()
    current = find_problems(F) + find_deficiencies(F)
    keys = {item: None for item in current}
    kept = [it for it in F.worklist if it in keys]
    kept_set = set(kept)
    fresh = sorted((it for it in current if it not in kept_set), key=lambda i: i.key(order))
    F.worklist = kept + fresh


# --- elimination ---------------------------------------------------------------


def _reachable(F: LabeledFrame, src: str) -> set[str]:
    return _lfp({src}, lambda w: (b for (a, b) in F.R if a == w))


def _inherited_crit_constraints(F: LabeledFrame, x: str) -> list[tuple[Formula, bool]]:
    """Criticality constraints a fresh R-successor of x inherits from cones
    of x's ancestors that already contain x."""
    cs: list[tuple[Formula, bool]] = []
    cone_of = m_cone if F.logic == ILM else critical_cone
    for a in F.worlds:
        if (a, x) not in F.R:
            continue
        for lab in F.labels_from(a):
            if x in cone_of(F, a, lab):
                for f in crit_obligations(F.nu[a], lab):
                    cs.append((f, True))
    return cs


def _finish(F: LabeledFrame) -> LabeledFrame | None:
    g = close(F)
    if quasi_frame_violations(g):
        return None
    refresh_worklist(g)
    return g


def _item_constraints(F: LabeledFrame, item) -> list[tuple[Formula, bool]]:
    x = item.world if isinstance(item, Problem) else item.x
    extra = [(o, True) for o in sorted(F.effective_obligations(x), key=lambda f: f.key())]
    extra += _inherited_crit_constraints(F, x)
    return extra


def _box_lookahead(
    F: LabeledFrame, x: str, B: Formula, t: DTheory, extra, own
) -> bool:
    """Would a fresh B-critical successor of x with theory t leave one of
    its false boxes permanently unwitnessable? In any completed extension,
    an R-maximal refuter of []E carries ~E together with []E and satisfies
    every inherited constraint, so emptiness of that set is final."""
    gx_crit = crit_obligations(F.nu[x], B)
    base: list[tuple[Formula, bool]] = list(extra)
    base += [(o, True) for o in gx_crit]
    base += [(o, True) for o in own]
    for b in t.boxes():
        base.append((b.body, True))
        base.append((b, True))
    for bx in F.adequate.modal_atoms:
        if not isinstance(bx, Box) or t.models(bx):
            continue
        cs = base + [(bx.body, False), (bx, True)]
        if next(iter(solve_theories(F.adequate, F.logic, cs)), None) is None:
            return False
    return True


def _deficiency_lookahead(
    F: LabeledFrame, x: str, B: Formula, t: DTheory, extra
) -> bool:
    """Would a fresh B-critical successor of x with theory t leave some
    deficiency of x permanently uneliminable? Any S_x exit it could ever
    get, incidental or constructed, must satisfy the deficiency's candidate
    constraints, so an empty candidate set now is final."""
    gx = F.nu[x]
    for rho in F.adequate.modal_atoms:
        if not isinstance(rho, Rhd) or not gx.models(rho):
            continue
        if not t.models(rho.left) or t.models(rho.right):
            continue
        cs = list(extra)
        cs.append((rho.right, True))
        for f in crit_obligations(gx, B):
            cs.append((f, True))
        for b in gx.boxes():
            cs.append((b.body, True))
            cs.append((b, True))
        if F.logic == ILM:
            for b in t.boxes():
                cs.append((b, True))
        if next(iter(solve_theories(F.adequate, F.logic, cs)), None) is None:
            return False
    return True


def fresh_candidate_theories(F: LabeledFrame, item) -> list[DTheory]:
    """Theory-level candidates for eliminating the item with a fresh world.
    An empty list means the item can never be eliminated on any extension
    of F: the constraint set only grows as the frame grows, and a reusable
    world's theory would itself be a solution of it."""
    extra = _item_constraints(F, item)
    if isinstance(item, Problem):
        x = item.world
        body = item.formula.left
        if isinstance(body, Rhd):
            B = body.right
            own = (single_neg(body.left),)
        else:
            B = BOT
            own = ()
        stream = extend_problem(F.nu[x], item.formula, extra=extra, logic=F.logic)
    else:
        x = item.x
        B = criticality_label(F, item.x, item.y)
        own = (single_neg(item.formula.right),)
        if F.logic == ILM:
            stream = extend_deficiency_ilm(
                F.nu[item.x], B, F.nu[item.y], item.formula, extra=extra, logic=F.logic
            )
        else:
            stream = extend_deficiency_il(
                F.nu[item.x], B, item.formula, extra=extra, logic=F.logic
            )
    good = [
        t
        for t in stream
        if _deficiency_lookahead(F, x, B, t, extra)
        and _box_lookahead(F, x, B, t, extra, own)
    ]
    good.sort(key=search_preference)
    return good


def eliminate_problem(
    F: LabeledFrame, prob: Problem, _state=None
) -> Iterator[LabeledFrame]:
    """Extensions of F eliminating the problem: existing worlds brought into
    position first, then fresh witnesses, each closed and re-validated."""
    x = prob.world
    nf = prob.formula
    body = nf.left
    gx = F.nu[x]
    back = {w for w in F.worlds if x in _reachable(F, w)}

    if isinstance(body, Rhd):
        A, B = body.left, body.right
        # reuse: label an edge to an existing compatible world
        for y in F.worlds:
            if y == x or y in back:
                continue
            t = F.nu[y]
            if not (t.models(A) and crit_succ(gx, B, t)):
                continue
            if (x, y) in F.R and F.edge_label.get((x, y)) is not None:
                continue
            g = F.copy()
            g.R.add((x, y))
            g.edge_label[(x, y)] = B
            done = _finish(g)
            if done is not None:
                yield done
        # fresh witness
        for t in fresh_candidate_theories(F, prob):
            if _state is not None and len(F.worlds) >= _state.budget.max_worlds:
                _state.cut = True
                break
            g = F.copy()
            w = g.add_world(t, obligations=[single_neg(A)])
            g.R.add((x, w))
            g.edge_label[(x, w)] = B
            done = _finish(g)
            if done is not None:
                yield done
    elif isinstance(body, Box):
        A = body.body
        for y in F.worlds:
            if y == x or y in back or (x, y) in F.R:
                continue
            t = F.nu[y]
            if not (t.models(Neg(A)) and succ(gx, t)):
                continue
            g = F.copy()
            g.R.add((x, y))
            done = _finish(g)
            if done is not None:
                yield done
        for t in fresh_candidate_theories(F, prob):
            if _state is not None and len(F.worlds) >= _state.budget.max_worlds:
                _state.cut = True
                break
            g = F.copy()
            w = g.add_world(t)
            g.R.add((x, w))
            done = _finish(g)
            if done is not None:
                yield done
    else:  # pragma: no cover
        raise ValueError(f"not a problem formula: {nf!r}")


def criticality_label(F: LabeledFrame, x: str, y: str) -> Formula:
    """The formula B with y in the B-critical cone of x; bot if none."""
    for lab in F.labels_from(x):
        if y in critical_cone(F, x, lab):
            return lab
    return BOT


def eliminate_deficiency(
    F: LabeledFrame, defi: Deficiency, logic: str | None = None, _state=None
) -> Iterator[LabeledFrame]:
    """Extensions of F giving y an S_x exit to a world carrying the rhd's
    right side: existing worlds first, then fresh ones."""
    logic = check_logic(logic or F.logic)
    x, y, cd = defi.x, defi.y, defi.formula
    gx = F.nu[x]
    B = criticality_label(F, x, y)
    back = {w for w in F.worlds if x in _reachable(F, w)}

    def attach(g: LabeledFrame, z: str) -> LabeledFrame | None:
        g.R.add((x, z))
        g.S.add((x, y, z))
        return _finish(g)

    for z in F.worlds:
        if z == x or z in back:
            continue
        t = F.nu[z]
        if not (t.models(cd.right) and crit_succ(gx, B, t)):
            continue
        if logic == ILM and not box_incl(F.nu[y], t):
            continue
        if (x, y, z) in F.S:
            continue
        g = F.copy()
        done = attach(g, z)
        if done is not None:
            yield done

    for t in fresh_candidate_theories(F, defi):
        if _state is not None and len(F.worlds) >= _state.budget.max_worlds:
            _state.cut = True
            break
        g = F.copy()
        z = g.add_world(t, obligations=[single_neg(cd.right)])
        done = attach(g, z)
        if done is not None:
            yield done


def eliminate(F: LabeledFrame, item, _state=None) -> Iterator[LabeledFrame]:
    if isinstance(item, Problem):
        return eliminate_problem(F, item, _state)
    return eliminate_deficiency(F, item, None, _state)


# --- truth lemma ----------------------------------------------------------------


def verify_truth_lemma(model: VeltmanModel, nu: dict[str, DTheory], D: AdequateSet) -> bool:
    """For every world and every D formula: forced iff in the label."""
    forcer = _Forcer(model)
    for w in sorted(model.frame.worlds):
        t = nu[w]
        for f in D.sorted_members:
            if forcer.forces(w, f) != t.models(f):
                return False
    return True


# --- debug dump ------------------------------------------------------------------


def labeled_frame_to_dict(F: LabeledFrame) -> dict:
    model = F.to_model()
    return {
        "worlds": sorted(F.worlds),
        "R": sorted([x, y] for (x, y) in F.R),
        "S": sorted([x, y, z] for (x, y, z) in F.S),
        "val": {w: sorted(model.val[w]) for w in sorted(F.worlds)},
        "nu": {
            w: sorted(render(f) for f in F.nu[w].members) for w in sorted(F.worlds)
        },
        "edge_labels": sorted(
            [x, y, render(lab)] for ((x, y), lab) in F.edge_label.items()
        ),
        "obligations": {
            w: sorted(render(f) for f in F.obligations.get(w, ()))
            for w in sorted(F.worlds)
        },
    }


def labeled_frame_to_json(F: LabeledFrame) -> str:
    return json.dumps(labeled_frame_to_dict(F), indent=2, sort_keys=True)
