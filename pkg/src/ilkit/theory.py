"""Finite surrogates of maximal consistent sets.

A DTheory fixes a truth value for every modal atom (propositional atom,
box or rhd formula) of an adequate set D; membership of a D-formula is its
Boolean value under that assignment, so exactly one of each complementary
pair is a member. Enumeration additionally imposes local axiom saturation:
every schema instance whose constituents all lie in D must come out true.
Saturation is a sound over-approximation of consistency; the decision
engine's final truth-lemma certification is the arbiter.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .semantics import IL, ILM, check_logic
from .syntax import (
    AdequateSet,
    And,
    BOT,
    Box,
    Diamond,
    Formula,
    Implies,
    Neg,
    Or,
    Rhd,
    eval3,
    eval_bool,
    is_neg,
    single_neg,
)

# theories are enumerated by full materialization when the modal-atom count
# is at most this; larger adequate sets use the pruned search per query
_CACHE_ATOMS = 12


class TheoryError(ValueError):
    pass


class DTheory:
    """A maximal, Boolean-coherent, locally saturated subset of an adequate
    set."""

    __slots__ = ("adequate", "assignment", "members", "_bits", "_models_cache")

    def __init__(self, adequate: AdequateSet, assignment: dict[Formula, bool]):
        self.adequate = adequate
        self.assignment = assignment
        self.members = frozenset(
            f for f in adequate.sorted_members if eval_bool(f, assignment)
        )
        self._bits = tuple(f in self.members for f in adequate.sorted_members)
        self._models_cache: dict[Formula, bool] = {}

    def models(self, f: Formula) -> bool:
        """Truth of any Boolean combination over D's modal atoms."""
        got = self._models_cache.get(f)
        if got is None:
            got = eval_bool(f, self.assignment)
            self._models_cache[f] = got
        return got

    def boxes(self) -> tuple[Box, ...]:
        return tuple(f for f in self.adequate.boxed_members if self._member(f))

    def rhds(self) -> tuple[Rhd, ...]:
        return tuple(
            f for f in self.adequate.modal_atoms if isinstance(f, Rhd) and self.models(f)
        )

    def _member(self, f: Formula) -> bool:
        return self.models(f)

    def key(self):
        return self._bits

    def __eq__(self, other):
        return (
            isinstance(other, DTheory)
            and self.adequate == other.adequate
            and self._bits == other._bits
        )

    def __hash__(self):
        return hash(self._bits)

    def __repr__(self):
        shown = ", ".join(repr(f) for f in sorted(self.members, key=lambda g: g.key()))
        return f"DTheory({{{shown}}})"


def _norm_constraint(f: Formula, want: bool) -> tuple[Formula, bool]:
    while is_neg(f):
        f = f.left
        want = not want
    return f, want


def saturation_constraints(D: AdequateSet, logic: str) -> tuple[Formula, ...]:
    """All axiom-schema instances whose constituent formulas lie in D, as
    formulas that must evaluate true. Cached per adequate set and logic."""
    check_logic(logic)
    cached = D._sat_cache.get(logic)
    if cached is not None:
        return cached
    members = D.members
    boxes = [f for f in D.sorted_members if isinstance(f, Box)]
    rhds = sorted(
        (f for f in D.modal_atoms if isinstance(f, Rhd)), key=lambda f: f.key()
    )
    out: list[Formula] = []

    for b in boxes:
        body = b.body
        # L1
        if isinstance(body, Implies):
            if Box(body.left) in members and Box(body.right) in members:
                out.append(Implies(b, Implies(Box(body.left), Box(body.right))))
        # L2
        if Box(b) in members:
            out.append(Implies(b, Box(b)))
        # L3
        if isinstance(body, Implies) and isinstance(body.left, Box) and body.left.body == body.right:
            out.append(Implies(b, body.left))

    if logic in (IL, ILM):
        for rh in rhds:
            a, b = rh.left, rh.right
            # J1
            if Box(Implies(a, b)) in members:
                out.append(Implies(Box(Implies(a, b)), rh))
            # J4
            if Box(Neg(a)) in members and Box(Neg(b)) in members:
                out.append(Implies(rh, Implies(Diamond(a), Diamond(b))))
            # J5
            if a == Diamond(b):
                out.append(rh)
            # derived: A |> bot entails []~A
            if b == BOT and Box(Neg(a)) in members:
                out.append(Implies(rh, Box(Neg(a))))
        for r1 in rhds:
            for r2 in rhds:
                # J2
                if r1.right == r2.left and Rhd(r1.left, r2.right) in members:
                    out.append(Implies(And(r1, r2), Rhd(r1.left, r2.right)))
                # J3
                if r1.right == r2.right and Rhd(Or(r1.left, r2.left), r1.right) in members:
                    out.append(
                        Implies(And(r1, r2), Rhd(Or(r1.left, r2.left), r1.right))
                    )
                # M (Montagna's principle), ILM only
                if logic == ILM:
                    lhs2 = r2.left
                    rhs2 = r2.right
                    m_shape = (
                        _and_parts(lhs2) is not None and _and_parts(rhs2) is not None
                    )
                    if m_shape:
                        a2, c2 = _and_parts(lhs2)
                        b2, c3 = _and_parts(rhs2)
                        if (
                            a2 == r1.left
                            and b2 == r1.right
                            and isinstance(c2, Box)
                            and c2 == c3
                        ):
                            out.append(Implies(r1, r2))
    result = tuple(dict.fromkeys(out))
    D._sat_cache[logic] = result
    return result


def _and_parts(f: Formula):
    """Decompose an expanded conjunction ~(x -> ~y) into (x, y)."""
    if (
        isinstance(f, Implies)
        and f.right == BOT
        and isinstance(f.left, Implies)
        and is_neg(f.left.right)
    ):
        return f.left.left, f.left.right.left
    return None


def _solve(
    D: AdequateSet, logic: str, constraints: Iterable[tuple[Formula, bool]]
) -> Iterator[dict[Formula, bool]]:
    """Assignments over D's modal atoms satisfying saturation plus the given
    (formula, value) constraints, in lexicographic order of the atom list
    with False before True."""
    want: dict[Formula, bool] = {}
    for f, v in constraints:
        f, v = _norm_constraint(f, v)
        prev = want.get(f)
        if prev is not None and prev != v:
            return
        want[f] = v
    pending = [(f, True) for f in saturation_constraints(D, logic)]
    pending.extend(want.items())
    # contradiction between saturation and query constraints, syntactically
    seen: dict[Formula, bool] = {}
    for f, v in pending:
        prev = seen.get(f)
        if prev is not None and prev != v:
            return
        seen[f] = v
    atoms = D.modal_atoms
    n = len(atoms)

    def rec(i: int, assign: dict[Formula, bool], todo: list[tuple[Formula, bool]]):
        still: list[tuple[Formula, bool]] = []
        for f, v in todo:
            got = eval3(f, assign)
            if got is None:
                still.append((f, v))
            elif got != v:
                return
        if i == n:
            yield dict(assign)
            return
        a = atoms[i]
        for val in (False, True):
            assign[a] = val
            yield from rec(i + 1, assign, still)
        del assign[a]

    yield from rec(0, {}, pending)


def _all_theories(D: AdequateSet, logic: str) -> list[DTheory] | None:
    if len(D.modal_atoms) > _CACHE_ATOMS:
        return None
    key = ("__all__", logic)
    cached = D._sat_cache.get(key)
    if cached is None:
        cached = sorted(
            (DTheory(D, a) for a in _solve(D, logic, ())), key=lambda t: t.key()
        )
        D._sat_cache[key] = cached
    return cached


def solve_theories(
    D: AdequateSet, logic: str, constraints: Iterable[tuple[Formula, bool]] = ()
) -> Iterator[DTheory]:
    """Stream of DTheories satisfying the constraints, ordered by the
    membership bit-pattern over the sorted adequate set."""
    constraints = tuple(constraints)
    cached = _all_theories(D, logic)
    if cached is not None:
        for t in cached:
            if all(t.models(f) == v for f, v in constraints):
                yield t
        return
    found = sorted(
        (DTheory(D, a) for a in _solve(D, logic, constraints)), key=lambda t: t.key()
    )
    yield from found


def enumerate_theories(
    D: AdequateSet,
    include: Iterable[Formula] = (),
    exclude: Iterable[Formula] = (),
    logic: str = ILM,
) -> Iterator[DTheory]:
    """Every DTheory consistent with the membership/exclusion constraints,
    in a deterministic order; empty stream if unsatisfiable."""
    cs = [(f, True) for f in include] + [(f, False) for f in exclude]
    return solve_theories(D, logic, cs)


def search_preference(t: DTheory) -> tuple:
    """Candidate order for the construction: theories with fewer false box
    and rhd atoms first (each false one is a pending existential), ties by
    the canonical bit-pattern."""
    pending = sum(
        1
        for a in t.adequate.modal_atoms
        if isinstance(a, (Box, Rhd)) and not t.models(a)
    )
    return (pending, t.key())


def _same_adequate(g: DTheory, d: DTheory) -> None:
    if g.adequate != d.adequate:
        raise TheoryError("theories over different adequate sets")


def succ(g: DTheory, d: DTheory) -> bool:
    """The successor relation: every box of g persists, with its body."""
    _same_adequate(g, d)
    return all(d.models(b.body) and d.models(b) for b in g.boxes())


def box_incl(g: DTheory, d: DTheory) -> bool:
    """Box inclusion: every box of g is a box of d."""
    _same_adequate(g, d)
    return all(d.models(b) for b in g.boxes())


def crit_succ(g: DTheory, c: Formula, d: DTheory) -> bool:
    """The c-critical successor relation.

    For c = bot this is exactly succ. Otherwise, on top of succ, d avoids c
    itself and the left side of every member of g interpreting into c; the
    boxed halves of those avoidances are required as members whenever the
    adequate set can express them (outside it they live on as frame-level
    successor obligations).
    """
    _same_adequate(g, d)
    if not succ(g, d):
        return False
    if c == BOT:
        return True
    for f in crit_obligations(g, c):
        if not d.models(f):
            return False
        boxed = Box(f)
        if boxed in g.adequate.members and not d.models(boxed):
            return False
    return True


def crit_obligations(g: DTheory, c: Formula) -> tuple[Formula, ...]:
    """Successor-obligation formulas a c-critical successor of g carries:
    the boxed halves of the critical-successor definition, rendered as
    'holds at every later world' constraints."""
    if c == BOT:
        return ()
    out = [single_neg(c)]
    out.extend(single_neg(r.left) for r in g.rhds() if r.right == c)
    return tuple(dict.fromkeys(out))


def _succ_constraints(g: DTheory) -> list[tuple[Formula, bool]]:
    cs: list[tuple[Formula, bool]] = []
    for b in g.boxes():
        cs.append((b.body, True))
        cs.append((b, True))
    return cs


def _crit_constraints(g: DTheory, c: Formula) -> list[tuple[Formula, bool]]:
    cs = _succ_constraints(g)
    for f in crit_obligations(g, c):
        cs.append((f, True))
        boxed = Box(f)
        if boxed in g.adequate.members:
            cs.append((boxed, True))
    return cs


def extend_problem(
    g: DTheory,
    nf: Formula,
    extra: Iterable[tuple[Formula, bool]] = (),
    logic: str = ILM,
) -> Iterator[DTheory]:
    """Candidate theories witnessing a false rhd or box member of g.

    For ~(A |> B): candidates d with crit_succ(g, B, d) and A in d (the
    no-more-A obligation is attached by the construction layer). For ~[]A:
    candidates d with succ(g, d), ~A in d and []A in d.
    """
    if not is_neg(nf):
        raise TheoryError(f"not a negated formula: {nf!r}")
    body = nf.left
    if isinstance(body, Rhd):
        cs = _crit_constraints(g, body.right)
        cs.append((body.left, True))
    elif isinstance(body, Box):
        cs = _succ_constraints(g)
        cs.append((body.body, False))
        cs.append((body, True))
    else:
        raise TheoryError(f"not a rhd or box problem: {nf!r}")
    cs.extend(extra)
    yield from solve_theories(g.adequate, logic, cs)


def extend_deficiency_ilm(
    g: DTheory,
    b: Formula,
    d: DTheory,
    cd: Rhd,
    extra: Iterable[tuple[Formula, bool]] = (),
    logic: str = ILM,
) -> Iterator[DTheory]:
    """Candidate theories completing an unanswered C |> D member of g at a
    b-critical successor d: b-critical successors of g containing D's right
    side and including all boxes of d."""
    if not isinstance(cd, Rhd):
        raise TheoryError(f"not a rhd formula: {cd!r}")
    cs = _crit_constraints(g, b)
    cs.append((cd.right, True))
    for bx in d.boxes():
        cs.append((bx, True))
    cs.extend(extra)
    yield from solve_theories(g.adequate, logic, cs)


def extend_deficiency_il(
    g: DTheory,
    b: Formula,
    cd: Rhd,
    extra: Iterable[tuple[Formula, bool]] = (),
    logic: str = IL,
) -> Iterator[DTheory]:
    """The IL variant: no box inclusion requirement."""
    if not isinstance(cd, Rhd):
        raise TheoryError(f"not a rhd formula: {cd!r}")
    cs = _crit_constraints(g, b)
    cs.append((cd.right, True))
    cs.extend(extra)
    yield from solve_theories(g.adequate, logic, cs)


def common_predecessor(d0: DTheory, d1: DTheory, logic: str = ILM) -> Iterator[DTheory]:
    """Theories g with succ(g, d0) and succ(g, d1)."""
    _same_adequate(d0, d1)
    D = d0.adequate
    cs: list[tuple[Formula, bool]] = []
    for b in D.boxed_members:
        if not (d0.models(b.body) and d0.models(b) and d1.models(b.body) and d1.models(b)):
            cs.append((b, False))
    yield from solve_theories(D, logic, cs)
