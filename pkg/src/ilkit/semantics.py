"""Finite Veltman frames and models.

A frame is (worlds, R, S) with S stored as ordered triples (x, y, z)
meaning y S_x z. Models add a valuation. Everything here is an immutable
value; the operations are pure.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .syntax import Atom, Bot, Box, Formula, Implies, Rhd, atoms

GL = "gl"
IL = "il"
ILM = "ilm"

LOGICS = (GL, IL, ILM)


def check_logic(logic: str) -> str:
    if logic not in LOGICS:
        raise ValueError(f"unknown logic {logic!r}; expected one of {LOGICS}")
    return logic


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class VeltmanFrame:
    worlds: frozenset[str]
    R: frozenset[tuple[str, str]]
    S: frozenset[tuple[str, str, str]]

    @staticmethod
    def make(worlds, R=(), S=()) -> "VeltmanFrame":
        return VeltmanFrame(
            frozenset(worlds),
            frozenset((x, y) for x, y in R),
            frozenset((x, y, z) for x, y, z in S),
        )

    def successors(self, w: str) -> list[str]:
        return sorted(y for (x, y) in self.R if x == w)


@dataclass(frozen=True, eq=False)
class VeltmanModel:
    frame: VeltmanFrame
    val: Mapping[str, frozenset[str]]

    @staticmethod
    def make(worlds, R=(), S=(), val=None) -> "VeltmanModel":
        frame = VeltmanFrame.make(worlds, R, S)
        v = {w: frozenset(val.get(w, ())) for w in frame.worlds} if val else {
            w: frozenset() for w in frame.worlds
        }
        return VeltmanModel(frame, v)

    @property
    def worlds(self):
        return self.frame.worlds


@dataclass(frozen=True)
class Violation:
    condition: str
    witness: tuple

    def __str__(self):
        return f"{self.condition}{self.witness}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations)


def _has_cycle(nodes: Iterable[str], edges: set[tuple[str, str]]) -> tuple[str, ...] | None:
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for x, y in edges:
        adj.setdefault(x, []).append(y)
    color: dict[str, int] = {}
    trail: list[str] = []

    def visit(n: str):
        color[n] = 1
        trail.append(n)
        for m in sorted(adj.get(n, ())):
            c = color.get(m)
            if c == 1:
                return tuple(trail[trail.index(m):] + [m])
            if c is None:
                found = visit(m)
                if found:
                    return found
        trail.pop()
        color[n] = 2
        return None

    for n in sorted(adj):
        if n not in color:
            found = visit(n)
            if found:
                return found
    return None


def validate_il(frame: VeltmanFrame) -> ValidationReport:
    """Check the frame conditions of the base interpretability logic; every
    violation is reported with a witness tuple."""
    out: list[Violation] = []
    W, R, S = frame.worlds, frame.R, frame.S
    for x, y in sorted(R):
        if x not in W or y not in W:
            out.append(Violation("r_domain", (x, y)))
    cyc = _has_cycle(W, set(R))
    if cyc:
        out.append(Violation("converse_well_founded", cyc))
    for (x, y), (y2, z) in itertools.product(sorted(R), sorted(R)):
        if y == y2 and (x, z) not in R:
            out.append(Violation("r_transitive", (x, y, z)))
    for x, y, z in sorted(S):
        if (x, y) not in R or (x, z) not in R:
            out.append(Violation("s_over_successors", (x, y, z)))
    for x, y in sorted(R):
        if (x, y, y) not in S:
            out.append(Violation("s_reflexive", (x, y)))
    for x, y in sorted(R):
        for y2, z in sorted(R):
            if y == y2 and (x, y, z) not in S:
                out.append(Violation("r_inside_s", (x, y, z)))
    for x, u, v in sorted(S):
        for x2, v2, w in sorted(S):
            if x == x2 and v == v2 and (x, u, w) not in S:
                out.append(Violation("s_transitive", (x, u, v, w)))
    return ValidationReport(tuple(out))


def validate_ilm(frame: VeltmanFrame) -> ValidationReport:
    """validate_il plus the ILM frame condition y S_x z R u -> y R u."""
    out = list(validate_il(frame).violations)
    for x, y, z in sorted(frame.S):
        for z2, u in sorted(frame.R):
            if z == z2 and (y, u) not in frame.R:
                out.append(Violation("ilm_condition", (x, y, z, u)))
    return ValidationReport(tuple(out))


def validate(frame: VeltmanFrame, logic: str) -> ValidationReport:
    check_logic(logic)
    if logic == ILM:
        return validate_ilm(frame)
    return validate_il(frame)


class _Forcer:
    """Forcing evaluator with a (world, formula) memo shared across queries
    on one model."""

    def __init__(self, model: VeltmanModel):
        self.m = model
        self.memo: dict[tuple[str, Formula], bool] = {}
        self.succ: dict[str, list[str]] = {w: [] for w in model.frame.worlds}
        for x, y in model.frame.R:
            self.succ[x].append(y)
        self.s_exits: dict[tuple[str, str], list[str]] = {}
        for x, y, z in model.frame.S:
            self.s_exits.setdefault((x, y), []).append(z)

    def forces(self, w: str, f: Formula) -> bool:
        key = (w, f)
        got = self.memo.get(key)
        if got is not None:
            return got
        if isinstance(f, Bot):
            v = False
        elif isinstance(f, Atom):
            v = f.name in self.m.val.get(w, ())
        elif isinstance(f, Implies):
            v = (not self.forces(w, f.left)) or self.forces(w, f.right)
        elif isinstance(f, Box):
            v = all(self.forces(u, f.body) for u in self.succ[w])
        elif isinstance(f, Rhd):
            v = all(
                any(self.forces(z, f.right) for z in self.s_exits.get((w, u), ()))
                for u in self.succ[w]
                if self.forces(u, f.left)
            )
        else:  # pragma: no cover
            raise TypeError(f)
        self.memo[key] = v
        return v


def forces(model: VeltmanModel, w: str, f: Formula) -> bool:
    if w not in model.frame.worlds:
        raise KeyError(f"unknown world {w!r}")
    return _Forcer(model).forces(w, f)


def generated_submodel(model: VeltmanModel, m: str) -> VeltmanModel:
    """Restriction to m and its R-successors; forcing of every formula is
    preserved at every retained world."""
    if m not in model.frame.worlds:
        raise KeyError(f"unknown world {m!r}")
    keep = {m} | {y for (x, y) in model.frame.R if x == m}
    frame = VeltmanFrame(
        frozenset(keep),
        frozenset((x, y) for (x, y) in model.frame.R if x in keep and y in keep),
        frozenset(
            (x, y, z)
            for (x, y, z) in model.frame.S
            if x in keep and y in keep and z in keep
        ),
    )
    val = {w: model.val.get(w, frozenset()) for w in keep}
    return VeltmanModel(frame, val)


# --- gluing constructions ---------------------------------------------------


def _disjointify(models: list[tuple[VeltmanModel, str]], reserved: set[str]):
    """Rename world sets that collide (with each other or with `reserved`);
    the i-th model's world w becomes f"m{i}_{w}" when renaming is needed."""
    seen: set[str] = set(reserved)
    out = []
    for i, (m, d) in enumerate(models):
        ws = set(m.frame.worlds)
        if ws & seen:
            ren = {w: f"m{i}_{w}" for w in ws}
            m = VeltmanModel(
                VeltmanFrame(
                    frozenset(ren[w] for w in ws),
                    frozenset((ren[x], ren[y]) for x, y in m.frame.R),
                    frozenset((ren[x], ren[y], ren[z]) for x, y, z in m.frame.S),
                ),
                {ren[w]: m.val.get(w, frozenset()) for w in ws},
            )
            d = ren[d]
        seen |= set(m.frame.worlds)
        out.append((m, d))
    return out


def _fresh_root(taken: set[str]) -> str:
    name = "r"
    i = 0
    while name in taken:
        name = f"r{i}"
        i += 1
    return name


def glue_root(models: list[tuple[VeltmanModel, str]]) -> tuple[VeltmanModel, str]:
    """Put a fresh root below all the given models: the root sees every
    world, and its S is identity-on-successors plus all input R edges."""
    models = _disjointify(list(models), set())
    all_worlds: set[str] = set()
    for m, _ in models:
        all_worlds |= set(m.frame.worlds)
    root = _fresh_root(all_worlds)
    R = set()
    S = set()
    val: dict[str, frozenset[str]] = {root: frozenset()}
    for m, _ in models:
        R |= set(m.frame.R)
        S |= set(m.frame.S)
        val.update(m.val)
    R |= {(root, w) for w in all_worlds}
    S |= {(root, w, w) for w in all_worlds}
    for m, _ in models:
        S |= {(root, x, y) for (x, y) in m.frame.R}
    frame = VeltmanFrame(frozenset(all_worlds | {root}), frozenset(R), frozenset(S))
    return VeltmanModel(frame, val), root


def glue_above_world(model: VeltmanModel, m: str) -> tuple[VeltmanModel, str]:
    """Put a fresh root directly below world m: the root sees exactly m and
    m's successors; S at the root is identity plus R above m."""
    if m not in model.frame.worlds:
        raise KeyError(f"unknown world {m!r}")
    root = _fresh_root(set(model.frame.worlds))
    above = {m} | {y for (x, y) in model.frame.R if x == m}
    R = set(model.frame.R) | {(root, x) for x in above}
    S = set(model.frame.S)
    S |= {(root, x, x) for x in above}
    S |= {(root, x, y) for (x, y) in model.frame.R if x in above and y in above}
    frame = VeltmanFrame(frozenset(model.frame.worlds | {root}), frozenset(R), frozenset(S))
    val = dict(model.val)
    val[root] = frozenset()
    return VeltmanModel(frame, val), root


def glue_selfprover(
    left: VeltmanModel, l: str, right: VeltmanModel, r: str
) -> tuple[VeltmanModel, str]:
    """Glue a fresh world w below both models, identify l S_w r, and give l
    access to everything above r. S is rebuilt canonically from the glued R
    (y S_x z iff x R y and y R* z) plus the one extra triple, so the output
    is an ILM model; input S relations are discarded (the construction is
    for box-fragment inputs).
    """
    if l not in left.frame.worlds:
        raise KeyError(f"unknown world {l!r}")
    if r not in right.frame.worlds:
        raise KeyError(f"unknown world {r!r}")
    pairs = _disjointify([(left, l), (right, r)], set())
    (left, l), (right, r) = pairs
    w = _fresh_root(set(left.frame.worlds) | set(right.frame.worlds))
    worlds = set(left.frame.worlds) | set(right.frame.worlds) | {w}
    R = set(left.frame.R) | set(right.frame.R)
    R |= {(w, x) for x in worlds if x != w}
    R |= {(l, y) for (x, y) in right.frame.R if x == r}
    # transitive closure (l's new edges may need lifting to l's ancestors)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(R):
            for (b2, c) in list(R):
                if b == b2 and (a, c) not in R:
                    R.add((a, c))
                    changed = True
    S = {(x, y, z) for (x, y) in R for z in worlds if z == y or (y, z) in R if (x, z) in R}
    S.add((w, l, r))
    frame = VeltmanFrame(frozenset(worlds), frozenset(R), frozenset(S))
    val = dict(left.val)
    val.update(right.val)
    val[w] = frozenset()
    return VeltmanModel(frame, val), w


def frame_validates(frame: VeltmanFrame, f: Formula, limit: int = 1 << 16) -> bool:
    """True iff f holds at every world under every valuation of f's atoms.

    Exhausts 2^(|atoms| * |worlds|) valuations; raises BudgetExceededError
    beyond `limit` combinations.
    """
    names = sorted(atoms(f))
    worlds = sorted(frame.worlds)
    cells = [(w, a) for w in worlds for a in names]
    if len(cells) < 64 and 2 ** len(cells) > limit:
        raise BudgetExceededError(
            f"{2 ** len(cells)} valuations exceed limit {limit}"
        )
    for bits in itertools.product((False, True), repeat=len(cells)):
        val: dict[str, set[str]] = {w: set() for w in worlds}
        for (w, a), b in zip(cells, bits):
            if b:
                val[w].add(a)
        model = VeltmanModel(frame, {w: frozenset(v) for w, v in val.items()})
        forcer = _Forcer(model)
        if not all(forcer.forces(w, f) for w in worlds):
            return False
    return True


# --- serialization ----------------------------------------------------------


def model_to_dict(model: VeltmanModel) -> dict:
    return {
        "worlds": sorted(model.frame.worlds),
        "R": sorted([x, y] for (x, y) in model.frame.R),
        "S": sorted([x, y, z] for (x, y, z) in model.frame.S),
        "val": {w: sorted(model.val.get(w, ())) for w in sorted(model.frame.worlds)},
    }


def model_from_dict(data: dict) -> VeltmanModel:
    return VeltmanModel.make(
        data["worlds"],
        [tuple(e) for e in data.get("R", ())],
        [tuple(t) for t in data.get("S", ())],
        {w: set(v) for w, v in data.get("val", {}).items()},
    )


def model_to_json(model: VeltmanModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True)


def model_from_json(text: str) -> VeltmanModel:
    return model_from_dict(json.loads(text))


def model_to_dot(model: VeltmanModel) -> str:
    """DOT export: R solid, S_x dashed labeled x, worlds labeled with their
    true atoms."""
    lines = ["digraph veltman {"]
    for w in sorted(model.frame.worlds):
        tru = ",".join(sorted(model.val.get(w, ())))
        lines.append(f'  "{w}" [label="{w}\\n{{{tru}}}"];')
    for x, y in sorted(model.frame.R):
        lines.append(f'  "{x}" -> "{y}";')
    for x, y, z in sorted(model.frame.S):
        lines.append(f'  "{y}" -> "{z}" [style=dashed, label="{x}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
