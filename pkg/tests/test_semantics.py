import random

import pytest

from ilkit.semantics import (
    BudgetExceededError,
    VeltmanFrame,
    VeltmanModel,
    forces,
    frame_validates,
    generated_submodel,
    glue_above_world,
    glue_root,
    glue_selfprover,
    model_from_json,
    model_to_dot,
    model_to_json,
    validate_il,
    validate_ilm,
)
from ilkit.syntax import And, Atom, Box, Diamond, Neg, Rhd, Top, parse

p, q = Atom("p"), Atom("q")


def chain(n, val=None):
    worlds = [f"w{i}" for i in range(n)]
    R = [(worlds[i], worlds[j]) for i in range(n) for j in range(i + 1, n)]
    S = [(x, y, y) for (x, y) in R]
    S += [(x, y, z) for (x, y) in R for (x2, z) in R if x2 == y]
    return VeltmanModel.make(worlds, R, S, val or {})


def test_validate_single_world():
    f = VeltmanFrame.make(["a"])
    assert validate_il(f).ok
    assert validate_ilm(f).ok


def test_validate_missing_transitivity():
    f = VeltmanFrame.make(["a", "b", "c"], [("a", "b"), ("b", "c")])
    rep = validate_il(f)
    assert not rep.ok
    assert any(
        v.condition == "r_transitive" and v.witness == ("a", "b", "c")
        for v in rep.violations
    )


def test_validate_cycle():
    f = VeltmanFrame.make(["a", "b"], [("a", "b"), ("b", "a")])
    rep = validate_il(f)
    assert any(v.condition == "converse_well_founded" for v in rep.violations)


def test_validate_ilm_identity_s_is_vacuous():
    # one root with two incomparable successors, S = identity only: a valid
    # IL frame on which the ILM condition never fires
    base = VeltmanFrame.make(
        ["a", "b", "c"], [("a", "b"), ("a", "c")], [("a", "b", "b"), ("a", "c", "c")]
    )
    assert validate_il(base).ok
    assert validate_ilm(base).ok


def test_validate_ilm_violation():
    W = ["w", "l", "r", "u"]
    R = [("w", "l"), ("w", "r"), ("w", "u"), ("r", "u")]
    S = [(x, y, y) for (x, y) in R] + [("w", "r", "u"), ("w", "l", "r"), ("w", "l", "u")]
    f = VeltmanFrame.make(W, R, S)
    assert validate_il(f).ok
    rep = validate_ilm(f)
    assert any(
        v.condition == "ilm_condition" and v.witness == ("w", "l", "r", "u")
        for v in rep.violations
    )


def test_forces_terminal_world():
    m = VeltmanModel.make(["a"])
    assert forces(m, "a", parse("[]bot"))
    assert forces(m, "a", parse("p |> bot"))


def test_forces_rhd():
    m = VeltmanModel.make(
        ["w", "u"], [("w", "u")], [("w", "u", "u")], {"u": {"p"}}
    )
    assert forces(m, "w", Rhd(p, p))
    assert not forces(m, "w", Rhd(p, q))
    assert forces(m, "w", Diamond(p))


def test_forces_unknown_world():
    m = VeltmanModel.make(["a"])
    with pytest.raises(KeyError):
        forces(m, "zz", p)


def test_generated_submodel_at_root():
    m = chain(3, {"w2": {"p"}})
    g = generated_submodel(m, "w0")
    assert g.frame == m.frame
    assert dict(g.val) == dict(m.val)


def test_generated_submodel_midchain():
    m = chain(3, {"w2": {"p"}})
    g = generated_submodel(m, "w1")
    assert g.frame.worlds == frozenset({"w1", "w2"})
    for w in ("w1", "w2"):
        assert forces(g, w, Diamond(p)) == forces(m, w, Diamond(p))


def test_generated_submodel_terminal():
    m = chain(3)
    g = generated_submodel(m, "w2")
    assert g.frame.worlds == frozenset({"w2"})
    assert forces(g, "w2", Box(parse("bot")))


def _random_model(rng, n_worlds=5, n_atoms=2):
    worlds = [f"w{i}" for i in range(n_worlds)]
    R = set()
    for i in range(n_worlds):
        for j in range(i + 1, n_worlds):
            if rng.random() < 0.45:
                R.add((worlds[i], worlds[j]))
    # transitive closure
    changed = True
    while changed:
        changed = False
        for (a, b) in list(R):
            for (b2, c) in list(R):
                if b == b2 and (a, c) not in R:
                    R.add((a, c))
                    changed = True
    S = {(x, y, y) for (x, y) in R}
    S |= {(x, y, z) for (x, y) in R for (y2, z) in R if y2 == y}
    for (x, y) in R:
        for (x2, z) in R:
            if x2 == x and (x, y, z) not in S and rng.random() < 0.2:
                S.add((x, y, z))
    # close S_x under transitivity
    changed = True
    while changed:
        changed = False
        for (x, u, v) in list(S):
            for (x2, v2, w) in list(S):
                if x == x2 and v == v2 and (x, u, w) not in S:
                    S.add((x, u, w))
                    changed = True
    names = [f"a{i}" for i in range(n_atoms)]
    val = {w: {a for a in names if rng.random() < 0.5} for w in worlds}
    return VeltmanModel.make(worlds, R, S, val)


def _random_formula(rng, names, depth):
    choice = rng.random()
    if depth == 0 or choice < 0.25:
        return Atom(rng.choice(names)) if rng.random() < 0.8 else parse("bot")
    a = _random_formula(rng, names, depth - 1)
    b = _random_formula(rng, names, depth - 1)
    pick = rng.randrange(4)
    if pick == 0:
        return parse(f"({a}) -> ({b})")
    if pick == 1:
        return Box(a)
    if pick == 2:
        return Rhd(a, b)
    return Neg(a)


def test_generated_submodel_lemma_random():
    rng = random.Random(20240817)
    for _ in range(40):
        m = _random_model(rng)
        assert validate_il(m.frame).ok
        w = rng.choice(sorted(m.frame.worlds))
        g = generated_submodel(m, w)
        f = _random_formula(rng, ["a0", "a1"], 3)
        for x in sorted(g.frame.worlds):
            assert forces(g, x, f) == forces(m, x, f)


def test_glue_root_single():
    m = VeltmanModel.make(["a"], val={"a": set()})
    glued, root = glue_root([(m, "a")])
    assert forces(glued, root, Diamond(Neg(p)))
    assert validate_ilm(glued.frame).ok


def test_glue_root_two_diamonds():
    m0 = VeltmanModel.make(["a", "b"], [("a", "b")], [("a", "b", "b")], {"a": {"p"}, "b": {"q"}})
    m1 = VeltmanModel.make(["a", "c"], [("a", "c")], [("a", "c", "c")], {"a": {"q"}, "c": {"p"}})
    # m0,a forces <>~p (b lacks p); m1,a forces <>~q (c lacks q)
    assert forces(m0, "a", Diamond(Neg(p)))
    assert forces(m1, "a", Diamond(Neg(q)))
    glued, root = glue_root([(m0, "a"), (m1, "a")])
    assert forces(glued, root, And(Diamond(Neg(p)), Diamond(Neg(q))))
    assert validate_ilm(glued.frame).ok


def test_glue_root_empty():
    glued, root = glue_root([])
    assert glued.frame.worlds == frozenset({root})
    assert forces(glued, root, parse("[]bot"))
    assert validate_ilm(glued.frame).ok


def test_glue_above_world_refutes_rhd():
    m = VeltmanModel.make(["a"], val={"a": {"p"}})
    glued, root = glue_above_world(m, "a")
    assert forces(glued, root, Neg(Rhd(p, parse("bot"))))
    assert forces(glued, root, Diamond(Top()))
    assert validate_ilm(glued.frame).ok


def test_glue_above_world_general():
    # m forces A & ~B & []~B with A=p, B=q -> new root forces ~(A |> B)
    m = VeltmanModel.make(
        ["m", "u"], [("m", "u")], [("m", "u", "u")], {"m": {"p"}, "u": set()}
    )
    A, B = p, q
    assert forces(m, "m", parse("p & ~q & []~q"))
    glued, root = glue_above_world(m, "m")
    assert forces(glued, root, Neg(Rhd(A, B)))
    assert validate_ilm(glued.frame).ok


def test_glue_selfprover_shape():
    m = VeltmanModel.make(["l"], val={"l": {"p"}})
    n = VeltmanModel.make(["r"], val={"r": set()})
    glued, w = glue_selfprover(m, "l", n, "r")
    assert len(glued.frame.worlds) == 3
    assert forces(glued, w, Diamond(Top()))
    assert validate_ilm(glued.frame).ok


def test_glue_selfprover_breaks_box():
    # left: l forces []a & phi with phi = p (a literal); right: r forces
    # ~phi & []phi & []a. glued root w must force ~[](phi & []phi).
    a = Atom("a")
    left = VeltmanModel.make(
        ["l", "l1"], [("l", "l1")], [("l", "l1", "l1")], {"l": {"p"}, "l1": {"a", "p"}}
    )
    right = VeltmanModel.make(
        ["r", "r1"], [("r", "r1")], [("r", "r1", "r1")], {"r": set(), "r1": {"a", "p"}}
    )
    phi = p
    assert forces(left, "l", parse("[]a & p"))
    assert forces(right, "r", parse("~p & []p & []a"))
    glued, w = glue_selfprover(left, "l", right, "r")
    assert validate_ilm(glued.frame).ok
    assert forces(glued, w, Neg(Box(And(phi, Box(phi)))))


def test_frame_validates_single_point():
    f = VeltmanFrame.make(["a"])
    assert frame_validates(f, parse("[]bot"))


def test_frame_validates_l3():
    m = chain(3)
    assert frame_validates(m.frame, parse("[]([]p -> p) -> []p"))


def test_frame_validates_detects_ilm_failure():
    W = ["w", "l", "r", "u"]
    R = [("w", "l"), ("w", "r"), ("w", "u"), ("r", "u")]
    S = [(x, y, y) for (x, y) in R] + [("w", "r", "u"), ("w", "l", "r"), ("w", "l", "u")]
    f = VeltmanFrame.make(W, R, S)
    m_instance = parse("p |> q -> (p & []r) |> (q & []r)")
    assert validate_il(f).ok
    assert not validate_ilm(f).ok
    assert not frame_validates(f, m_instance)


def test_frame_validates_budget():
    m = chain(6)
    big = parse("p1 & p2 & p3 & p4 & p5")
    with pytest.raises(BudgetExceededError):
        frame_validates(m.frame, big, limit=1 << 10)


def test_lemma_3_2_correspondence_small_frames():
    # frames with <= 3 worlds: ILM validity of the canonical instance of
    # Montagna's principle coincides with the frame condition
    m_instance = parse("p |> q -> (p & []r) |> (q & []r)")
    rng = random.Random(7)
    frames = _enumerate_il_frames_upto(3)
    assert len(frames) > 20
    for f in frames:
        assert validate_ilm(f).ok == frame_validates(f, m_instance)


def _enumerate_il_frames_upto(n_max):
    import itertools

    out = []
    for n in range(1, n_max + 1):
        worlds = [f"w{i}" for i in range(n)]
        pairs = [(a, b) for a in worlds for b in worlds if a != b]
        for bits in itertools.product([0, 1], repeat=len(pairs)):
            R = {p for p, b in zip(pairs, bits) if b}
            ok = all(
                (a, c) in R
                for (a, b) in R
                for (b2, c) in R
                if b2 == b and a != c
            )
            if not ok or _cyclic(worlds, R):
                continue
            base = {(x, y, y) for (x, y) in R} | {
                (x, y, z) for (x, y) in R for (y2, z) in R if y2 == y
            }
            opt = [
                (x, y, z)
                for (x, y) in R
                for (x2, z) in R
                if x2 == x and (x, y, z) not in base
            ]
            for obits in itertools.product([0, 1], repeat=len(opt)):
                S = set(base) | {t for t, b in zip(opt, obits) if b}
                closed = all(
                    (x, u, w) in S
                    for (x, u, v) in S
                    for (x2, v2, w) in S
                    if x2 == x and v2 == v
                )
                if closed:
                    out.append(VeltmanFrame.make(worlds, R, S))
    return out


def _cyclic(worlds, R):
    from ilkit.semantics import _has_cycle

    return _has_cycle(worlds, set(R)) is not None


def test_lemma_3_2_correspondence_sampled_4_world_frames():
    # 4-world frames are sampled rather than exhausted
    m_instance = parse("p |> q -> (p & []r) |> (q & []r)")
    rng = random.Random(12)
    checked = 0
    while checked < 40:
        worlds = [f"w{i}" for i in range(4)]
        R = set()
        for i in range(4):
            for j in range(i + 1, 4):
                if rng.random() < 0.5:
                    R.add((worlds[i], worlds[j]))
        changed = True
        while changed:
            changed = False
            for (a, b) in list(R):
                for (b2, c) in list(R):
                    if b == b2 and (a, c) not in R:
                        R.add((a, c))
                        changed = True
        base = {(x, y, y) for (x, y) in R} | {
            (x, y, z) for (x, y) in R for (y2, z) in R if y2 == y
        }
        S = set(base)
        for (x, y) in sorted(R):
            for (x2, z) in sorted(R):
                if x2 == x and rng.random() < 0.35:
                    S.add((x, y, z))
        changed = True
        while changed:
            changed = False
            for (x, u, v) in list(S):
                for (x2, v2, w) in list(S):
                    if x == x2 and v == v2 and (x, u, w) not in S:
                        S.add((x, u, w))
                        changed = True
        f = VeltmanFrame.make(worlds, R, S)
        if not validate_il(f).ok:
            continue
        checked += 1
        assert validate_ilm(f).ok == frame_validates(f, m_instance, limit=1 << 13)


def test_box_bot_exactly_at_maximal_worlds():
    m = chain(3)
    boxbot = parse("[]bot")
    maximal = {w for w in m.frame.worlds if not any(x == w for (x, y) in m.frame.R)}
    for w in m.frame.worlds:
        assert forces(m, w, boxbot) == (w in maximal)


def test_model_json_round_trip():
    m = chain(3, {"w1": {"p"}, "w2": {"p", "q"}})
    j = model_to_json(m)
    m2 = model_from_json(j)
    assert model_to_json(m2) == j


def test_model_dot():
    m = chain(2, {"w1": {"p"}})
    dot = model_to_dot(m)
    assert '"w0" -> "w1";' in dot
    assert "style=dashed" in dot
    assert "digraph" in dot
