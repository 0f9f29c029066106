import pytest

from ilkit.classify import (
    almost_loeb,
    canonical_modal_dnf,
    check_rule,
    check_tsg_decomposition,
    classify_delta1,
    classify_sigma1,
    dagger_check,
    is_self_prover,
    is_tsg,
    sigma1_countermodel,
)
from ilkit.decide import Derivable, Refuted, derivable
from ilkit.semantics import GL, ILM, forces, validate_ilm
from ilkit.syntax import And, Atom, BOT, Box, Diamond, Neg, Top, parse, render

p, q, r = Atom("p"), Atom("q"), Atom("r")


# --- admissible rules --------------------------------------------------------


def test_rule_iii_derivable_side():
    rep = check_rule("iii", (Diamond(q), q))
    assert all(isinstance(v, Derivable) for v in rep.lhs + rep.rhs)
    assert rep.agree is True


def test_rule_iii_refuted_side():
    rep = check_rule("iii", (p, q))
    assert all(isinstance(v, Refuted) for v in rep.lhs + rep.rhs)
    assert rep.agree is True


def test_rule_vii_top():
    rep = check_rule("vii", (Top(),))
    assert rep.agree is True
    assert isinstance(rep.lhs[0], Derivable)


def test_rule_ii_disjunction():
    # []p | [](q -> q) is derivable and [](q -> q) is derivable: agree
    rep = check_rule("ii", (p, parse("q -> q")))
    assert rep.agree is True
    assert isinstance(rep.lhs[0], Derivable)
    assert [v.kind for v in rep.rhs] == ["refuted", "derivable"]


def test_rule_v_side_condition():
    ok = check_rule("v", ([p], p, q))
    assert ok.agree is True
    bad = check_rule("v", ([BOT], p, q))
    assert bad.agree is None  # A_i inconsistent: not applicable


def test_rule_i_and_iv_and_vi_random_spots():
    for rule, inst in [
        ("i", (parse("p -> p"),)),
        ("i", (p,)),
        ("iv", (p, q)),
        ("iv", (Diamond(p), p)),
        ("vi", (Top(),)),
        ("vi", (p,)),
    ]:
        rep = check_rule(rule, inst)
        assert rep.agree is True, (rule, inst)


# --- delta1 -------------------------------------------------------------------


def test_delta1_top_bottom_no():
    assert classify_delta1(Top()).answer == "top"
    assert classify_delta1(BOT).answer == "bottom"
    rep = classify_delta1(p)
    assert rep.answer == "no"
    assert isinstance(rep.top_verdict, Refuted)
    assert isinstance(rep.bottom_verdict, Refuted)
    assert rep.cross_agrees is True


def test_delta1_equivalent_to_top():
    rep = classify_delta1(parse("[]([]p -> p) -> []p"))
    assert rep.answer == "top"
    assert rep.cross_agrees is True


# --- sigma1 -------------------------------------------------------------------


def test_sigma1_yes_cases():
    for s, witness_expected in [("[]p", "[]p"), ("[]p | []q", "[]p | []q"), ("[]bot", "[]bot"), ("bot", "bot")]:
        rep = classify_sigma1(parse(s))
        assert rep.answer == "yes", s
        assert rep.witness is not None and render(rep.witness) == witness_expected


def test_sigma1_top_has_box_witness():
    rep = classify_sigma1(Top())
    assert rep.answer == "yes"
    assert rep.witness is not None
    assert isinstance(derivable(ILM, parse(f"top <-> ({render(rep.witness)})")), Derivable)


def test_sigma1_no_cases_with_countermodels():
    for s in ["p", "<>p", "p & []p"]:
        rep = classify_sigma1(parse(s))
        assert rep.answer == "no", s
        model, world = rep.countermodel
        assert validate_ilm(model.frame).ok
        assert forces(model, world, Neg(rep.reduction_query))


def test_sigma1_witness_is_box_disjunction():
    from ilkit.classify import _is_box_disjunction

    for s in ["[]p", "[]p | []q", "bot", "[]bot"]:
        rep = classify_sigma1(parse(s))
        assert _is_box_disjunction(rep.witness)


def test_sigma1_countermodel_seeded():
    for s in ["p", "p & []p"]:
        cm = sigma1_countermodel(parse(s))
        assert cm.world == "m0"
        assert validate_ilm(cm.model.frame).ok
        assert not forces(cm.model, "m0", cm.query)
        pa, qa = cm.fresh
        # the fresh atoms decorate exactly the two seed worlds
        only_p = [w for w in cm.model.frame.worlds if pa.name in cm.model.val[w]]
        only_q = [w for w in cm.model.frame.worlds if qa.name in cm.model.val[w]]
        assert only_p == ["l"] and only_q == ["r"]
        assert forces(cm.model, "l", parse(s))
        assert not forces(cm.model, "r", parse(s))


def test_sigma1_countermodel_rejects_sigma_formula():
    with pytest.raises(ValueError):
        sigma1_countermodel(Box(p))


# --- self provers ---------------------------------------------------------------


def test_self_provers():
    assert isinstance(is_self_prover(Box(p)), Derivable)
    assert isinstance(is_self_prover(And(p, Box(p))), Derivable)
    assert isinstance(is_self_prover(p), Refuted)
    assert isinstance(is_self_prover(parse("[]p"), logic=GL), Derivable)


def test_tsg_suite():
    rep = is_tsg(parse("[][]p -> []p"))
    assert rep.answer == "yes"
    assert render(rep.witness) == "[]p"
    assert is_tsg(And(p, Box(p))).answer == "no"
    rep2 = is_tsg(Box(p))
    assert rep2.answer == "yes"


def test_tsg_matches_sigma_of_selfprover():
    for s in ["p", "[]p", "p & []p", "[][]p -> []p", "<>p"]:
        f = parse(s)
        assert is_tsg(f).answer == classify_sigma1(And(f, Box(f))).answer


# --- decompositions ---------------------------------------------------------------


def test_dnf_already_shaped():
    d = canonical_modal_dnf(parse("[]p | (q & []r)"))
    assert [render(c) for c in d.boxes] == ["p"]
    assert len(d.conjuncts) == 1
    phi, a = d.conjuncts[0]
    assert [render(x) for x in phi] == ["q"]
    assert render(a) == "r"
    assert d.flags == ()


def test_dnf_merges_boxes():
    d = canonical_modal_dnf(parse("[]p & []q"))
    assert d.conjuncts == ()
    assert [render(c) for c in d.boxes] == ["p & q"]
    assert isinstance(derivable(GL, parse("[]p & []q <-> [](p & q)")), Derivable)


def test_dnf_bot_empty():
    d = canonical_modal_dnf(BOT)
    assert d.conjuncts == () and d.boxes == () and d.flags == ()
    assert d.formula() == BOT


def test_dnf_flags_empty_disjunct():
    d = canonical_modal_dnf(Top())
    assert any("empty disjunct" in fl for fl in d.flags)


def test_dnf_equivalence_certified():
    for s in ["[][]p -> []p", "[]p | (q & []r)", "p", "<>p | []q"]:
        f = parse(s)
        d = canonical_modal_dnf(f)
        assert isinstance(derivable(ILM, parse(f"({render(f)}) <-> ({render(d.formula())})")), Derivable), s


def test_check_tsg_decomposition_prominent():
    f = parse("[][]p -> []p")
    d = canonical_modal_dnf(f)
    rep = check_tsg_decomposition(f, d)
    assert rep.conditions_ok is True
    assert isinstance(rep.equivalent, Derivable)
    assert all(isinstance(v, Refuted) for v in rep.irredundant)
    assert rep.conclusion.kind == is_tsg(f).verdict.kind == "derivable"


def test_check_tsg_decomposition_box():
    f = Box(p)
    d = canonical_modal_dnf(f)
    rep = check_tsg_decomposition(f, d)
    assert rep.conditions_ok is True
    assert isinstance(rep.conclusion, Derivable)


def test_condition2_violation_flagged_not_asserted():
    from ilkit.classify import TsgDecomposition

    # hand-built decomposition violating condition 2: q & []p with []p -> f
    f = parse("[]p | (q & []p)")
    d = TsgDecomposition(((tuple([q]), p),), (p,), ())
    rep = check_tsg_decomposition(f, d)
    assert any(isinstance(v, Derivable) for v in rep.irredundant)
    assert rep.conditions_ok is False


# --- almost-Löb and the dagger bicondition -----------------------------------------


def test_almost_loeb():
    rep = almost_loeb(Top())
    assert rep.witness == "boxbot"
    assert isinstance(rep.certificate, Derivable)
    rep2 = almost_loeb(BOT)
    assert rep2.witness == "bottom"
    assert isinstance(rep2.certificate, Derivable)
    rep3 = almost_loeb(p)
    assert rep3.witness is None
    assert isinstance(rep3.boxbot_verdict, Refuted)
    assert isinstance(rep3.bottom_verdict, Refuted)


def test_dagger_top():
    rep = dagger_check(Top())
    assert rep.sigma_f.answer == "yes"
    assert rep.dagger_holds is True
    assert rep.biconditional_ok is True


def test_dagger_p():
    rep = dagger_check(p)
    assert rep.sigma_selfprover.answer == "no"
    assert rep.dagger_holds is True
    assert rep.biconditional_ok is True


def test_dagger_prominent_tsg_computed_not_hardcoded():
    rep = dagger_check(parse("[][]p -> []p"))
    assert rep.sigma_selfprover.answer == "yes"
    assert rep.sigma_antiprover.answer == "yes"
    assert rep.sigma_f.answer == "no"
    assert rep.dagger_holds is False
    assert rep.biconditional_ok is True


def test_sigma1_witness_invariant_random_corpus():
    # whenever the answer is yes and a witness was found, the witness is a
    # disjunction of boxes and certified equivalent
    import random

    from conftest import random_formula
    from ilkit.classify import _is_box_disjunction
    from ilkit.syntax import Iff

    rng = random.Random(97)
    yes_seen = 0
    for _ in range(40):
        f = random_formula(rng, 2, allow_rhd=False)
        rep = classify_sigma1(f)
        if rep.answer == "yes" and rep.witness is not None:
            yes_seen += 1
            assert _is_box_disjunction(rep.witness), render(rep.witness)
            assert isinstance(derivable(ILM, Iff(f, rep.witness)), Derivable)
    assert yes_seen >= 3
