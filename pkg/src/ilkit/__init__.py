"""Workbench for the interpretability logics GL, IL and ILM: finite
Veltman semantics, decision procedures with certified countermodels, and
sentence classification."""

from .syntax import (
    AdequateSet,
    And,
    Atom,
    BOT,
    Bot,
    Box,
    Diamond,
    Formula,
    Iff,
    Implies,
    Neg,
    Or,
    ParseError,
    Rhd,
    Top,
    adequate_closure,
    fresh_atoms,
    parse,
    render,
    subformulas,
)
from .semantics import (
    GL,
    IL,
    ILM,
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
from .theory import (
    DTheory,
    box_incl,
    common_predecessor,
    crit_succ,
    enumerate_theories,
    extend_deficiency_ilm,
    extend_problem,
    succ,
)
from .construction import (
    LabeledFrame,
    check_mcone_invariance,
    close,
    close_frame,
    critical_cone,
    depth,
    find_deficiencies,
    find_imperfections,
    find_problems,
    generalized_cone,
    m_cone,
    verify_truth_lemma,
)
from .decide import (
    Budget,
    Derivable,
    Proof,
    ProofLine,
    Refuted,
    Unknown,
    axiom_instance,
    check_proof,
    countermodel,
    derivable,
    parse_proof,
    render_proof,
    satisfiable,
)
from .classify import (
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

__version__ = "0.1.0"
