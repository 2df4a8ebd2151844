"""Workbench for random context, semi-conditional and CD grammar systems."""

import types as _types

from .cd import CDEngine, TModeStep, cd_membership_witness, enumerate_bounded_cd, t_step_successors
from .derivation import (
    DEFAULT_MAX_FORMS,
    ContractError,
    DerivationStep,
    LanguageSample,
    ResourceLimit,
    applicable,
    enumerate_bounded,
    membership_witness,
    replay,
    successors,
)
from .dsl import GrammarSyntaxError, grammar_digest, load_grammar, parse_grammar, render_grammar
from .equivalence import EquivVerdict, FuzzReport, GrammarShape, bounded_equiv, fuzz_pipeline, random_grammar
from .grammar import CDSystem, Grammar, Production, conds
from .oracle import oracle_words
from .symbols import Atom, Indexed, Packed, Primed, SetTagged, Staged, Symbol
from .transforms import (
    OPS,
    TransformError,
    TransformReport,
    apply_transform,
    pcd_to_sc,
    rc_def1_to_def2,
    rc_def2_to_def1,
    rc_limited_normal_form,
    rc_normalize_forbid,
    rc_to_permitting_cd,
    run_pipeline,
    sc_def1_to_def2,
    sc_def2_to_def1,
    sc_def2_to_rc,
)
from .validate import ValidationReport, Violation, validate_grammar

__all__ = sorted(n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _types.ModuleType))
