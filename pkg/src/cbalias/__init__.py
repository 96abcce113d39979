"""Call-by-alias: one monadic translation, several evaluation strategies."""

from .effects import Config, ParReport, Trace, flatten_nested, run_par, run_seq
from .evaluator import RunResult, StageError, eval_target, run_program
from .laws import check_at_most_once, check_equivalence, check_malias_laws, check_source_transforms
from .parser import ParseError, parse_expr, parse_program, parse_type
from .strategies import StrategyId, get_strategy
from .translate import (
    translate_cba,
    translate_cbn,
    translate_cbv,
    translate_program,
    translate_type_cba,
    translate_type_cbv,
    verify_typing_preservation,
)
from .typecheck import TypeCheckError, check_program, check_target, infer_source

__version__ = "0.1.0"
