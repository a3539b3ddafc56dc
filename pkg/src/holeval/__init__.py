"""holeval: evaluate functional programs with typed holes.

The engine elaborates a bidirectionally-typed external language into a cast
calculus whose dynamics evaluate around holes and failed casts, tracks the
environments recorded on hole closures for live inspection, and supports
filling a hole in an evaluated result and resuming evaluation.
"""

from .syntax import (
    Arrow,
    BASE,
    Base,
    EmptyClosure,
    EmptyHole,
    Env,
    HOLE,
    Hole,
    HoleContext,
    IntExpr,
    NUM,
    Num,
    Sum,
    Ty,
    TypingCtx,
    alpha_equiv,
)
from .statics import ana, consistent, ground, ground_match, join, matched_arrow, matched_sum, syn
from .elaboration import ElabResult, assign_type, elab_ana, elab_syn
from .dynamics import is_boxed_value, is_final, is_indet, is_value, multi_step, step
from .fill import fill, fill_typed, resume
from .closures import index_closures, inspect
from .surface import parse, print_ext, print_int, print_ty

__all__ = [
    "Arrow",
    "BASE",
    "Base",
    "ElabResult",
    "EmptyClosure",
    "EmptyHole",
    "Env",
    "HOLE",
    "Hole",
    "HoleContext",
    "IntExpr",
    "NUM",
    "Num",
    "Sum",
    "Ty",
    "TypingCtx",
    "alpha_equiv",
    "ana",
    "assign_type",
    "consistent",
    "elab_ana",
    "elab_syn",
    "fill",
    "fill_typed",
    "ground",
    "ground_match",
    "index_closures",
    "inspect",
    "is_boxed_value",
    "is_final",
    "is_indet",
    "is_value",
    "join",
    "matched_arrow",
    "matched_sum",
    "multi_step",
    "parse",
    "print_ext",
    "print_int",
    "print_ty",
    "resume",
    "step",
    "syn",
]
