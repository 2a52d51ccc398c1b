"""Co-evolutionary improvement of assertion oracles."""

from .expr import (
    BOOL,
    NUM,
    EvalError,
    Expr,
    ExprError,
    ParseError,
    Signature,
    TypeCheckError,
    UnknownIdentifier,
    depth,
    evaluate,
    parse,
    size,
    to_text,
)
from .kernel import BACKEND

__version__ = "0.1.0"
