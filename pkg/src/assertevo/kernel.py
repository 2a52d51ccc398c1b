"""Batch evaluation of assertions over state matrices.

An :class:`~assertevo.expr.Expr` is compiled into a postfix program (opcode
and operand arrays) that a backend runs against every row of a float64 matrix
whose columns follow a :class:`~assertevo.expr.Signature`. Booleans are stored
as 0.0/1.0.

Two backends exist: the compiled ``_ckernel`` extension and the numpy
``_pykernel`` fallback. The extension is used when it imports, unless the
environment variable ``ASSERTEVO_PURE_PYTHON`` is set to a non-empty value.
Both backends produce identical outcome arrays.
"""

from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

from . import _pykernel
from .expr import Expr, Signature

# longest program the compiled kernel's fixed stack accepts
MAX_COMPILED_PROGRAM = 128

PASS = 1
FAIL = 0
ERROR = -1

# opcodes shared with both backends
OP_VAR, OP_CONST, OP_NOT = 0, 1, 2
OPCODES = {
    "+": 10, "-": 11, "*": 12, "/": 13, "%": 14,
    "==": 20, "!=": 21, "<": 22, "<=": 23, ">": 24, ">=": 25,
    "&&": 30, "||": 31, "^": 32, "->": 33, "<=>": 34,
}


class Program(NamedTuple):
    codes: np.ndarray      # int32
    operands: np.ndarray   # float64, column index for OP_VAR, value for OP_CONST


def compile_expr(e: Expr, sig: Signature) -> Program:
    codes: list[int] = []
    operands: list[float] = []
    index = sig._index

    def emit(node):
        op = node.op
        if op == "var":
            codes.append(OP_VAR)
            operands.append(float(index[node.name]))
            return
        if op == "const":
            codes.append(OP_CONST)
            operands.append(node.value)
            return
        for arg in node.args:
            emit(arg)
        codes.append(OP_NOT if op == "!" else OPCODES[op])
        operands.append(0.0)

    emit(e)
    return Program(np.asarray(codes, dtype=np.int32), np.asarray(operands, dtype=np.float64))


def _load_backend():
    if os.environ.get("ASSERTEVO_PURE_PYTHON"):
        return _pykernel
    try:
        from . import _ckernel
    except ImportError:
        return _pykernel
    return _ckernel


backend = _load_backend()
BACKEND = "cython" if backend is not _pykernel else "python"


def run(program: Program, data, digits: int = 9, impl=None) -> np.ndarray:
    """Outcome per row: ``PASS`` (1), ``FAIL`` (0) or ``ERROR`` (-1)."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("state matrix must be two-dimensional")
    impl = backend if impl is None else impl
    if impl is not _pykernel and len(program.codes) > MAX_COMPILED_PROGRAM:
        impl = _pykernel
    return impl.run_program(program.codes, program.operands, data, float(10.0 ** digits))
