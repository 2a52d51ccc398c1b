"""False-positive / false-negative counting and the two lexicographic orders."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import kernel
from .expr import Expr
from .state import NEGATIVE, POSITIVE, StateRepo

FP_POP = "fp"
FN_POP = "fn"


class FitnessVector(NamedTuple):
    fp: int
    fn: int
    size: int

    def to_json(self) -> dict:
        return {"fp": self.fp, "fn": self.fn, "size": self.size}


def sort_key(objective: str, f: FitnessVector) -> tuple[int, int, int]:
    if objective == FP_POP:
        return (f.fp, f.fn, f.size)
    if objective == FN_POP:
        return (f.fn, f.fp, f.size)
    raise ValueError(f"unknown objective {objective!r}")


def better_for(objective: str, a: FitnessVector, b: FitnessVector) -> int:
    """-1 if ``a`` is better than ``b`` under ``objective``, 1 if worse, 0 on a tie."""
    ka, kb = sort_key(objective, a), sort_key(objective, b)
    return (ka > kb) - (ka < kb)


def outcomes(e: Expr, repo: StateRepo, label: str) -> np.ndarray:
    data, _ = repo.matrix(label)
    if data.shape[0] == 0:
        return np.zeros(0, dtype=np.int8)
    return kernel.run(kernel.compile_expr(e, repo.signature), data, repo.precision)


def count_deficiencies(e: Expr, repo: StateRepo) -> FitnessVector:
    """Weighted FP count over the positives and FN count over the negatives.

    A state on which evaluation errors counts as failing: an FP when correct,
    never an FN.
    """
    program = kernel.compile_expr(e, repo.signature)
    fp = fn = 0
    data, weights = repo.matrix(POSITIVE)
    if len(weights):
        out = kernel.run(program, data, repo.precision)
        fp = int(weights[out != kernel.PASS].sum())
    data, weights = repo.matrix(NEGATIVE)
    if len(weights):
        out = kernel.run(program, data, repo.precision)
        fn = int(weights[out == kernel.PASS].sum())
    return FitnessVector(fp, fn, e.size)
