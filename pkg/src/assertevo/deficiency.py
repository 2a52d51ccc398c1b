"""Sampling-based search for false positives and false negatives of an assertion.

False positives are correct states (reference executions) on which the
assertion fails or errors. False negatives are mutant states that differ from
the reference state of the same input in at least one variable the assertion
reads, yet the assertion passes. An assertion that reads no variable at all
cannot notice anything, so for it every differing mutant state counts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .expr import Expr, variables_of
from .state import DEFAULT_PRECISION, ProgramState
from .subjects import Subject, differs, run_and_capture, sample_inputs

DEFAULT_BUDGET = 10_000
DEFAULT_K = 10
CHUNK = 500


@dataclass
class DeficiencyReport:
    fp_states: list = field(default_factory=list)
    fn_states: list = field(default_factory=list)
    inputs_examined: int = 0
    exhausted: bool = False

    def to_json(self) -> dict:
        return {
            "fp_states": [s.to_json() for s in self.fp_states],
            "fn_states": [s.to_json() for s in self.fn_states],
            "inputs_examined": self.inputs_examined,
            "exhausted": self.exhausted,
        }


def _outcomes(e: Expr, subject: Subject, states, digits: int) -> np.ndarray:
    names = subject.signature.names
    data = np.array([[float(s.vars[n]) for n in names] for s in states], dtype=np.float64)
    return kernel.run(kernel.compile_expr(e, subject.signature), data, digits)


def _search_fp(subject, e, budget, rng, k, digits):
    found = []
    examined = 0
    while examined < budget and len(found) < k:
        batch = sample_inputs(subject, min(CHUNK, budget - examined), rng)
        states = [run_and_capture(subject, inputs, mutants=[], digits=digits,
                                  origin="deficiency-fp").correct for inputs in batch]
        out = _outcomes(e, subject, states, digits)
        for i, state in enumerate(states):
            if out[i] != kernel.PASS:
                found.append(state)
                if len(found) == k:
                    examined += i + 1
                    break
        else:
            examined += len(batch)
    return found, examined


def _search_fn(subject, e, budget, rng, k, digits, mutants):
    referenced = sorted(variables_of(e)) or subject.signature.names
    ids = subject.training_mutants if mutants is None else list(mutants)
    found = []
    examined = 0
    if not ids:
        return found, 0
    while examined < budget and len(found) < k:
        batch = sample_inputs(subject, min(CHUNK, budget - examined), rng)
        candidates = []  # (input position, state)
        for pos, inputs in enumerate(batch):
            run = run_and_capture(subject, inputs, mutants=ids, digits=digits,
                                  origin="deficiency-fn")
            for state in run.mutants.values():
                if state is not None and differs(state, run.correct, referenced):
                    candidates.append((pos, state))
        if candidates:
            out = _outcomes(e, subject, [s for _, s in candidates], digits)
            for j, (pos, state) in enumerate(candidates):
                if out[j] == kernel.PASS:
                    found.append(state)
                    if len(found) == k:
                        examined += pos + 1
                        break
            else:
                examined += len(batch)
        else:
            examined += len(batch)
    return found, examined


def find_false_positives(subject: Subject, e: Expr, budget: int = DEFAULT_BUDGET,
                         rng: random.Random | None = None, *, k: int = DEFAULT_K,
                         digits: int = DEFAULT_PRECISION) -> list[ProgramState]:
    """Up to ``k`` correct states, from at most ``budget`` fresh inputs, on
    which ``e`` fails or errors."""
    rng = random.Random() if rng is None else rng
    return _search_fp(subject, e, budget, rng, k, digits)[0]


def find_false_negatives(subject: Subject, e: Expr, budget: int = DEFAULT_BUDGET,
                         rng: random.Random | None = None, *, k: int = DEFAULT_K,
                         digits: int = DEFAULT_PRECISION, mutants=None) -> list[ProgramState]:
    """Up to ``k`` mutant states on which ``e`` passes although a variable it
    reads differs from the reference execution. Training mutants by default."""
    rng = random.Random() if rng is None else rng
    return _search_fn(subject, e, budget, rng, k, digits, mutants)[0]


def check(subject: Subject, e: Expr, budget: int = DEFAULT_BUDGET,
          rng: random.Random | None = None, *, k: int = DEFAULT_K,
          digits: int = DEFAULT_PRECISION, mutants=None) -> DeficiencyReport:
    """Run both searches on independent input streams derived from ``rng``."""
    rng = random.Random() if rng is None else rng
    fp_rng = random.Random(rng.getrandbits(64))
    fn_rng = random.Random(rng.getrandbits(64))
    fps, n_fp = _search_fp(subject, e, budget, fp_rng, k, digits)
    fns, n_fn = _search_fn(subject, e, budget, fn_rng, k, digits, mutants)
    return DeficiencyReport(fps, fns, n_fp + n_fn, exhausted=not fps and not fns)
