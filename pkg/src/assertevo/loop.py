"""The improvement loop: evolve, look for deficiencies, grow the repository, repeat.

After the loop, the initial and the improved assertion are validated on fresh
inputs and held-out mutants. Validation counts false positives on correct
states; when there are none it reports the mutation score, otherwise it first
drops the conjuncts that have false positives and scores what is left.
"""

from __future__ import annotations

import dataclasses
import logging
import random
import re
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .deficiency import DEFAULT_BUDGET, check
from .evolution import EvolutionConfig, evolve
from .expr import Expr, Signature, conjoin, conjuncts, parse, to_text
from .fitness import FP_POP, count_deficiencies, sort_key
from .state import DEFAULT_PRECISION, NEGATIVE, POSITIVE
from .subjects import Subject, differs, get_subject, init_repo, run_and_capture, sample_inputs

log = logging.getLogger(__name__)

MAX_ITERATIONS = 20

_DURATION_RE = re.compile(r"(\d+(?:\.\d*)?)\s*(ms|s|m|h)?\Z")
_UNITS = {"ms": 0.001, "s": 1.0, "m": 60.0, "h": 3600.0, None: 1.0}


@dataclass(frozen=True)
class Budget:
    """Wall-clock seconds, a generation count, or both (whichever ends first)."""

    seconds: float | None = None
    generations: int | None = None

    @classmethod
    def parse(cls, text: str) -> "Budget":
        """``"30s"``, ``"5m"``, ``"1.5h"``, ``"250ms"``, ``"90"`` (seconds) or ``"gens:200"``."""
        text = text.strip().lower()
        if text.startswith("gens:"):
            n = text[5:]
            if not n.isdigit():
                raise ValueError(f"bad generation budget {text!r}")
            return cls(generations=int(n))
        m = _DURATION_RE.match(text)
        if m is None:
            raise ValueError(f"bad budget {text!r}; use e.g. 30s, 5m or gens:200")
        return cls(seconds=float(m.group(1)) * _UNITS[m.group(2)])

    def scaled(self, factor: float) -> "Budget":
        return Budget(
            None if self.seconds is None else self.seconds * factor,
            None if self.generations is None else int(self.generations * factor),
        )

    def to_json(self) -> dict:
        return {"seconds": self.seconds, "generations": self.generations}


@dataclass
class RunConfig:
    subject: str
    assertion: str | None = None            # default: the subject's initial assertion
    internal_budget: Budget = field(default_factory=lambda: Budget(seconds=30.0))
    global_budget: Budget | None = None     # default: 3x internal
    init_size: int = 100
    validation_size: int = 10_000
    deficiency_budget: int = DEFAULT_BUDGET
    max_iterations: int = MAX_ITERATIONS
    validation_mutants: list | None = None  # default: the subject's held-out split
    seed: int = 0
    precision: int = DEFAULT_PRECISION
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)

    def __post_init__(self):
        if self.global_budget is None:
            self.global_budget = self.internal_budget.scaled(3)
        for name in ("init_size", "validation_size", "deficiency_budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.max_iterations <= MAX_ITERATIONS:
            raise ValueError(f"max_iterations must be in [0, {MAX_ITERATIONS}]")

    def stream(self, name: str, *parts) -> random.Random:
        """Independent, reproducible random stream for one purpose."""
        return random.Random(":".join([str(self.seed), name, *map(str, parts)]))

    def to_json(self) -> dict:
        evo = self.evolution.to_json()
        for key in ("seed", "time_budget", "max_generations", "threads"):
            evo.pop(key)
        return {
            "subject": self.subject,
            "assertion": self.assertion,
            "internal_budget": self.internal_budget.to_json(),
            "global_budget": self.global_budget.to_json(),
            "init_size": self.init_size,
            "validation_size": self.validation_size,
            "deficiency_budget": self.deficiency_budget,
            "max_iterations": self.max_iterations,
            "validation_mutants": self.validation_mutants,
            "seed": self.seed,
            "precision": self.precision,
            "evolution": evo,
        }


# --------------------------------------------------------------------------
# validation

@dataclass
class ValidationSet:
    signature: Signature
    positives: np.ndarray
    negatives: np.ndarray
    negative_mutants: list  # mutant id per negative row
    mutants: list
    digits: int


def validation_set(subject: Subject, n: int, rng: random.Random, mutants,
                   digits: int = DEFAULT_PRECISION) -> ValidationSet:
    names = subject.signature.names
    pos, neg, owner = [], [], []
    for inputs in sample_inputs(subject, n, rng):
        run = run_and_capture(subject, inputs, mutants=mutants, digits=digits,
                              origin="validation")
        pos.append([float(run.correct.vars[k]) for k in names])
        for m, state in run.mutants.items():
            if state is not None and differs(state, run.correct):
                neg.append([float(state.vars[k]) for k in names])
                owner.append(m)
    width = len(names)
    return ValidationSet(subject.signature,
                         np.array(pos, dtype=np.float64).reshape(-1, width),
                         np.array(neg, dtype=np.float64).reshape(-1, width),
                         owner, list(mutants), digits)


def _run(e: Expr, sig: Signature, data: np.ndarray, digits: int) -> np.ndarray:
    if data.shape[0] == 0:
        return np.zeros(0, dtype=np.int8)
    return kernel.run(kernel.compile_expr(e, sig), data, digits)


def reduce_conjuncts(e: Expr, positives: np.ndarray, sig: Signature,
                     digits: int = DEFAULT_PRECISION) -> Expr | None:
    """Drop each top-level conjunct that fails on any of ``positives``; the
    survivors are re-joined with ``&&`` in their original order."""
    keep = [c for c in conjuncts(e)
            if bool(np.all(_run(c, sig, positives, digits) == kernel.PASS))]
    return conjoin(keep) if keep else None


@dataclass
class ValidationResult:
    assertion: str
    fp: int
    fn: int
    mutation_score: float
    score_defined: bool
    reduced: str | None
    killed: list
    mutants: list
    positives: int
    negatives: int

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def validate_on(e: Expr, vset: ValidationSet) -> ValidationResult:
    out_pos = _run(e, vset.signature, vset.positives, vset.digits)
    fp = int(np.count_nonzero(out_pos != kernel.PASS))
    scored: Expr | None = e
    reduced = None
    if fp:
        scored = reduce_conjuncts(e, vset.positives, vset.signature, vset.digits)
        reduced = None if scored is None else to_text(scored)
    owners = np.array(vset.negative_mutants, dtype=object)
    if scored is None:
        # nothing survives reduction: the assertion is effectively absent
        fn = len(vset.negative_mutants)
        killed = []
    else:
        out_neg = _run(scored, vset.signature, vset.negatives, vset.digits)
        passing = out_neg == kernel.PASS
        fn = int(np.count_nonzero(passing))
        killed = [m for m in vset.mutants if np.any(~passing[owners == m])] if len(owners) else []
    score = len(killed) / len(vset.mutants) if vset.mutants else 0.0
    return ValidationResult(to_text(e), fp, fn, score, scored is not None, reduced,
                            killed, list(vset.mutants), int(vset.positives.shape[0]),
                            int(vset.negatives.shape[0]))


def validation_mutants(subject: Subject, requested=None) -> list:
    if requested:
        unknown = [m for m in requested if m not in subject.mutants]
        if unknown:
            raise ValueError(f"unknown mutants for {subject.name}: {unknown}")
        return list(requested)
    return list(subject.holdout)


def training_mutants(subject: Subject, held_out) -> list:
    if len(subject.mutants) < 6:
        warnings.warn(f"{subject.name} has fewer than 6 mutants; "
                      "validation mutants overlap the training ones", stacklevel=2)
        return subject.mutant_ids
    return [m for m in subject.mutants if m not in held_out]


def validate(subject: Subject, e: Expr, cfg: RunConfig) -> ValidationResult:
    held_out = validation_mutants(subject, cfg.validation_mutants)
    vset = validation_set(subject, cfg.validation_size, cfg.stream("validation"),
                          held_out, cfg.precision)
    return validate_on(e, vset)


# --------------------------------------------------------------------------
# the loop

@dataclass
class ImprovementReport:
    data: dict
    timings: dict

    def to_json(self) -> dict:
        return {**self.data, "timings": self.timings}

    @property
    def improved(self) -> str:
        return self.data["improved_assertion"]


def improve(cfg: RunConfig, progress=None) -> ImprovementReport:
    """Run the full improvement loop for ``cfg`` and validate the result.

    Raises :class:`~assertevo.subjects.UnknownSubject` and
    :class:`~assertevo.expr.ExprError` on bad input.
    """
    t0 = time.monotonic()
    subject = get_subject(cfg.subject)
    sig = subject.signature
    text = cfg.assertion if cfg.assertion is not None else subject.initial_assertion
    alpha0 = parse(text, sig)
    held_out = validation_mutants(subject, cfg.validation_mutants)
    training = training_mutants(subject, held_out)

    repo = init_repo(subject, cfg.init_size, cfg.stream("init"), mutants=training,
                     digits=cfg.precision)
    t_init = time.monotonic() - t0

    g = cfg.global_budget
    deadline = None if g.seconds is None else time.monotonic() + g.seconds
    gens_left = g.generations
    alpha = alpha0
    candidates = [alpha0]
    iterations = []
    iteration_seconds = []
    terminated = "iteration-cap"
    exhausted = False
    for it in range(cfg.max_iterations):
        if deadline is not None and time.monotonic() >= deadline:
            terminated = "budget"
            break
        if gens_left is not None and gens_left <= 0:
            terminated = "budget"
            break
        t_it = time.monotonic()
        max_gens = cfg.internal_budget.generations
        if gens_left is not None:
            max_gens = gens_left if max_gens is None else min(max_gens, gens_left)
        evo_cfg = dataclasses.replace(cfg.evolution, seed=f"{cfg.seed}:evolve:{it}",
                                      time_budget=cfg.internal_budget.seconds,
                                      max_generations=max_gens)
        # alpha0 rides along so no iteration can end worse than the start
        result = evolve(repo, alpha, evo_cfg, deadline=deadline, extra_seeds=(alpha0,))
        if gens_left is not None:
            gens_left -= result.generations
        report = check(subject, result.expr, cfg.deficiency_budget,
                       cfg.stream("deficiency", it), digits=cfg.precision, mutants=training)
        record = {
            "iteration": it,
            "assertion": to_text(result.expr),
            "fitness": result.fitness.to_json(),
            "repo_positives": repo.weight(POSITIVE),
            "repo_negatives": repo.weight(NEGATIVE),
            "generations": result.generations,
            "evaluated": result.evaluated,
            "perfect_on_repo": result.perfect,
            "zero_fp_explored": result.zero_fp_explored,
            "fp_found": len(report.fp_states),
            "fn_found": len(report.fn_states),
            "inputs_examined": report.inputs_examined,
        }
        iterations.append(record)
        iteration_seconds.append(time.monotonic() - t_it)
        if progress is not None:
            progress(record)
        log.info("iteration %d: %s %s fp_found=%d fn_found=%d", it, record["assertion"],
                 result.fitness, record["fp_found"], record["fn_found"])
        alpha = result.expr
        candidates.append(alpha)
        if report.exhausted:
            exhausted = True
            terminated = "no-deficiencies"
            break
        for state in report.fp_states:
            repo.ingest(state, POSITIVE)
        for state in report.fn_states:
            repo.ingest(state, NEGATIVE)

    if exhausted:
        improved = alpha
    else:
        # the last candidate was not re-evolved against the states found for it
        scored = [(sort_key(FP_POP, count_deficiencies(c, repo)), -i, c)
                  for i, c in enumerate(candidates)]
        improved = min(scored, key=lambda t: (t[0], t[1]))[2]

    t_loop = time.monotonic()
    vset = validation_set(subject, cfg.validation_size, cfg.stream("validation"),
                          held_out, cfg.precision)
    v_initial = validate_on(alpha0, vset)
    v_improved = validate_on(improved, vset)
    t_validate = time.monotonic() - t_loop

    data = {
        "subject": subject.name,
        "initial_assertion": to_text(alpha0),
        "improved_assertion": to_text(improved),
        "training": {
            "initial": count_deficiencies(alpha0, repo).to_json(),
            "improved": count_deficiencies(improved, repo).to_json(),
            "positives": repo.weight(POSITIVE),
            "negatives": repo.weight(NEGATIVE),
            "distinct_positives": len(repo.positives),
            "distinct_negatives": len(repo.negatives),
        },
        "iterations_executed": len(iterations),
        "terminated": terminated,
        "iterations": iterations,
        "training_mutants": training,
        "validation": {"initial": v_initial.to_json(), "improved": v_improved.to_json()},
        "config": cfg.to_json(),
    }
    timings = {
        "init_seconds": t_init,
        "iteration_seconds": iteration_seconds,
        "validation_seconds": t_validate,
        "total_seconds": time.monotonic() - t0,
    }
    return ImprovementReport(data, timings)
