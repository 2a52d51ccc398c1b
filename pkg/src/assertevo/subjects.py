"""Built-in subject programs with hand-seeded mutants.

Each subject models one method: its parameters, the locals visible at the
assertion point, a reference implementation and a handful of faulty variants.
Executions are captured twice, as an instrumented method would be: parameter
values on entry (stored with an ``old_`` prefix) and parameters plus locals at
the assertion point.

Implementations take the input map and return the assertion-point values of
the parameters and locals. A mutant that raises (division by zero, a runaway
loop) is recorded as faulted and contributes no state.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .expr import NUM, Signature, format_number
from .state import DEFAULT_PRECISION, NEGATIVE, POSITIVE, ProgramState, StateRepo, normalize_vars

BOUNDARY_PROB = 0.3
LOOP_LIMIT = 1000


class Fault(RuntimeError):
    """A mutant execution that never reaches the assertion point."""


class UnknownSubject(KeyError):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    low: float
    high: float
    decimals: int | None = None  # None: integer-valued

    def boundaries(self) -> list[float]:
        values = [self.low, self.high]
        for v in (0.0, 1.0, -1.0):
            if self.low <= v <= self.high:
                values.append(v)
        return values

    def draw(self, rng: random.Random) -> float:
        if rng.random() < BOUNDARY_PROB:
            if rng.random() < 0.5:
                return float(rng.choice(self.boundaries()))
            # an integral point inside the range
            return float(rng.randint(math.ceil(self.low), math.floor(self.high)))
        if self.decimals is None:
            return float(rng.randint(int(self.low), int(self.high)))
        return round(rng.uniform(self.low, self.high), self.decimals) + 0.0


@dataclass
class Subject:
    name: str
    description: str
    params: tuple[Param, ...]
    locals: tuple[tuple[str, str], ...]
    reference: Callable[[dict], dict]
    mutants: dict[str, Callable[[dict], dict]]
    initial_assertion: str
    holdout: tuple[str, ...] = ()
    normalize_input: Callable[[dict], dict] | None = None
    signature: Signature = field(init=False)

    def __post_init__(self):
        entries = [("old_" + p.name, NUM) for p in self.params]
        entries += [(p.name, NUM) for p in self.params]
        entries += list(self.locals)
        self.signature = Signature(entries)
        if not self.holdout:
            ids = list(self.mutants)
            self.holdout = tuple(ids[len(ids) - math.ceil(len(ids) / 3):])

    @property
    def mutant_ids(self) -> list[str]:
        return list(self.mutants)

    @property
    def training_mutants(self) -> list[str]:
        return [m for m in self.mutants if m not in self.holdout]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "signature": self.signature.to_json(),
            "parameters": [
                {"name": p.name, "low": p.low, "high": p.high, "decimals": p.decimals}
                for p in self.params
            ],
            "mutants": self.mutant_ids,
            "training_mutants": self.training_mutants,
            "holdout_mutants": list(self.holdout),
            "initial_assertion": self.initial_assertion,
        }


@dataclass
class CapturedRun:
    input: str
    correct: ProgramState
    mutants: dict  # mutant id -> ProgramState, or None when faulted

    @property
    def faulted(self) -> list[str]:
        return [m for m, s in self.mutants.items() if s is None]


def fingerprint(inputs: dict) -> str:
    return ", ".join(f"{k}={format_number(float(v))}" for k, v in inputs.items())


def sample_inputs(subject: Subject, n: int, rng: random.Random) -> list[dict]:
    """``n`` inputs mixing uniform draws with boundary and integral points."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    for _ in range(n):
        inputs = {p.name: p.draw(rng) for p in subject.params}
        if subject.normalize_input is not None:
            inputs = subject.normalize_input(inputs)
        out.append(inputs)
    return out


def _capture(subject, impl, inputs, digits, origin, mutant=None):
    try:
        values = impl(dict(inputs))
    except (Fault, ZeroDivisionError, OverflowError):
        return None
    raw = {"old_" + k: v for k, v in inputs.items()}
    raw.update(values)
    for k, v in raw.items():
        if not isinstance(v, bool) and not math.isfinite(v):
            return None
    return ProgramState(normalize_vars(subject.signature, raw, digits), origin,
                        fingerprint(inputs), mutant)


def run_and_capture(subject: Subject, inputs: dict, *, mutants=None,
                    digits: int = DEFAULT_PRECISION, origin: str = "init-test") -> CapturedRun:
    """Execute the reference and each mutant (all of them by default) on ``inputs``."""
    for p in subject.params:
        if not p.low <= inputs[p.name] <= p.high:
            raise ValueError(f"{p.name}={inputs[p.name]} outside [{p.low}, {p.high}]")
    correct = _capture(subject, subject.reference, inputs, digits, origin)
    if correct is None:
        raise RuntimeError(f"reference implementation of {subject.name} faulted on {inputs}")
    ids = subject.mutant_ids if mutants is None else mutants
    states = {m: _capture(subject, subject.mutants[m], inputs, digits, origin, m) for m in ids}
    return CapturedRun(correct.input, correct, states)


def differs(a: ProgramState, b: ProgramState, names=None) -> bool:
    names = a.vars.keys() if names is None else names
    return any(a.vars[n] != b.vars[n] for n in names)


def init_repo(subject: Subject, n: int, rng: random.Random, *, mutants=None,
              digits: int = DEFAULT_PRECISION) -> StateRepo:
    """Correct states of ``n`` sampled inputs, plus every mutant state that
    differs from the correct state of the same input. Training mutants are
    used unless ``mutants`` is given."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ids = subject.training_mutants if mutants is None else list(mutants)
    repo = StateRepo(subject.signature, precision=digits, subject=subject.name)
    for inputs in sample_inputs(subject, n, rng):
        run = run_and_capture(subject, inputs, mutants=ids, digits=digits)
        repo.ingest(run.correct, POSITIVE)
        for state in run.mutants.values():
            if state is not None and differs(state, run.correct):
                repo.ingest(state, NEGATIVE)
    return repo


# --------------------------------------------------------------------------
# subject programs

def _trunc(v: float) -> float:
    return float(math.trunc(v))


def _floor_model(off=0, cond=lambda x, y: x < 0 and y != x, step=-1, result_fn=None):
    def impl(s):
        x = s["x"]
        y = _trunc(x) + off
        if cond(x, y):
            y = y + step
        result = y if result_fn is None else result_fn(x, y)
        return {"x": x, "y": y, "result": result}
    return impl


FAST_FLOOR = Subject(
    name="fast_floor",
    description="cast-based floor with a correction branch for negative non-integral input",
    params=(Param("x", -100.0, 100.0, decimals=3),),
    locals=(("y", NUM), ("result", NUM)),
    reference=_floor_model(),
    mutants={
        "M1": _floor_model(off=-1),
        "M2": _floor_model(cond=lambda x, y: x > 0 and y != x),
        "M3": _floor_model(cond=lambda x, y: x < 0 and y == x),
        "M4": _floor_model(step=+1),
        "M5": _floor_model(result_fn=lambda x, y: x),
        "M6": _floor_model(off=+1),
        "M7": _floor_model(result_fn=lambda x, y: y - 1),
        "M8": _floor_model(result_fn=lambda x, y: y + 1),
        "M9": _floor_model(cond=lambda x, y: False),
        "M10": _floor_model(cond=lambda x, y: x < 0 or y != x),
    },
    holdout=("M8", "M9", "M10"),
    initial_assertion="(y == result) && (x > result)",
)


def _abs_model(cond=lambda x: x < 0, neg=lambda x: -x, pos=lambda x: x):
    def impl(s):
        x = s["x"]
        result = neg(x) if cond(x) else pos(x)
        return {"x": x, "result": result}
    return impl


ABS = Subject(
    name="abs",
    description="absolute value",
    params=(Param("x", -100.0, 100.0, decimals=2),),
    locals=(("result", NUM),),
    reference=_abs_model(),
    mutants={
        "M1": _abs_model(neg=lambda x: x),
        "M2": _abs_model(pos=lambda x: -x),
        "M3": _abs_model(cond=lambda x: x < 10),
        "M4": _abs_model(neg=lambda x: 1 - x),
        "M5": _abs_model(cond=lambda x: x > 0),
        "M6": _abs_model(neg=lambda x: x - x),
        "M7": _abs_model(cond=lambda x: x < -50),
    },
    initial_assertion="result >= 0",
)


def _max3_ref(s):
    a, b, c = s["a"], s["b"], s["c"]
    result = a
    if b > result:
        result = b
    if c > result:
        result = c
    return {"a": a, "b": b, "c": c, "result": result}


def _max3_variant(kind):
    def impl(s):
        a, b, c = s["a"], s["b"], s["c"]
        result = a
        if kind == "ignore_c":
            if b > result:
                result = b
        elif kind == "min_b":
            if b < result:
                result = b
            if c > result:
                result = c
        elif kind == "first":
            pass
        elif kind == "c_vs_b":
            if b > result:
                result = b
            if c > b:
                result = c
        elif kind == "start_b":
            result = b
            if c > result:
                result = c
        elif kind == "c_vs_a":
            if b > a:
                result = b
            if c > a:
                result = c
        elif kind == "min":
            result = min(a, b, c)
        return {"a": a, "b": b, "c": c, "result": result}
    return impl


MAX3 = Subject(
    name="max3",
    description="maximum of three integers",
    params=(Param("a", -50, 50), Param("b", -50, 50), Param("c", -50, 50)),
    locals=(("result", NUM),),
    reference=_max3_ref,
    mutants={
        "M1": _max3_variant("ignore_c"),
        "M2": _max3_variant("min_b"),
        "M3": _max3_variant("first"),
        "M4": _max3_variant("c_vs_b"),
        "M5": _max3_variant("start_b"),
        "M6": _max3_variant("c_vs_a"),
        "M7": _max3_variant("min"),
    },
    initial_assertion="(result >= a) && (result >= b)",
)


def _clamp_model(low_check=lambda r, lo: r < lo, low_val=lambda lo, hi: lo,
                 high_check=lambda r, hi: r > hi, high_val=lambda lo, hi: hi):
    def impl(s):
        x, lo, hi = s["x"], s["lo"], s["hi"]
        result = x
        if low_check is not None and low_check(result, lo):
            result = low_val(lo, hi)
        if high_check is not None and high_check(result, hi):
            result = high_val(lo, hi)
        return {"x": x, "lo": lo, "hi": hi, "result": result}
    return impl


def _ordered_bounds(inputs):
    if inputs["lo"] > inputs["hi"]:
        inputs["lo"], inputs["hi"] = inputs["hi"], inputs["lo"]
    return inputs


CLAMP = Subject(
    name="clamp",
    description="clamp x into [lo, hi]",
    params=(Param("x", -100, 100), Param("lo", -50, 50), Param("hi", -50, 50)),
    locals=(("result", NUM),),
    reference=_clamp_model(),
    mutants={
        "M1": _clamp_model(low_check=None),
        "M2": _clamp_model(high_check=None),
        "M3": _clamp_model(low_val=lambda lo, hi: hi),
        "M4": _clamp_model(high_val=lambda lo, hi: lo),
        "M5": _clamp_model(low_check=lambda r, lo: r > lo),
        "M6": _clamp_model(high_val=lambda lo, hi: hi - 1),
        "M7": _clamp_model(low_check=lambda r, lo: True, high_check=lambda r, hi: True),
    },
    initial_assertion="(result >= lo) && (result <= hi)",
    normalize_input=_ordered_bounds,
)


INT_MAX = 2**31 - 1


def _int32(v: float) -> float:
    return float((int(v) + 2**31) % 2**32 - 2**31)


def _idiv(a: float, b: float) -> float:
    # integer division truncating toward zero
    q = abs(int(a)) // abs(int(b))
    return float(q if (a >= 0) == (b > 0) else -q)


def _mid_model(formula):
    def impl(s):
        a, b = s["a"], s["b"]
        return {"a": a, "b": b, "result": formula(a, b)}
    return impl


MIDPOINT = Subject(
    name="midpoint",
    description="integer midpoint of two non-negative ints; one mutant overflows",
    params=(Param("a", 0, INT_MAX), Param("b", 0, INT_MAX)),
    locals=(("result", NUM),),
    reference=_mid_model(lambda a, b: a + _idiv(b - a, 2)),
    mutants={
        "M1": _mid_model(lambda a, b: _idiv(_int32(a + b), 2)),
        "M2": _mid_model(lambda a, b: a + _idiv(b - a, 3)),
        "M3": _mid_model(lambda a, b: a + _idiv(b + a, 2)),
        "M4": _mid_model(lambda a, b: a + _idiv(b - a, 2) + 1),
        "M5": _mid_model(lambda a, b: a + _idiv(a - b, 2)),
        "M6": _mid_model(lambda a, b: a),
        "M7": _mid_model(lambda a, b: b - _idiv(b - a, 2)),
    },
    initial_assertion="(result >= a) && (result <= b)",
)


def _gcd_model(step=lambda a, b: (b, a % b), guard=lambda a, b: b != 0,
               result_fn=lambda a, b: a):
    def impl(s):
        a, b = s["a"], s["b"]
        for _ in range(LOOP_LIMIT):
            if not guard(a, b):
                break
            a, b = step(a, b)
        else:
            raise Fault("loop limit exceeded")
        return {"a": a, "b": b, "result": result_fn(a, b)}
    return impl


GCD = Subject(
    name="gcd",
    description="Euclid's gcd; parameters are overwritten by the loop",
    params=(Param("a", 1, 200), Param("b", 1, 200)),
    locals=(("result", NUM),),
    reference=_gcd_model(),
    mutants={
        "M1": _gcd_model(guard=lambda a, b: b > 1),
        "M2": _gcd_model(result_fn=lambda a, b: b),
        "M3": _gcd_model(step=lambda a, b: (b, b % a)),
        "M4": _gcd_model(guard=lambda a, b: b != 0 and a > b),
        "M5": _gcd_model(guard=lambda a, b: b != 0 and a != 1),
        "M6": _gcd_model(step=lambda a, b: (b, (a + 1) % b)),
        "M7": _gcd_model(step=lambda a, b: (b, a % (b - 1))),
    },
    initial_assertion="(old_a % result == 0) && (old_b % result == 0)",
)


_SUBJECTS = {s.name: s for s in (FAST_FLOOR, ABS, MAX3, CLAMP, MIDPOINT, GCD)}


def list_subjects() -> list[Subject]:
    return list(_SUBJECTS.values())


def get_subject(name: str) -> Subject:
    try:
        return _SUBJECTS[name]
    except KeyError:
        raise UnknownSubject(f"unknown subject {name!r}; known: {', '.join(_SUBJECTS)}") from None
