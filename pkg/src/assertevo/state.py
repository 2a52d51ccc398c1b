"""Program states and the correct/incorrect state repositories.

A repository holds the states an assertion should accept (positives, captured
from correct executions) and the states it should reject (negatives, captured
from mutants). Identical variable maps are stored once with a multiplicity.

On disk a repository is one JSON document::

    {"signature": [{"name": "old_x", "type": "number"}, ...],
     "positives": [{"vars": {...}, "origin": "init-test", "input": "x=0.3",
                    "multiplicity": 1}, ...],
     "negatives": [{"vars": {...}, "origin": "init-test", "input": "x=0.3",
                    "multiplicity": 1, "mutant": "M3"}, ...]}

Optional top-level keys ``subject`` and ``precision`` are written when set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import BOOL, Signature

DEFAULT_PRECISION = 9
ORIGINS = ("init-test", "deficiency-fp", "deficiency-fn", "validation")
POSITIVE = "positive"
NEGATIVE = "negative"

_EXACT = 4503599627370496.0


class StateError(ValueError):
    pass


class SignatureMismatch(StateError):
    pass


class SchemaError(StateError):
    pass


def round_value(v: float, digits: int = DEFAULT_PRECISION) -> float:
    """Round half-to-even at ``digits`` decimal places.

    Scales by ``10**digits`` and rounds to the nearest integer, the same
    arithmetic the evaluation kernels use for ``==``/``!=``.

    >>> round_value(0.125, 2), round_value(-2.5, 0)
    (0.12, -2.0)
    """
    v = float(v)
    if not math.isfinite(v):
        raise StateError(f"non-finite value {v!r}")
    if digits < 0:
        raise ValueError("digits must be non-negative")
    scale = 10.0 ** digits
    scaled = v * scale
    if not abs(scaled) < _EXACT:
        return v + 0.0
    return round(scaled) / scale + 0.0


@dataclass
class ProgramState:
    vars: dict
    origin: str = "init-test"
    input: str = ""
    mutant: str | None = None
    multiplicity: int = 1

    def key(self, sig: Signature) -> tuple:
        return tuple(self.vars[name] for name in sig.names)

    def to_json(self) -> dict:
        out = {
            "vars": {k: _json_value(v) for k, v in self.vars.items()},
            "origin": self.origin,
            "input": self.input,
            "multiplicity": self.multiplicity,
        }
        if self.mutant is not None:
            out["mutant"] = self.mutant
        return out


def _json_value(v):
    if isinstance(v, bool):
        return v
    if v.is_integer() and abs(v) < _EXACT:
        return int(v)
    return v


def normalize_vars(sig: Signature, values: dict, digits: int) -> dict:
    """Check ``values`` against ``sig`` and round numbers; returns a new map
    ordered like the signature."""
    names = set(values)
    expected = set(sig.names)
    if names != expected:
        missing = sorted(expected - names)
        extra = sorted(names - expected)
        parts = []
        if missing:
            parts.append(f"missing {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected {', '.join(extra)}")
        raise SignatureMismatch("state does not match signature: " + "; ".join(parts))
    out = {}
    for name, typ in sig:
        v = values[name]
        if typ == BOOL:
            if not isinstance(v, (bool, np.bool_)):
                raise SignatureMismatch(f"{name} must be boolean, got {v!r}")
            out[name] = bool(v)
        else:
            if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, float, np.number)):
                raise SignatureMismatch(f"{name} must be a number, got {v!r}")
            out[name] = round_value(v, digits)
    return out


@dataclass
class StateRepo:
    signature: Signature
    positives: list = field(default_factory=list)
    negatives: list = field(default_factory=list)
    precision: int = DEFAULT_PRECISION
    subject: str | None = None

    def __post_init__(self):
        self._index = {POSITIVE: {}, NEGATIVE: {}}
        self._matrices = {}
        for label in (POSITIVE, NEGATIVE):
            states = self._side(label)
            for i, s in enumerate(states):
                self._index[label].setdefault(s.key(self.signature), i)

    def _side(self, label):
        if label == POSITIVE:
            return self.positives
        if label == NEGATIVE:
            return self.negatives
        raise ValueError(f"label must be {POSITIVE!r} or {NEGATIVE!r}")

    def ingest(self, state: ProgramState, label: str) -> "StateRepo":
        """Round, deduplicate and store ``state``; returns ``self``."""
        side = self._side(label)
        values = normalize_vars(self.signature, state.vars, self.precision)
        if label == NEGATIVE and state.mutant is None:
            raise StateError("incorrect states must carry a mutant id")
        if label == POSITIVE and state.mutant is not None:
            raise StateError("correct states must not carry a mutant id")
        if state.multiplicity < 1:
            raise StateError("multiplicity must be positive")
        key = tuple(values[n] for n in self.signature.names)
        index = self._index[label]
        if key in index:
            side[index[key]].multiplicity += state.multiplicity
        else:
            index[key] = len(side)
            side.append(ProgramState(values, state.origin, state.input,
                                     state.mutant, state.multiplicity))
        self._matrices.pop(label, None)
        return self

    def matrix(self, label: str) -> tuple[np.ndarray, np.ndarray]:
        """``(data, weights)``: one float64 row per stored state and its
        multiplicity. Cached until the next ingest."""
        if label not in self._matrices:
            side = self._side(label)
            names = self.signature.names
            data = np.array([[float(s.vars[n]) for n in names] for s in side],
                            dtype=np.float64).reshape(len(side), len(names))
            weights = np.array([s.multiplicity for s in side], dtype=np.int64)
            self._matrices[label] = (data, weights)
        return self._matrices[label]

    def weight(self, label: str) -> int:
        return sum(s.multiplicity for s in self._side(label))

    def __len__(self) -> int:
        return len(self.positives) + len(self.negatives)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateRepo):
            return NotImplemented
        return (self.signature == other.signature
                and self.positives == other.positives
                and self.negatives == other.negatives
                and self.precision == other.precision
                and self.subject == other.subject)

    def copy(self) -> "StateRepo":
        return from_json(to_json(self))

    def to_json(self) -> dict:
        return to_json(self)


def to_json(repo: StateRepo) -> dict:
    out = {}
    if repo.subject is not None:
        out["subject"] = repo.subject
    if repo.precision != DEFAULT_PRECISION:
        out["precision"] = repo.precision
    out["signature"] = repo.signature.to_json()
    out["positives"] = [s.to_json() for s in repo.positives]
    out["negatives"] = [s.to_json() for s in repo.negatives]
    return out


def _state_from_json(obj, label: str, sig: Signature, digits: int) -> ProgramState:
    if not isinstance(obj, dict) or not isinstance(obj.get("vars"), dict):
        raise SchemaError(f"{label} entry must be an object with a 'vars' map")
    unknown = set(obj) - {"vars", "origin", "input", "multiplicity", "mutant"}
    if unknown:
        raise SchemaError(f"unknown keys in {label} entry: {sorted(unknown)}")
    origin = obj.get("origin", "init-test")
    if origin not in ORIGINS:
        raise SchemaError(f"unknown origin {origin!r}")
    multiplicity = obj.get("multiplicity", 1)
    if isinstance(multiplicity, bool) or not isinstance(multiplicity, int) or multiplicity < 1:
        raise SchemaError("multiplicity must be a positive integer")
    mutant = obj.get("mutant")
    if label == NEGATIVE and not isinstance(mutant, str):
        raise SchemaError("negative states need a string 'mutant' id")
    if label == POSITIVE and mutant is not None:
        raise SchemaError("positive states must not have a 'mutant' id")
    raw = obj["vars"]
    for name, v in raw.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise SchemaError(f"non-finite value for {name}")
    try:
        values = normalize_vars(sig, raw, digits)
    except StateError as exc:
        raise SchemaError(str(exc)) from None
    return ProgramState(values, origin, str(obj.get("input", "")), mutant, multiplicity)


def from_json(data) -> StateRepo:
    if not isinstance(data, dict):
        raise SchemaError("repository must be a JSON object")
    for key in ("signature", "positives", "negatives"):
        if not isinstance(data.get(key), list):
            raise SchemaError(f"missing or non-array {key!r}")
    try:
        sig = Signature.from_json(data["signature"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad signature: {exc}") from None
    digits = data.get("precision", DEFAULT_PRECISION)
    if isinstance(digits, bool) or not isinstance(digits, int) or digits < 0:
        raise SchemaError("precision must be a non-negative integer")
    repo = StateRepo(sig, precision=digits, subject=data.get("subject"))
    for label, key in ((POSITIVE, "positives"), (NEGATIVE, "negatives")):
        side = repo._side(label)
        for obj in data[key]:
            state = _state_from_json(obj, label, sig, digits)
            k = state.key(sig)
            if k in repo._index[label]:
                raise SchemaError(f"duplicate {label} state {state.vars}")
            repo._index[label][k] = len(side)
            side.append(state)
    return repo


def dumps(repo: StateRepo) -> str:
    return json.dumps(to_json(repo), indent=1) + "\n"


def save(repo: StateRepo, path) -> None:
    Path(path).write_text(dumps(repo))


def load(path) -> StateRepo:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from None
    return from_json(data)


__all__ = [
    "DEFAULT_PRECISION", "NEGATIVE", "POSITIVE", "ProgramState", "SchemaError",
    "SignatureMismatch", "StateError", "StateRepo", "dumps", "from_json", "load",
    "round_value", "save",
]
