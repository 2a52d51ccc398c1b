import importlib
import os
import random

import numpy as np
import pytest

from assertevo import _pykernel, kernel
from assertevo.expr import BOOL, NUM, Signature, parse

from oracle import outcome, random_state, random_tree

SIG = Signature([("x", NUM), ("y", NUM), ("z", NUM), ("b", BOOL)])
NUMS = ["x", "y", "z"]

try:
    from assertevo import _ckernel
except ImportError:  # pragma: no cover - extension not built
    _ckernel = None

IMPLS = [_pykernel] + ([_ckernel] if _ckernel is not None else [])


def _matrix(states):
    return np.array([[float(s[n]) for n in SIG.names] for s in states])


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_backend_matches_oracle(impl):
    rng = random.Random(3)
    for _ in range(300):
        e = random_tree(rng, NUMS, ["b"], rng.randint(1, 5))
        states = [random_state(rng, NUMS, ["b"]) for _ in range(20)]
        got = kernel.run(kernel.compile_expr(e, SIG), _matrix(states), impl=impl)
        want = [outcome(e, s) for s in states]
        assert got.tolist() == want, kernel.compile_expr(e, SIG)


@pytest.mark.skipif(_ckernel is None, reason="compiled kernel not available")
def test_backends_agree_on_extremes():
    rng = random.Random(5)
    specials = [0.0, -0.0, 1e300, -1e300, 1e-300, 4503599627370497.0, 0.5, 2.5, -1.0]
    for _ in range(300):
        e = random_tree(rng, NUMS, ["b"], rng.randint(2, 5))
        data = np.array([[rng.choice(specials) for _ in NUMS] + [rng.random() < 0.5]
                         for _ in range(30)], dtype=np.float64)
        prog = kernel.compile_expr(e, SIG)
        a = kernel.run(prog, data, impl=_pykernel)
        b = kernel.run(prog, data, impl=_ckernel)
        assert a.tolist() == b.tolist()
        want = [outcome(e, dict(zip(SIG.names, row))) for row in data.tolist()]
        assert a.tolist() == want


def test_rounding_digits_parameter():
    sig = Signature([("x", NUM)])
    prog = kernel.compile_expr(parse("x == 0.12", sig), sig)
    data = np.array([[0.125], [0.115], [0.1201]])
    for impl in IMPLS:
        assert kernel.run(prog, data, digits=2, impl=impl).tolist() == [1, 1, 1]
        assert kernel.run(prog, data, digits=3, impl=impl).tolist() == [0, 0, 1]


def test_empty_matrix():
    prog = kernel.compile_expr(parse("x > 0", SIG), SIG)
    for impl in IMPLS:
        assert kernel.run(prog, np.zeros((0, 4)), impl=impl).shape == (0,)


def test_rejects_one_dimensional_data():
    prog = kernel.compile_expr(parse("x > 0", SIG), SIG)
    with pytest.raises(ValueError):
        kernel.run(prog, np.zeros(4))


def test_long_program_falls_back():
    sig = Signature([("x", NUM)])
    text = " && ".join(["(x > 0)"] * 40)
    prog = kernel.compile_expr(parse(text, sig), sig)
    assert len(prog.codes) > kernel.MAX_COMPILED_PROGRAM
    assert kernel.run(prog, np.array([[1.0], [-1.0]])).tolist() == [1, 0]


def test_pure_python_selected_by_environment(monkeypatch):
    monkeypatch.setenv("ASSERTEVO_PURE_PYTHON", "1")
    mod = importlib.reload(kernel)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.undo()
        importlib.reload(kernel)


def test_compiled_backend_is_default_when_built():
    if _ckernel is None or os.environ.get("ASSERTEVO_PURE_PYTHON"):
        pytest.skip("compiled kernel not available or disabled")
    assert kernel.BACKEND == "cython"
