"""Independent reference evaluator and random tree source for the tests.

Walks an expression tree recursively with plain Python floats. It shares no
code with the kernels; only the node fields of ``Expr`` are read.
"""

import math
import random

EXACT = 2.0 ** 52


def rounded(v, digits):
    scale = 10.0 ** digits
    s = v * scale
    if not abs(s) < EXACT:
        return v
    return round(s) / scale


class DivByZero(Exception):
    pass


def _num(node, state, digits, errors):
    op = node.op
    if op == "var":
        return float(state[node.name])
    if op == "const":
        return node.value
    a = _num(node.args[0], state, digits, errors)
    b = _num(node.args[1], state, digits, errors)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            errors.append(node)
            return math.nan
        return a / b
    if op == "%":
        if b == 0:
            errors.append(node)
            return math.nan
        try:
            return math.fmod(a, b)
        except ValueError:  # fmod(inf, y)
            return math.nan
    raise AssertionError(op)


def _bool(node, state, digits, errors):
    op = node.op
    if op == "var":
        return bool(state[node.name])
    if op == "!":
        return not _bool(node.args[0], state, digits, errors)
    if op in ("==", "!=", "<", "<=", ">", ">="):
        a = _num(node.args[0], state, digits, errors)
        b = _num(node.args[1], state, digits, errors)
        if op == "==":
            return rounded(a, digits) == rounded(b, digits)
        if op == "!=":
            return rounded(a, digits) != rounded(b, digits)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    x = _bool(node.args[0], state, digits, errors)
    y = _bool(node.args[1], state, digits, errors)
    return {
        "&&": x and y,
        "||": x or y,
        "^": x != y,
        "->": (not x) or y,
        "<=>": x == y,
    }[op]


def brute_eval(e, state, digits=9):
    """True/False, or raises DivByZero if any division/modulo by zero occurs."""
    errors = []
    value = _bool(e, state, digits, errors)
    if errors:
        raise DivByZero()
    return value


def outcome(e, state, digits=9):
    """1 pass, 0 fail, -1 error."""
    try:
        return 1 if brute_eval(e, state, digits) else 0
    except DivByZero:
        return -1


# -- random trees independent of the library's GP generator ------------------

ARITH = ("+", "-", "*", "/", "%")
CMP = ("==", "!=", "<", "<=", ">", ">=")
CONN = ("&&", "||", "^", "->", "<=>")


def random_tree(rng, num_vars, bool_vars, depth, type_="boolean"):
    from assertevo import expr as E

    if type_ == "number":
        if depth <= 1 or rng.random() < 0.3:
            if num_vars and rng.random() < 0.7:
                return E.var(rng.choice(num_vars), E.NUM)
            return E.const(rng.choice([0, 1, 2, 0.5, 3, 10]))
        return E.binary(rng.choice(ARITH), random_tree(rng, num_vars, bool_vars, depth - 1, "number"),
                        random_tree(rng, num_vars, bool_vars, depth - 1, "number"))
    if depth <= 1 or (bool_vars and rng.random() < 0.15):
        if bool_vars:
            return E.var(rng.choice(bool_vars), E.BOOL)
        depth = 2
    kind = rng.choice(["cmp", "cmp", "conn", "not"]) if depth > 2 or bool_vars else "cmp"
    if kind == "cmp":
        return E.binary(rng.choice(CMP), random_tree(rng, num_vars, bool_vars, depth - 1, "number"),
                        random_tree(rng, num_vars, bool_vars, depth - 1, "number"))
    if kind == "not":
        return E.not_(random_tree(rng, num_vars, bool_vars, depth - 1))
    return E.binary(rng.choice(CONN), random_tree(rng, num_vars, bool_vars, depth - 1),
                    random_tree(rng, num_vars, bool_vars, depth - 1))


def random_state(rng, num_vars, bool_vars):
    state = {}
    for n in num_vars:
        r = rng.random()
        if r < 0.3:
            state[n] = float(rng.choice([0, 1, -1, 2, 0.5, -0.5, 3]))
        elif r < 0.5:
            state[n] = float(rng.randint(-10, 10))
        else:
            state[n] = round(rng.uniform(-20, 20), rng.choice([0, 1, 3, 9]))
    for n in bool_vars:
        state[n] = rng.random() < 0.5
    return state


def make_rng(seed):
    return random.Random(seed)
