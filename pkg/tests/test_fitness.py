import random

import pytest

from assertevo.expr import FALSE, TRUE, NUM, Signature, not_, parse
from assertevo.fitness import FN_POP, FP_POP, FitnessVector, better_for, count_deficiencies, sort_key
from assertevo.state import NEGATIVE, POSITIVE, ProgramState, StateRepo
from assertevo.subjects import get_subject, init_repo

from oracle import outcome, random_tree

FLOOR_M1_M5 = ["M1", "M2", "M3", "M4", "M5"]
# brute-force counts of the initial floor assertion over the seed-1 repo below,
# computed once with tests/oracle.py and frozen
FLOOR_FIXTURE = {"distinct_pos": 94, "pos": 100, "distinct_neg": 253, "neg": 334,
                 "fp": 29, "fn": 146}


@pytest.fixture(scope="module")
def floor_repo():
    return init_repo(get_subject("fast_floor"), 100, random.Random(1), mutants=FLOOR_M1_M5)


def test_constant_true(floor_repo):
    f = count_deficiencies(TRUE, floor_repo)
    assert f == FitnessVector(0, floor_repo.weight(NEGATIVE), 3)


def test_constant_false(floor_repo):
    f = count_deficiencies(FALSE, floor_repo)
    assert f == FitnessVector(floor_repo.weight(POSITIVE), 0, 3)


def test_floor_fixture(floor_repo):
    sig = floor_repo.signature
    e = parse("(y == result) && (x > result)", sig)
    assert len(floor_repo.positives) == FLOOR_FIXTURE["distinct_pos"]
    assert floor_repo.weight(POSITIVE) == FLOOR_FIXTURE["pos"]
    assert len(floor_repo.negatives) == FLOOR_FIXTURE["distinct_neg"]
    assert floor_repo.weight(NEGATIVE) == FLOOR_FIXTURE["neg"]
    f = count_deficiencies(e, floor_repo)
    assert f.fp > 0 and f.fn > 0
    assert f == FitnessVector(FLOOR_FIXTURE["fp"], FLOOR_FIXTURE["fn"], 7)
    # recount with the reference evaluator
    fp = sum(s.multiplicity for s in floor_repo.positives if outcome(e, s.vars) != 1)
    fn = sum(s.multiplicity for s in floor_repo.negatives if outcome(e, s.vars) == 1)
    assert (fp, fn) == (f.fp, f.fn)


def test_errors_count_as_failing():
    sig = Signature([("x", NUM), ("y", NUM)])
    repo = StateRepo(sig)
    repo.ingest(ProgramState({"x": 1, "y": 0}), POSITIVE)
    repo.ingest(ProgramState({"x": 2, "y": 0}, mutant="M1"), NEGATIVE)
    f = count_deficiencies(parse("(x / y) > 0", sig), repo)
    assert (f.fp, f.fn) == (1, 0)


def test_empty_repo():
    sig = Signature([("x", NUM)])
    assert count_deficiencies(TRUE, StateRepo(sig)) == FitnessVector(0, 0, 3)


def test_multiplicity_weighting():
    sig = Signature([("x", NUM)])
    repo = StateRepo(sig)
    for _ in range(3):
        repo.ingest(ProgramState({"x": -1}), POSITIVE)
    assert count_deficiencies(parse("x > 0", sig), repo).fp == 3


def test_better_for_examples():
    assert better_for(FP_POP, FitnessVector(0, 5, 9), FitnessVector(1, 0, 3)) == -1
    assert better_for(FN_POP, FitnessVector(3, 0, 9), FitnessVector(3, 0, 7)) == 1
    assert better_for(FP_POP, FitnessVector(0, 0, 5), FitnessVector(0, 0, 5)) == 0
    assert better_for(FN_POP, FitnessVector(0, 5, 9), FitnessVector(1, 0, 3)) == 1


def test_sort_keys():
    f = FitnessVector(1, 2, 3)
    assert sort_key(FP_POP, f) == (1, 2, 3)
    assert sort_key(FN_POP, f) == (2, 1, 3)
    with pytest.raises(ValueError):
        sort_key("size", f)


def test_complementarity_random(floor_repo):
    sig = floor_repo.signature
    rng = random.Random(9)
    names = sig.variables(NUM)
    checked = 0
    n_pos, n_neg = floor_repo.weight(POSITIVE), floor_repo.weight(NEGATIVE)
    while checked < 200:
        e = random_tree(rng, names, [], rng.randint(2, 5))
        if any(outcome(e, s.vars) == -1 for s in floor_repo.positives + floor_repo.negatives):
            continue
        f, g = count_deficiencies(e, floor_repo), count_deficiencies(not_(e), floor_repo)
        assert g.fp == n_pos - f.fp
        assert g.fn == n_neg - f.fn
        checked += 1


def test_monotone_under_conjunction(floor_repo):
    # adding a conjunct can only remove passes: fp does not drop, fn does not rise
    sig = floor_repo.signature
    rng = random.Random(4)
    names = sig.variables(NUM)
    from assertevo.expr import and_
    for _ in range(200):
        a = random_tree(rng, names, [], rng.randint(2, 4))
        b = random_tree(rng, names, [], rng.randint(2, 4))
        fa, fab = count_deficiencies(a, floor_repo), count_deficiencies(and_(a, b), floor_repo)
        assert fab.fp >= fa.fp and fab.fn <= fa.fn
