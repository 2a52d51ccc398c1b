import random

from assertevo.deficiency import check, find_false_negatives, find_false_positives
from assertevo.expr import FALSE, TRUE, parse, variables_of
from assertevo.subjects import differs, get_subject, run_and_capture

from oracle import outcome

FLOOR = get_subject("fast_floor")
SIG = FLOOR.signature
ALPHA = parse(FLOOR.initial_assertion, SIG)
IMPROVED = parse("(y == result) && (x >= result) && (x < (result+1))", SIG)


def test_fp_search_finds_integral_x():
    fps = find_false_positives(FLOOR, ALPHA, 10_000, random.Random(0))
    assert fps
    assert any(float(s.vars["x"]).is_integer() for s in fps)
    for s in fps:
        assert outcome(ALPHA, s.vars) != 1
        assert s.mutant is None and s.origin == "deficiency-fp"


def test_fp_search_constant_true_finds_nothing():
    assert find_false_positives(FLOOR, TRUE, 2000, random.Random(0)) == []


def test_fp_search_constant_false_first_input():
    fps = find_false_positives(FLOOR, FALSE, 2000, random.Random(0), k=1)
    assert len(fps) == 1


def test_fn_search_finds_off_by_one():
    fns = find_false_negatives(FLOOR, ALPHA, 10_000, random.Random(0),
                               mutants=["M1", "M2", "M3", "M4", "M5"])
    assert fns
    assert any(s.mutant == "M1" for s in fns)
    refs = variables_of(ALPHA)
    for s in fns:
        assert outcome(ALPHA, s.vars) == 1
        ref = run_and_capture(FLOOR, {"x": s.vars["old_x"]}, mutants=[]).correct
        assert differs(s, ref, refs)
    m1 = [s for s in fns if s.mutant == "M1"][0]
    assert m1.vars["y"] == m1.vars["result"] == ref_floor(m1.vars["x"]) - 1


def ref_floor(x):
    import math
    return math.floor(x)


def test_fn_search_constant_false_empty():
    assert find_false_negatives(FLOOR, FALSE, 2000, random.Random(0)) == []


def test_fn_search_needs_referenced_difference():
    e = parse("old_x > (0 - 1000)", SIG)
    assert find_false_negatives(FLOOR, e, 2000, random.Random(0)) == []


def test_k_limits_results():
    assert len(find_false_positives(FLOOR, FALSE, 2000, random.Random(0), k=3)) == 3


def test_check_improved_floor_exhausted():
    report = check(FLOOR, IMPROVED, 10_000, random.Random(0), mutants=FLOOR.mutant_ids)
    assert report.exhausted
    assert report.inputs_examined == 20_000


def test_check_constants():
    assert check(FLOOR, TRUE, 2000, random.Random(0)).fn_states
    assert check(FLOOR, FALSE, 2000, random.Random(0)).fp_states
    assert not check(FLOOR, TRUE, 2000, random.Random(0)).exhausted


def test_check_deterministic():
    a = check(FLOOR, ALPHA, 3000, random.Random(5)).to_json()
    b = check(FLOOR, ALPHA, 3000, random.Random(5)).to_json()
    assert a == b


def test_soundness_other_subjects():
    for name in ("abs", "max3", "clamp", "midpoint", "gcd"):
        s = get_subject(name)
        e = parse(s.initial_assertion, s.signature)
        report = check(s, e, 2000, random.Random(1))
        for st in report.fp_states:
            assert outcome(e, st.vars) != 1
        for st in report.fn_states:
            assert outcome(e, st.vars) == 1
            assert st.mutant in s.training_mutants
