import pytest

from linearisable.algebra import DEFAULT_PRIME
from linearisable.degree import (EXACT, MODULAR, classify_growth, cross_check, degree_sequence)
from linearisable.errors import SingularOrbit
from linearisable.specs import load_spec, parse_spec_text


def spec_of(text):
    return parse_spec_text(text).mapping


@pytest.mark.parametrize("degrees, kind", [
    ([0, 1, 1, 1, 1, 1, 1, 1], "Constant"),
    ([0, 1, 2, 3, 4, 5, 6, 7], "Linear"),
    ([0, 1, 2, 4, 8, 16, 32, 64], "Exponential"),
    ([0, 1, 3, 6, 10, 15, 21, 28, 36, 45], "Polynomial"),
])
def test_classify_examples(degrees, kind):
    assert classify_growth(degrees).kind == kind


def test_classify_short_sequence_undetermined():
    assert classify_growth([0, 1, 2]).kind == "Undetermined"


def test_classify_is_a_function_of_degrees():
    a = classify_growth([0, 1, 2, 3, 4, 5, 6, 7])
    b = classify_growth([0, 1, 2, 3, 4, 5, 6, 7])
    assert (a.kind, a.order, a.evidence) == (b.kind, b.order, b.evidence)


def test_square_ratio_is_linear(corpus_path):
    seq = degree_sequence(load_spec(corpus_path("square_ratio")).mapping, 12, EXACT, 0)
    assert seq.degrees == list(range(13))


def test_first_degrees_follow_the_assignment(corpus_path):
    seq = degree_sequence(load_spec(corpus_path("quadratic_generic")).mapping, 6, EXACT, 0)
    assert seq.degrees[:2] == [0, 1]


def test_random_homographic_map_is_constant():
    spec = spec_of("""
[mapping]
type = three-point
update = (a*x + b)/(c*x + d)
[coefficients]
a = random
b = random
c = random
d = random
""")
    assert classify_growth(degree_sequence(spec, 12, EXACT, 3)).kind == "Constant"


@pytest.mark.parametrize("name, n", [("three_point_projective", 12), ("gambier", 10), ("gambier_polynomial", 10)])
def test_cross_check_agrees_on_corpus(corpus_path, name, n):
    cc = cross_check(load_spec(corpus_path(name)).mapping, n)
    assert cc.agree, cc.flagged


def test_modular_never_exceeds_exact(corpus_path):
    spec = load_spec(corpus_path("cascade_three")).mapping
    ex = degree_sequence(spec, 8, EXACT, 0).degrees
    mod = degree_sequence(spec, 8, MODULAR, 0).degrees
    assert all(m <= e for m, e in zip(mod, ex))


def test_non_generic_specialisation_is_flagged():
    # alpha is the default prime: it vanishes in the field and the map degenerates there
    spec = spec_of(f"""
[mapping]
type = three-point
variable = w
update = alpha*w + 1/(w*wp)
[coefficients]
alpha = {DEFAULT_PRIME}
""")
    cc = cross_check(spec, 8)
    assert not cc.agree and cc.flagged


def test_identically_zero_denominator_names_step():
    spec = spec_of("""
[mapping]
type = three-point
update = 1/(x - x)
""")
    with pytest.raises(SingularOrbit) as info:
        degree_sequence(spec, 6, EXACT, 0)
    assert info.value.step == 1


def test_seed_independence_on_corpus(corpus_path):
    for name in ("three_point_projective", "gambier", "square_ratio"):
        spec = load_spec(corpus_path(name)).mapping
        assert degree_sequence(spec, 10, EXACT, 0).degrees == degree_sequence(spec, 10, EXACT, 1).degrees
