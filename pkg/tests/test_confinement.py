from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linearisable.algebra import LaurentSeries
from linearisable.confinement import (ProbeConfig, SingularSite, find_singular_sites, parse_site,
                                      probe_confinement)
from linearisable.errors import DomainError
from linearisable.runners import mapping_for
from linearisable.specs import load_spec, parse_spec_text

F = Fraction


def three_point(update):
    return parse_spec_text(f"[mapping]\ntype = three-point\nupdate = {update}\n").mapping


def corpus_map(corpus_path, name):
    return mapping_for(load_spec(corpus_path(name)), probe=True)


def sites_of(spec):
    return {(s.variable, s.value) for s in find_singular_sites(spec)}


def test_projective_three_point_sites(corpus_path):
    spec = corpus_map(corpus_path, "three_point_projective")
    assert sites_of(spec) == {("w", F(0)), ("w", None)}


def test_square_ratio_origin_found_by_variation_test():
    assert sites_of(three_point("x^2/xp")) == {("x", F(0)), ("x", None)}


def test_homographic_only_denominator_root():
    assert sites_of(three_point("(2*x + 1)/(x + 3)")) == {("x", F(-3)), ("x", None)}


def test_projective_origin_confines_in_one_step(corpus_path):
    spec = corpus_map(corpus_path, "three_point_projective")
    rep = probe_confinement(spec, SingularSite("w", F(0)))
    assert str(rep.status) == "ConfinedAt(1)"
    la, lb = rep.evidence["limits"]
    assert la != lb


def test_gambier_determinant_site_does_not_confine(corpus_path):
    sf = load_spec(corpus_path("gambier"))
    spec = mapping_for(sf, probe=True)
    site = parse_site(sf.probe["site"], spec)
    rep = probe_confinement(spec, site, ProbeConfig(N_max=16))
    assert str(rep.status) == "NotConfinedWithin(16)"
    # the y-stage alone is homographic and passes through
    assert str(rep.per_variable["y"]) == "ConfinedAt(1)"


def test_square_ratio_origin_not_confined():
    rep = probe_confinement(three_point("x^2/xp"), SingularSite("x", F(0)), ProbeConfig(N_max=8))
    assert str(rep.status) == "NotConfinedWithin(8)"


def test_constant_g_quadform_confines(corpus_path):
    spec = corpus_map(corpus_path, "quadform_gconst")
    rep = probe_confinement(spec, SingularSite("x", F(2)))
    assert rep.confined and rep.status.step == 2


def test_confined_report_invariant(corpus_path):
    spec = corpus_map(corpus_path, "three_point_projective")
    rep = probe_confinement(spec, SingularSite("w", F(0)))
    k = rep.status.step
    assert rep.leads[k]["w"] is not None and rep.leads[k]["w"] >= 0
    assert 0 in rep.singular_steps


def test_verdict_independent_of_witness_pair(corpus_path):
    for name, site in (("three_point_projective", SingularSite("w", F(0))),
                       ("quadform_gconst", SingularSite("x", F(2)))):
        spec = corpus_map(corpus_path, name)
        a = probe_confinement(spec, site, ProbeConfig(witnesses=(F(3, 7), F(5, 11))))
        b = probe_confinement(spec, site, ProbeConfig(witnesses=(F(-2, 3), F(7, 5))))
        assert str(a.status) == str(b.status)


def test_raising_truncation_keeps_verdict(corpus_path):
    spec = corpus_map(corpus_path, "quadform_gconst")
    site = SingularSite("x", F(2))
    a = probe_confinement(spec, site, ProbeConfig(T=12))
    b = probe_confinement(spec, site, ProbeConfig(T=20))
    assert str(a.status) == str(b.status)


def test_infinity_site_probed_through_inversion():
    rep = probe_confinement(three_point("(2*x + 1)/(x + 3)"), SingularSite("x", None))
    assert rep.leads[0]["x"] == 0  # (2/eps + 1)/(1/eps + 3) -> 2
    assert str(rep.status) == "ConfinedAt(1)"


def test_probe_config_validation():
    with pytest.raises(DomainError):
        ProbeConfig(T=3)
    with pytest.raises(DomainError):
        ProbeConfig(N_max=1)
    with pytest.raises(DomainError):
        ProbeConfig(witnesses=(F(1), F(1)))


def test_parse_site_forms():
    assert parse_site("x: inf").value is None
    assert parse_site("x: -3/2").value == F(-3, 2)
    with pytest.raises(DomainError):
        parse_site("x = 2")


small = st.integers(-6, 6)


@settings(max_examples=25)
@given(small, small, small, small)
def test_invertible_homographic_sites_confine_at_once(a, b, c, d):
    if a * d - b * c == 0 or c == 0 or a + d == 0:
        return
    spec = three_point(f"({a}*x + {b})/({c}*x + {d})")
    for site in find_singular_sites(spec):
        rep = probe_confinement(spec, site, ProbeConfig(N_max=3))
        assert str(rep.status) == "ConfinedAt(1)", site


def test_involution_returns_infinity_to_itself():
    # trace zero: infinity -> a/c -> infinity, finite again only at step 2
    rep = probe_confinement(three_point("1/x"), SingularSite("x", None), ProbeConfig(N_max=3))
    assert [row["x"] for row in rep.leads] == [1, -1, 1, -1]
    assert str(rep.status) == "ConfinedAt(2)"


@given(st.integers(-4, 4), st.lists(st.integers(-5, 5), min_size=1, max_size=6).filter(any))
def test_leading_exponent_bookkeeping(shift, coeffs):
    s = LaurentSeries(shift, [F(c) for c in coeffs] + [F(0)] * 4)
    unit = s * LaurentSeries.eps(12, -s.lead)
    assert unit.lead == 0 and unit.coefficient(0) != 0
