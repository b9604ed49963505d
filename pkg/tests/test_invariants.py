import pytest

from manincert.heckeforms import congruence_number
from manincert.invariants import (
    DivisibilityError,
    DegreeResult,
    degree_congruence_gap,
    modular_degree,
)
from manincert.modsym import build_space, genus_x0


def degrees_at(n):
    s = build_space(n)
    return [modular_degree(s, f) for f in s.rational_eigenspaces()]


def test_degree_level_11():
    (d,) = degrees_at(11)
    assert d.degree == 1 and d.index_used == 1


def test_degree_level_37():
    da, db = degrees_at(37)
    assert da.degree == 2 and da.index_used == 4
    assert db.degree == 2


def test_degree_level_26_symmetric():
    # at a genus-2 level the homology index of both newforms is the same
    # finite group, and a degree-1 parametrization would force genus 1
    da, db = degrees_at(26)
    assert (da.degree, db.degree) == (2, 2)


def test_degree_is_one_exactly_at_genus_one_levels():
    for n in (14, 15, 17, 19, 20, 21, 24, 27, 32, 36, 49):
        assert genus_x0(n) == 1
        (d,) = degrees_at(n)
        assert d.degree == 1


def test_famous_discrepancy_at_54():
    d_a, d_b = (d.degree for d in degrees_at(54))
    r_a = congruence_number(54, build_space(54).rational_eigenspaces()[0])
    r_b = congruence_number(54, build_space(54).rational_eigenspaces()[1])
    assert {d_a, d_b} == {6, 2}
    assert r_a == r_b == 6


def test_perfect_square_and_composite_check_sample():
    for n in (26, 37, 50, 54, 57, 58):
        s = build_space(n)
        for f in s.rational_eigenspaces():
            d = modular_degree(s, f)
            assert d.index_used == d.degree ** 2


def test_gap_report():
    s = build_space(54)
    f0, f1 = s.rational_eigenspaces()
    d1 = modular_degree(s, f1)
    gap = degree_congruence_gap(d1, congruence_number(54, f1))
    assert gap.gap_ord2 >= 0
    assert gap.degree * _prod(gap.quotient_factorization) == gap.congruence_number


def _prod(fac):
    out = 1
    for p, e in fac.items():
        out *= p**e
    return out


def test_gap_rejects_nondividing():
    fake = DegreeResult(level=37, newform_index=0, degree=4, index_used=16)
    with pytest.raises(DivisibilityError):
        degree_congruence_gap(fake, 2)


def test_degree_invariant_under_atkin_lehner():
    """Replacing L_f by its Atkin-Lehner image leaves the degree unchanged
    (the image equals L_f: eigenspaces are w-stable)."""
    from manincert.intlattice import hnf

    s = build_space(37)
    w = s.atkin_lehner(37)
    for f in s.rational_eigenspaces():
        image = hnf(f.eigenspace.basis * w.transpose())
        assert image == f.eigenspace.basis


def test_atkin_lehner_invariance_of_index_level_57():
    from manincert.intlattice import hnf

    s = build_space(57)
    for q in (3, 19):
        w = s.atkin_lehner(q)
        for f in s.rational_eigenspaces():
            assert hnf(f.eigenspace.basis * w.transpose()) == f.eigenspace.basis
