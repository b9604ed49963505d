import pytest

from manincert.intlattice import IntMatrix, hnf, lattice_from_rows, stack
from manincert.modsym import (
    build_space,
    cusps_equivalent,
    genus_x0,
    heilbronn_cremona,
    index_mu,
    merel_matrices,
    nu_inf,
    P1List,
)


def test_p1_sizes():
    for n in (1, 2, 6, 11, 24, 30, 49):
        assert len(P1List(n)) == index_mu(n)


def test_p1_normalize_idempotent():
    for n in (12, 25, 33):
        p1 = P1List(n)
        for c in range(n):
            for d in range(n):
                pt = p1.normalize(c, d)
                if pt is not None:
                    assert p1.normalize(*pt) == pt
                    assert pt in p1.lookup


def test_merel_determinants():
    for n in (2, 3, 5, 6, 12):
        mats = list(merel_matrices(n))
        assert all(a * d - b * c == n for a, b, c, d in mats)
        assert all(a > b >= 0 and d > c >= 0 for a, b, c, d in mats)


def test_heilbronn_cremona_determinants():
    for p in (2, 3, 5, 13, 31):
        assert all(a * d - b * c == p for a, b, c, d in heilbronn_cremona(p))


def test_space_shapes():
    s = build_space(11)
    assert s.mu == 12 and s.genus == 1 and s.cuspidal_basis.rows == 2
    s1 = build_space(1)
    assert s1.genus == 0 and s1.cuspidal_basis.rows == 0
    s22 = build_space(22)
    assert s22.genus == 2 and s22.cuspidal_basis.rows == 4


def test_genus_dimension_agreement_sample():
    for n in (13, 17, 30, 45, 64, 97):
        s = build_space(n)
        assert s.cuspidal_basis.rows == 2 * genus_x0(n)
        assert len(s.cusps) == nu_inf(n)


def test_structured_elimination_matches_generic_kernel():
    """The fast presentation reduction agrees with a generic saturated
    kernel of the raw relation matrix."""
    from manincert.intlattice import kernel

    for n in (11, 24, 37, 45):
        s = build_space(n)
        assert kernel(s.presentation) == s.coords


def test_presentation_row_count():
    s = build_space(11)
    assert s.presentation.cols == s.mu
    assert len(s.generators) == s.mu


def test_hecke_t1_identity():
    s = build_space(30)
    t1 = s.hecke_operator(1).matrix
    assert t1 == IntMatrix.identity(s.cuspidal_basis.rows)


def test_hecke_eigenvalues_level_11():
    s = build_space(11)
    assert s.hecke_on_cuspidal(2) == IntMatrix.identity(2).scale(-2)
    assert s.hecke_on_cuspidal(3) == IntMatrix.identity(2).scale(-1)


def test_hecke_commutativity():
    for n in (11, 14, 26, 37):
        s = build_space(n)
        mats = [s.hecke_on_cuspidal(p) for p in (2, 3, 5, 7)]
        for a in mats:
            for b in mats:
                assert a * b == b * a


def test_hecke_multiplicativity_coprime():
    s = build_space(11)
    assert s.hecke_on_cuspidal(6) == s.hecke_on_cuspidal(2) * s.hecke_on_cuspidal(3)
    s2 = build_space(26)
    assert s2.hecke_on_cuspidal(15) == \
        s2.hecke_on_cuspidal(3) * s2.hecke_on_cuspidal(5)


def test_atkin_lehner_involution():
    for n, q in ((11, 11), (14, 2), (14, 7), (26, 13), (36, 4), (36, 9)):
        s = build_space(n)
        w = s.atkin_lehner(q)
        assert w * w == IntMatrix.identity(w.rows)


def test_atkin_lehner_rejects_non_exact_divisor():
    s = build_space(12)
    with pytest.raises(ValueError):
        s.atkin_lehner(2)  # 2 || 12 fails: 4 | 12


def test_fricke_is_product_of_atkin_lehner():
    s = build_space(14)
    w2, w7, w14 = s.atkin_lehner(2), s.atkin_lehner(7), s.atkin_lehner(14)
    assert w2 * w7 == w14 or w2 * w7 == -w14
    f = s.rational_eigenspaces()[0]
    assert set(f.sign_w) == {2, 7}


def test_star_involution_commutes():
    s = build_space(26)
    star = s.star_involution()
    assert star * star == IntMatrix.identity(star.rows)
    for p in (2, 3, 5):
        t = s.hecke_on_cuspidal(p)
        assert star * t == t * star
    w13 = s.atkin_lehner(13)
    assert star * w13 == w13 * star


def test_cusp_equivalence_classes():
    # numbers of inequivalent cusps match the formula (checked in build too)
    for n in (20, 27, 48):
        assert len(build_space(n).cusps) == nu_inf(n)
    # the two cusps of X0(11) are 0 and infinity, and they are distinct
    assert not cusps_equivalent((0, 1), (1, 0), 11)
    assert cusps_equivalent((0, 1), (1, 1), 11)


def test_degeneracy_identity_at_same_level():
    s = build_space(11)
    d = s.degeneracy_lower(s, 1)
    assert d == IntMatrix.identity(2)


def test_degeneracy_divisibility_violations_rejected():
    s22 = build_space(22)
    with pytest.raises(ValueError):
        s22.degeneracy_lower(build_space(7), 1)   # 7 does not divide 22
    with pytest.raises(ValueError):
        s22.degeneracy_lower(build_space(11), 4)  # 4 does not divide 22/11


def test_degeneracy_lower_surjective_on_22():
    s22, s11 = build_space(22), build_space(11)
    for d in (1, 2):
        mat = s22.degeneracy_lower(s11, d)
        assert hnf(mat.transpose()).rows == 2  # full rank onto level 11


def test_degeneracy_composition_44_22_11():
    s44, s22, s11 = build_space(44), build_space(22), build_space(11)
    lower_44_22_1 = s44.degeneracy_lower(s22, 1)
    lower_44_22_2 = s44.degeneracy_lower(s22, 2)
    lower_22_11_1 = s22.degeneracy_lower(s11, 1)
    lower_22_11_2 = s22.degeneracy_lower(s11, 2)
    assert lower_22_11_1 * lower_44_22_1 == s44.degeneracy_lower(s11, 1)
    assert lower_22_11_2 * lower_44_22_1 == s44.degeneracy_lower(s11, 2)
    assert lower_22_11_1 * lower_44_22_2 == s44.degeneracy_lower(s11, 2)
    assert lower_22_11_2 * lower_44_22_2 == s44.degeneracy_lower(s11, 4)


def test_lowering_after_raising_is_covering_degree():
    """Transfer then forgetful lowering multiplies level-M classes by the
    covering degree mu(N)/mu(M) (exact matrix identity, N <= 50)."""
    for m, n in ((11, 22), (11, 33), (11, 44), (14, 28), (15, 45), (24, 48)):
        s_n, s_m = build_space(n), build_space(m)
        comp = s_n.degeneracy_lower(s_m, 1) * s_n.degeneracy_raise(s_m)
        expected = index_mu(n) // index_mu(m)
        assert comp == IntMatrix.identity(s_m.cuspidal_basis.rows).scale(expected)


def test_integer_eigenspaces_have_even_dimension():
    """Rational eigenspaces of a good T_p on the full cuspidal lattice come
    in conjugate pairs, hence have even rank."""
    from manincert.intlattice import kernel

    for n, p in ((37, 2), (54, 5), (57, 2)):
        s = build_space(n)
        t = s.hecke_on_cuspidal(p)
        size = t.rows
        for lam in range(-4, 5):
            shifted = t - IntMatrix.identity(size).scale(lam)
            assert kernel(shifted).rows % 2 == 0


def test_new_subspace_examples():
    assert build_space(11).new_subspace().rank == 2
    assert build_space(22).new_subspace().rank == 0
    assert build_space(37).new_subspace().rank == 4


def test_rational_eigenspaces_examples():
    s11 = build_space(11)
    forms = s11.rational_eigenspaces()
    assert len(forms) == 1
    assert forms[0].ap[2] == -2 and forms[0].ap[3] == -1
    assert build_space(22).rational_eigenspaces() == []
    a2s = [f.ap[2] for f in build_space(37).rational_eigenspaces()]
    assert a2s == [-2, 0]


def test_eigenspaces_are_saturated_rank_two():
    from manincert.intlattice import saturate

    for n in (26, 37):
        for f in build_space(n).rational_eigenspaces():
            assert f.eigenspace.rank == 2
            assert saturate(f.eigenspace) == f.eigenspace


def test_eichler_shimura_consistency():
    from manincert.elliptic import ap_via_counting, minimal_model_from_ainvs

    m = minimal_model_from_ainvs((0, -1, 1, -10, -20))
    f = build_space(11).rational_eigenspaces()[0]
    for p in (2, 3, 5, 7, 13):
        assert f.prime_eigenvalue(p) == ap_via_counting(m, p)


def test_hecke_preserves_cuspidal_lattice():
    s = build_space(30)
    n = s.cuspidal_basis.rows
    lat = lattice_from_rows(n, IntMatrix.identity(n).entries)
    for p in (2, 3, 7):
        t = s.hecke_on_cuspidal(p)
        image = lattice_from_rows(n, (IntMatrix.identity(n) * t.transpose()).entries)
        assert lat.contains(image)
