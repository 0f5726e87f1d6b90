import random
from fractions import Fraction

import pytest

from cylcc.errors import ValidationError
from cylcc.indices import (
    CurveTopology,
    ReebOrbit,
    automatic_transversality,
    classify_orbit,
    cover_index,
    cz_index,
    fredholm_index,
    winding_bounds_check,
)
from cylcc.spectral import OperatorKind, closed_form_spectrum


def orbit(oid, mult, simple_type, cz_simple, action=None):
    return ReebOrbit(
        id=oid,
        simple_id=f"{oid}_s",
        multiplicity=mult,
        simple_type=simple_type,
        action=Fraction(action if action is not None else 2 * mult),
        cz_simple=cz_simple,
    )


class TestClassify:
    def test_double_cover_of_negative_hyperbolic_is_bad(self):
        cls = classify_orbit(orbit("g", 2, "neg_hyperbolic", 1))
        assert cls.parity == "even"
        assert cls.quality == "bad"

    def test_odd_cover_is_good(self):
        cls = classify_orbit(orbit("g", 3, "neg_hyperbolic", 1))
        assert cls.parity == "odd"
        assert cls.quality == "good"

    def test_simple_positive_hyperbolic_is_even_good(self):
        cls = classify_orbit(orbit("h", 1, "pos_hyperbolic", 0))
        assert cls.parity == "even"
        assert cls.quality == "good"

    def test_parity_type_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            orbit("x", 1, "pos_hyperbolic", 1)
        with pytest.raises(ValidationError):
            orbit("x", 1, "neg_hyperbolic", 2)

    def test_parity_matches_cz_parity(self):
        rng = random.Random(7)
        for _ in range(100):
            if rng.random() < 0.5:
                o = orbit("a", rng.randint(1, 6), "pos_hyperbolic", 2 * rng.randint(-3, 3))
            else:
                o = orbit("a", rng.randint(1, 6), "neg_hyperbolic", 2 * rng.randint(-3, 3) + 1)
            assert (classify_orbit(o).parity == "even") == (cz_index(o) % 2 == 0)


class TestCzIndex:
    def test_multiplicative(self):
        assert cz_index(orbit("g", 2, "neg_hyperbolic", 1)) == 2

    def test_zero_base(self):
        assert cz_index(orbit("g", 5, "pos_hyperbolic", 0)) == 0

    def test_negative_base(self):
        assert cz_index(orbit("g", 3, "neg_hyperbolic", -1)) == -3


class TestFredholm:
    def test_cylinder(self):
        table = {
            "top": orbit("top", 1, "neg_hyperbolic", 1),
            "bot": orbit("bot", 1, "pos_hyperbolic", 0),
        }
        topo = CurveTopology(0, ("top",), ("bot",), c1=0)
        assert topo.euler_characteristic == 0
        assert fredholm_index(topo, table) == 1

    def test_plane(self):
        table = {"top": orbit("top", 2, "neg_hyperbolic", 1)}
        topo = CurveTopology(0, ("top",), (), c1=0)
        assert topo.euler_characteristic == 1
        assert fredholm_index(topo, table) == 1

    def test_negative_index_cover_configuration(self):
        # ind(v_0) = -k for the k-fold cover of an ind = -1 cylinder.
        k = 4
        table = {
            "top": orbit("top", k, "neg_hyperbolic", -1),
            "bot": orbit("bot", k, "pos_hyperbolic", 0),
        }
        topo = CurveTopology(0, ("top",), ("bot",), c1=0)
        assert fredholm_index(topo, table) == -k

    def test_unknown_id(self):
        topo = CurveTopology(0, ("ghost",), (), c1=0)
        with pytest.raises(LookupError):
            fredholm_index(topo, {})

    def test_puncture_lists_must_not_both_be_empty(self):
        with pytest.raises(ValidationError):
            CurveTopology(1, (), (), c1=0)


class TestCoverIndex:
    def test_paper_example(self):
        assert cover_index(-1, 3, 0) == -3

    def test_substitutions(self):
        assert cover_index(1, 2, 1) == 3
        assert cover_index(0, 7, 4) == 4

    def test_exact_linearity_in_branching(self):
        rng = random.Random(11)
        for _ in range(300):
            a = rng.randint(-20, 20)
            k = rng.randint(1, 9)
            b1 = rng.randint(0, 10)
            b2 = rng.randint(0, 10)
            assert cover_index(a, k, b1 + b2) == cover_index(a, k, b1) + b2

    def test_unbranched_cover_matches_fredholm_recomputation(self):
        rng = random.Random(13)
        for _ in range(200):
            cz_top = 2 * rng.randint(-4, 4) + 1
            cz_bot = 2 * rng.randint(-4, 4)
            m_top = 2 * rng.randint(0, 2) + 1  # odd cover of neg hyperbolic
            m_bot = rng.randint(1, 4)
            k = rng.randint(1, 5)
            base_table = {
                "t": orbit("t", m_top, "neg_hyperbolic", cz_top),
                "b": orbit("b", m_bot, "pos_hyperbolic", cz_bot),
            }
            cover_table = {
                "t": orbit("t", k * m_top, "neg_hyperbolic", cz_top, action=6 * k * m_top),
                "b": orbit("b", k * m_bot, "pos_hyperbolic", cz_bot, action=2 * k * m_bot),
            }
            topo = CurveTopology(0, ("t",), ("b",), c1=0)
            base = fredholm_index(topo, base_table)
            via_formula = fredholm_index(topo, cover_table)
            assert via_formula == cover_index(base, k, 0)


class TestAutomaticTransversality:
    def test_examples(self):
        assert automatic_transversality(1, 0, 2) is True
        assert automatic_transversality(0, 0, 0) is True
        assert automatic_transversality(2, 1, 2) is False

    def test_index_one_cylinders_between_odd_orbits(self):
        # chi = 0, genus 0; both ends odd means no even ends at all.
        assert automatic_transversality(1, 0, 0)
        for gamma0 in (0, 1, 2):
            assert automatic_transversality(2, 0, gamma0)


class TestWindingBounds:
    def test_pos_hyperbolic_no_violations(self):
        table = closed_form_spectrum(OperatorKind.pos_hyperbolic(0.1), 6)
        report = winding_bounds_check(table, cz=0)
        assert report.ok

    def test_neg_hyperbolic_no_violations(self):
        table = closed_form_spectrum(OperatorKind.neg_hyperbolic(0.2), 6)
        report = winding_bounds_check(table, cz=1)
        assert report.ok

    def test_shifted_cz_reports_violation(self):
        table = closed_form_spectrum(OperatorKind.pos_hyperbolic(0.1), 6)
        report = winding_bounds_check(table, cz=2)
        assert not report.ok
        assert any(v.index == 1 for v in report.violations)
