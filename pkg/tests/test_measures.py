import math
from fractions import Fraction

import numpy as np
import pytest

from helpers import bits, random_grid_distribution, rational_distribution
from sxpid.builtins import (parity_distribution, pwunq_distribution,
                            rnd_distribution, rnderr_distribution,
                            xor_distribution, xorduplicate_distribution)
from sxpid.dist import (Alphabet, DistributionError, JointDistribution,
                        Realization)
from sxpid.lattice import Antichain, enumerate_lattice, leq
from sxpid import measures as M

L2 = math.log2


def node(n, *colls):
    return Antichain.of(n, colls)


# ---------------------------------------------------------------------------
# pointwise values on the worked examples
# ---------------------------------------------------------------------------

class TestXor:
    d = xor_distribution()
    r = Realization(t=0, s=(1, 1))

    def test_parts_bottom(self):
        assert M.i_sx_plus(self.d, self.r, node(2, [1], [2])) == \
            pytest.approx(-L2(3 / 4), abs=1e-12)
        assert M.i_sx_minus(self.d, self.r, node(2, [1], [2])) == \
            pytest.approx(1.0, abs=1e-12)

    def test_signed_bottom(self):
        assert M.i_sx(self.d, self.r, node(2, [1], [2])) == \
            pytest.approx(L2(2 / 3), abs=1e-12)

    def test_single_source_is_marginal_surprisal(self):
        assert M.i_sx_plus(self.d, self.r, node(2, [1])) == pytest.approx(1.0)
        assert M.i_sx_minus(self.d, self.r, node(2, [1])) == pytest.approx(1.0)

    def test_local_mi(self):
        assert M.local_mi(self.d, self.r, [1, 2]) == pytest.approx(1.0)
        assert M.local_mi(self.d, self.r, [1]) == pytest.approx(0.0)

    def test_full_coalition_matches_local_mi(self):
        assert M.i_sx(self.d, self.r, node(2, [1, 2])) == \
            pytest.approx(M.local_mi(self.d, self.r, [1, 2]), abs=1e-12)

    def test_atom_table(self):
        dec = M.pointwise_decomposition(self.d, self.r)
        want = {"{1}{2}": L2(2 / 3), "{1}": L2(3 / 2), "{2}": L2(3 / 2),
                "{1,2}": L2(4 / 3)}
        for name, v in want.items():
            assert dec.pi_by_name(name) == pytest.approx(v, abs=1e-12)

    def test_exact_ratios(self):
        dec = M.pointwise_decomposition(self.d, self.r)
        lat = dec.lattice
        assert dec.exact_pi_plus[lat.index(lat.top)] == Fraction(4, 3)
        assert dec.exact_i_plus[lat.index(lat.bottom)] == Fraction(4, 3)
        assert dec.exact_pi_minus[lat.index(lat.bottom)] == Fraction(2, 1)

    def test_forms_agree(self):
        for a in enumerate_lattice(2).nodes:
            base = M.i_sx(self.d, self.r, a)
            assert M.i_sx_conditional_form(self.d, self.r, a) == \
                pytest.approx(base, abs=1e-12)
            assert M.i_sx_exclusion_form(self.d, self.r, a) == \
                pytest.approx(base, abs=1e-12)


class TestPwUnq:
    def test_rows_and_averages(self):
        d = pwunq_distribution()
        decs = M.decompose_support(d)
        lat = decs[0].lattice
        for dec in decs:
            informative_src = 2 if dec.realization.s[0] == 0 else 1
            want_plus = {"{1}{2}": 1, "{1,2}": 0,
                         "{1}": 1 if informative_src == 1 else 0,
                         "{2}": 1 if informative_src == 2 else 0}
            for name, v in want_plus.items():
                j = lat.index(lat.node_by_name(name))
                assert dec.pi_plus[j] == pytest.approx(v, abs=1e-12)
                assert dec.pi_minus[j] == pytest.approx(
                    1 if name == "{1}{2}" else 0, abs=1e-12)
        avg = M.average_decomposition(d, decompositions=decs)
        assert avg.pi_by_name("{1}{2}") == pytest.approx(0, abs=1e-12)
        assert avg.pi_by_name("{1}") == pytest.approx(0.5, abs=1e-12)
        assert avg.pi_by_name("{2}") == pytest.approx(0.5, abs=1e-12)
        assert avg.pi_by_name("{1,2}") == pytest.approx(0, abs=1e-12)

    def test_pointwise_parts_example(self):
        d = pwunq_distribution()
        r = Realization(t=0, s=(0, 1))  # labels t=1, s=(0,1)
        a = node(2, [1], [2])
        assert M.i_sx_plus(d, r, a) == pytest.approx(1.0, abs=1e-12)
        assert M.i_sx_minus(d, r, a) == pytest.approx(1.0, abs=1e-12)


class TestRndErr:
    d = rnderr_distribution()

    def test_redundant_row(self):
        dec = M.pointwise_decomposition(self.d, Realization(t=0, s=(0, 0)))
        assert dec.pi_by_name("{1}{2}") == pytest.approx(L2(8 / 5), abs=1e-12)
        assert dec.pi_by_name("{1}") == pytest.approx(
            L2(5 / 4) - 0, abs=1e-12)
        lat = dec.lattice
        assert dec.pi_plus[lat.index(lat.top)] == pytest.approx(L2(16 / 15),
                                                                abs=1e-12)
        assert dec.pi_minus[lat.index(lat.node_by_name("{2}"))] == \
            pytest.approx(L2(4 / 3), abs=1e-12)

    def test_faulty_row(self):
        dec = M.pointwise_decomposition(self.d, Realization(t=0, s=(0, 1)))
        lat = dec.lattice
        assert dec.pi_plus[lat.index(lat.bottom)] == pytest.approx(L2(8 / 7),
                                                                   abs=1e-12)
        assert dec.pi_plus[lat.index(lat.node_by_name("{1}"))] == \
            pytest.approx(L2(7 / 4), abs=1e-12)
        # the top informative atom is log2(16/7); the non-negativity theorem
        # pins the numerator (a published 16/17 there would be negative)
        assert dec.pi_plus[lat.index(lat.top)] == pytest.approx(L2(16 / 7),
                                                                abs=1e-12)
        assert dec.pi_minus[lat.index(lat.node_by_name("{2}"))] == \
            pytest.approx(2.0, abs=1e-12)

    def test_averages(self):
        avg = M.average_decomposition(self.d)
        assert avg.pi_by_name("{1}{2}") == pytest.approx(
            0.75 * L2(8 / 5) + 0.25 * L2(8 / 7), abs=1e-12)
        assert avg.pi_by_name("{2}") == pytest.approx(-0.367993, abs=5e-7)
        assert avg.pi_by_name("{1,2}") == pytest.approx(0.367993, abs=5e-7)


class TestParity3:
    def test_symmetry_across_realizations(self):
        d = parity_distribution(3)
        decs = M.decompose_support(d)
        for dec in decs[1:]:
            assert np.allclose(dec.pi, decs[0].pi, atol=1e-12)

    def test_table_values(self):
        avg = M.average_decomposition(parity_distribution(3))
        want = {"{1}{2}{3}": L2(8 / 7), "{1}{2}": L2(7 / 6) - L2(4 / 3),
                "{1}{2,3}": L2(36 / 35) - L2(9 / 8), "{1}": L2(5 / 4),
                "{1,2}{1,3}{2,3}": L2(875 / 864) - L2(32 / 27),
                "{1,2}": L2(9 / 8), "{1,2}{1,3}": L2(16 / 15),
                "{1,2,3}": L2(32 / 27)}
        for name, v in want.items():
            assert avg.pi_by_name(name) == pytest.approx(v, abs=1e-12), name


# ---------------------------------------------------------------------------
# structural invariants on random distributions
# ---------------------------------------------------------------------------

def test_decomposition_invariants_random():
    rng = np.random.default_rng(11)
    for n in (2, 3):
        lat = enumerate_lattice(n)
        for _ in range(5):
            d = random_grid_distribution(n, rng)
            for r in d.support[:3]:
                dec = M.pointwise_decomposition(d, r, lat)
                for j, a in enumerate(lat.nodes):
                    assert dec.i[j] == pytest.approx(
                        dec.i_plus[j] - dec.i_minus[j], abs=1e-12)
                    assert dec.pi[j] == pytest.approx(
                        dec.pi_plus[j] - dec.pi_minus[j], abs=1e-12)
                    assert dec.pi_plus[j] >= -1e-9
                    assert dec.pi_minus[j] >= -1e-9
                    # downset re-summation through the pairwise order
                    resum = sum(dec.pi_plus[k] for k, b in enumerate(lat.nodes)
                                if leq(b, a))
                    assert resum == pytest.approx(dec.i_plus[j], abs=1e-9)


def test_average_sign_structure():
    rng = np.random.default_rng(3)
    d = random_grid_distribution(2, rng)
    avg = M.average_decomposition(d)
    assert all(v >= -1e-9 for v in avg.Pi_plus)
    assert all(v >= -1e-9 for v in avg.Pi_minus)
    for j in range(len(avg.Pi)):
        assert avg.Pi[j] == pytest.approx(avg.Pi_plus[j] - avg.Pi_minus[j],
                                          abs=1e-12)


def test_top_node_total_is_local_mi():
    rng = np.random.default_rng(5)
    d = random_grid_distribution(3, rng)
    lat = enumerate_lattice(3)
    for r in d.support[:4]:
        dec = M.pointwise_decomposition(d, r, lat)
        assert math.fsum(dec.pi) == pytest.approx(
            M.local_mi(d, r, [1, 2, 3]), abs=1e-9)


def test_workers_bit_identical():
    d = parity_distribution(3)
    one = M.decompose_support(d, workers=1)
    two = M.decompose_support(d, workers=2)
    for a, b in zip(one, two):
        assert a.pi == b.pi and a.i_plus == b.i_plus
    avg1 = M.average_decomposition(d, decompositions=one)
    avg2 = M.average_decomposition(d, decompositions=two)
    assert avg1 == avg2


def test_realization_not_in_support():
    d = xor_distribution()
    with pytest.raises(DistributionError, match="support"):
        M.pointwise_decomposition(d, Realization(t=1, s=(1, 1)))


# ---------------------------------------------------------------------------
# composite targets
# ---------------------------------------------------------------------------

def composite_target_distribution(rng):
    """Random n=2 distribution whose 4 target symbols factor as 2 x 2."""
    return random_grid_distribution(2, rng, t_card=4)


def test_target_chain_rule_random():
    rng = np.random.default_rng(23)
    group_of = [0, 0, 1, 1]  # symbol index -> first factor
    for _ in range(10):
        d = composite_target_distribution(rng)
        for r in d.support[:6]:
            for a in enumerate_lattice(2).nodes:
                whole, first, second = M.target_chain_terms(d, r, a, group_of)
                assert whole == pytest.approx(first + second, abs=1e-9)


def test_conditional_independent_second_factor():
    # t2 independent of everything given t1: second chain term vanishes
    rng = np.random.default_rng(4)
    base = random_grid_distribution(2, rng, t_card=2)
    rows = []
    for r, m in zip(base.support, base.masses):
        for t2 in (0, 1):
            rows.append((Realization(t=2 * r.t + t2, s=r.s), m * 0.5))
    d = JointDistribution.from_points(
        Alphabet("t", ("00", "01", "10", "11")), base.source_alphabets, rows,
        normalization_tolerance=1e-6)
    group_of = [0, 0, 1, 1]
    for r in d.support[:4]:
        for a in enumerate_lattice(2).nodes:
            assert M.conditional_i_sx(d, r, a, group_of) == \
                pytest.approx(0.0, abs=1e-9)


def test_duplicated_target_conditional_zero():
    # duplicating the target as (T, T): the second factor adds nothing
    base = xor_distribution()
    rows = [(r, m) for r, m in zip(base.support, base.masses)]
    d = JointDistribution.from_points(base.target_alphabet,
                                      base.source_alphabets, rows)
    group_of = [0, 1]  # t1 = t: conditioning pins the fine target
    for r in d.support:
        assert M.conditional_i_sx(d, r, node(2, [1, 2]), group_of) == \
            pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# self-shared information
# ---------------------------------------------------------------------------

def test_self_shared_xor():
    d = xor_distribution()
    assert M.self_shared(d, (1, 1), node(2, [1], [2])) == \
        pytest.approx(-L2(3 / 4), abs=1e-12)


def test_self_shared_full_cover():
    # a union event that exhausts the support carries zero self-information
    d = JointDistribution.from_points(
        bits("t"), [bits("s1"), bits("s2")],
        [(Realization(t=0, s=(0, 0)), Fraction(1, 2)),
         (Realization(t=1, s=(0, 1)), Fraction(1, 2))])
    assert M.self_shared(d, (0, 0), node(2, [1], [2])) == pytest.approx(0.0)
    # while the rnd pair at s=(0,0) excludes half the mass: 1 bit
    assert M.self_shared(rnd_distribution(), (0, 0), node(2, [1])) == \
        pytest.approx(1.0)


def test_self_shared_upper_bound_random():
    rng = np.random.default_rng(17)
    for _ in range(10):
        d = random_grid_distribution(2, rng)
        lat = enumerate_lattice(2)
        for r in d.support:
            for a in lat.nodes:
                bound = M.self_shared(d, r.s, a)
                assert bound >= -1e-12
                for u in range(2):
                    val = M.i_sx(d, Realization(t=u, s=r.s), a)
                    assert bound + 1e-9 >= val


# ---------------------------------------------------------------------------
# entropy decomposition
# ---------------------------------------------------------------------------

def test_entropy_two_independent_bits():
    ent = M.entropy_decomposition(xor_distribution())
    lat = ent.lattice
    assert ent.I[lat.index(lat.top)] == pytest.approx(2.0, abs=1e-9)
    # mechanistic shared entropy: nonzero even though the bits are independent
    assert ent.Pi[lat.index(lat.bottom)] == pytest.approx(L2(4 / 3), abs=1e-9)


def test_entropy_correlated_pair():
    d = rnd_distribution()
    ent = M.entropy_decomposition(d)
    lat = ent.lattice
    assert ent.Pi[lat.index(lat.bottom)] == pytest.approx(1.0, abs=1e-9)
    assert ent.I[lat.index(lat.top)] == pytest.approx(1.0, abs=1e-9)


def test_entropy_xor_triple():
    # sources (S1, S2, S1 xor S2): joint entropy 2 bits
    base = xor_distribution()
    rows = [(Realization(t=0, s=(r.s[0], r.s[1], r.t)), m)
            for r, m in zip(base.support, base.masses)]
    d = JointDistribution.from_points(
        Alphabet("t", ("0",)), [bits("s1"), bits("s2"), bits("s3")], rows)
    ent = M.entropy_decomposition(d)
    lat = ent.lattice
    assert ent.I[lat.index(lat.top)] == pytest.approx(2.0, abs=1e-9)


# ---------------------------------------------------------------------------
# axiom suite, duplicates, V-channel
# ---------------------------------------------------------------------------

def test_axiom_suite_xor_passes():
    rep = M.axiom_suite(xor_distribution())
    assert rep.passed and rep.checks_run > 0


def test_axiom_suite_random_passes():
    rng = np.random.default_rng(29)
    for n in (2, 3):
        rep = M.axiom_suite(random_grid_distribution(n, rng))
        assert rep.passed, rep.violations[:2]


def test_corrupted_table_reports_edge():
    lat = enumerate_lattice(2)
    values = {a: float(j) for j, a in enumerate(lat.nodes)}
    # force a decrease along the cover edge bottom -> {1}
    values[lat.bottom] = 10.0
    bad = M.check_lattice_monotonicity(lat, values)
    assert bad and bad[0][0] == "{1}{2}"


def test_duplicate_invariance_xorduplicate():
    rep = M.duplicate_invariance_check(
        xorduplicate_distribution(), pair=(1, 3),
        expected_pi={"{1}{3}": 0.5849, "{2}": 0.5849, "{1,2}{2,3}": 0.415,
                     "{1}{2}": 0.0, "{2}{3}": 0.0, "{2}{1,3}": 0.0,
                     "{1}{2}{3}": -0.5849})
    assert rep.passed, rep.violations[:2]


def test_duplicate_invariance_flags_non_duplicate():
    rep = M.duplicate_invariance_check(xor_distribution(), pair=(1, 2))
    assert not rep.passed
    assert rep.violations[0].kind == "duplicate-pair"


def test_v_channel_table():
    rep = M.v_channel_xor()
    assert len(rep.rows) == 12
    assert rep.n_incorrect == 4 and rep.n_correct == 8
    assert all(row.carries_shared for row in rep.rows if not row.correct)
    assert rep.avg_info_all > 0
    assert rep.avg_info_shared == pytest.approx(L2(2 / 3), abs=1e-12)
    # the shared-row average is exactly the averaged bottom atom
    avg = M.average_decomposition(xor_distribution())
    assert rep.avg_info_shared == pytest.approx(avg.pi_by_name("{1}{2}"),
                                                abs=1e-12)
