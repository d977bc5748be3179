"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Expected constants are frozen here; where a published table entry
is internally inconsistent (non-negativity or column arithmetic pins a
different value), the frozen constant is the arithmetically forced one
and the comparison against the printed digits is widened to the printing
precision actually used. See notes in the repository history.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_grid_distribution
from sxpid.builtins import (parity_distribution, pwunq_distribution,
                            rnd_distribution, rnderr_distribution,
                            xor_distribution, xorduplicate_distribution)
from sxpid.dist import Realization
from sxpid.lattice import Antichain, NODE_COUNTS, enumerate_lattice
from sxpid import grad as G
from sxpid import measures as M

L2 = math.log2


def _report(num: int, desc: str, t0: float, budget: float) -> None:
    elapsed = time.perf_counter() - t0
    print(f"\n[criterion {num:2d}] PASS {desc} ({elapsed:.2f}s)")
    assert elapsed < budget, f"criterion {num} exceeded {budget}s"


def test_criterion_01_pwunq():
    t0 = time.perf_counter()
    d = pwunq_distribution()
    decs = M.decompose_support(d)
    avg = M.average_decomposition(d, decompositions=decs)
    for name, want in (("{1}{2}", 0.0), ("{1}", 0.5), ("{2}", 0.5),
                       ("{1,2}", 0.0)):
        assert avg.pi_by_name(name) == pytest.approx(want, abs=1e-9)
    lat = decs[0].lattice
    for dec in decs:
        which = 2 if dec.realization.s[0] == 0 else 1  # source fixing t
        plus = {"{1}{2}": 1, "{1}": int(which == 1), "{2}": int(which == 2),
                "{1,2}": 0}
        minus = {"{1}{2}": 1, "{1}": 0, "{2}": 0, "{1,2}": 0}
        for name in plus:
            j = lat.index(lat.node_by_name(name))
            assert dec.pi_plus[j] == pytest.approx(plus[name], abs=1e-9)
            assert dec.pi_minus[j] == pytest.approx(minus[name], abs=1e-9)
    _report(1, "pointwise-unique distribution matches its table exactly",
            t0, 1.0)


def test_criterion_02_rnderr():
    t0 = time.perf_counter()
    d = rnderr_distribution()
    decs = M.decompose_support(d)
    lat = decs[0].lattice
    names = ["{1}{2}", "{1}", "{2}", "{1,2}"]
    for dec in decs:
        faulty = dec.realization.s[0] != dec.realization.s[1]
        if faulty:
            plus = [L2(8 / 7), L2(7 / 4), L2(7 / 4), L2(16 / 7)]
            minus2 = 2.0
        else:
            plus = [L2(8 / 5), L2(5 / 4), L2(5 / 4), L2(16 / 15)]
            minus2 = L2(4 / 3)
        for name, want in zip(names, plus):
            j = lat.index(lat.node_by_name(name))
            assert dec.pi_plus[j] == pytest.approx(want, abs=1e-9)
        for name in names:
            j = lat.index(lat.node_by_name(name))
            want = minus2 if name == "{2}" else 0.0
            assert dec.pi_minus[j] == pytest.approx(want, abs=1e-9)

    avg = M.average_decomposition(d, decompositions=decs)
    exact = {"{1}{2}": 0.75 * L2(8 / 5) + 0.25 * L2(8 / 7),
             "{1}": 0.75 * L2(5 / 4) + 0.25 * L2(7 / 4),
             "{2}": 0.75 * L2(5 / 4) + 0.25 * L2(7 / 4)
                    - (0.75 * L2(4 / 3) + 0.5),
             "{1,2}": 0.75 * L2(16 / 15) + 0.25 * L2(16 / 7)}
    for name, want in exact.items():
        assert avg.pi_by_name(name) == pytest.approx(want, abs=1e-9)
    # printed table digits: the first two are correctly rounded (5e-4); the
    # last two were truncated from +-0.36799, so only 1e-3 can hold
    assert avg.pi_by_name("{1}{2}") == pytest.approx(0.557, abs=5e-4)
    assert avg.pi_by_name("{1}") == pytest.approx(0.443, abs=5e-4)
    assert avg.pi_by_name("{2}") == pytest.approx(-0.367, abs=1e-3)
    assert avg.pi_by_name("{1,2}") == pytest.approx(0.367, abs=1e-3)
    _report(2, "noisy-redundant distribution: exact pointwise logs and "
               "averages", t0, 1.0)


def test_criterion_03_xor():
    t0 = time.perf_counter()
    d = xor_distribution()
    r = Realization(t=0, s=(1, 1))
    got = M.i_sx(d, r, Antichain.of(2, [[1], [2]]))
    assert got == pytest.approx(L2(2 / 3), abs=1e-9)
    assert got == pytest.approx(-0.58496, abs=1e-3)
    dec = M.pointwise_decomposition(d, r)
    exact = {"{1}{2}": L2(2 / 3), "{1}": L2(3 / 2), "{2}": L2(3 / 2),
             "{1,2}": L2(4 / 3)}
    printed = {"{1}{2}": -0.585, "{1}": 0.585, "{2}": 0.585, "{1,2}": 0.415}
    for name in exact:
        assert dec.pi_by_name(name) == pytest.approx(exact[name], abs=1e-9)
        assert dec.pi_by_name(name) == pytest.approx(printed[name], abs=1e-3)
    _report(3, "xor realization: negative shared information and its atoms",
            t0, 1.0)


# 3-bit parity: printed digits per node as (Pi_plus, Pi_minus, Pi). Two cells
# carry wider bounds: the triple-pair node's informative atom is
# log2(875/864) = 0.018251 (printed truncated to 0.0182) and with it the net
# value -0.226861 (printed -0.2268). The singleton misinformative entries are
# forced to 0 by Pi = Pi+ - Pi- together with the printed Pi+ and Pi columns.
PARITY3_PRINTED = {
    "{1,2,3}": (0.2451, 0.0, 0.2451),
    "{1,2}": (0.1699, 0.0, 0.1699), "{1,3}": (0.1699, 0.0, 0.1699),
    "{2,3}": (0.1699, 0.0, 0.1699),
    "{1,2}{1,3}": (0.0931, 0.0, 0.0931), "{1,2}{2,3}": (0.0931, 0.0, 0.0931),
    "{1,3}{2,3}": (0.0931, 0.0, 0.0931),
    "{1}": (0.3219, 0.0, 0.3219), "{2}": (0.3219, 0.0, 0.3219),
    "{3}": (0.3219, 0.0, 0.3219),
    "{1,2}{1,3}{2,3}": (0.0182, 0.2451, -0.2268),
    "{1}{2,3}": (0.0406, 0.1699, -0.1293),
    "{2}{1,3}": (0.0406, 0.1699, -0.1293),
    "{3}{1,2}": (0.0406, 0.1699, -0.1293),
    "{1}{2}": (0.2224, 0.415, -0.1926), "{1}{3}": (0.2224, 0.415, -0.1926),
    "{2}{3}": (0.2224, 0.415, -0.1926),
    "{1}{2}{3}": (0.1926, 0.0, 0.1926),
}

PARITY3_EXACT = {
    "{1,2,3}": (L2(32 / 27), 0.0),
    "{1,2}": (L2(9 / 8), 0.0), "{1,3}": (L2(9 / 8), 0.0),
    "{2,3}": (L2(9 / 8), 0.0),
    "{1,2}{1,3}": (L2(16 / 15), 0.0), "{1,2}{2,3}": (L2(16 / 15), 0.0),
    "{1,3}{2,3}": (L2(16 / 15), 0.0),
    "{1}": (L2(5 / 4), 0.0), "{2}": (L2(5 / 4), 0.0), "{3}": (L2(5 / 4), 0.0),
    "{1,2}{1,3}{2,3}": (L2(875 / 864), L2(32 / 27)),
    "{1}{2,3}": (L2(36 / 35), L2(9 / 8)), "{2}{1,3}": (L2(36 / 35), L2(9 / 8)),
    "{3}{1,2}": (L2(36 / 35), L2(9 / 8)),
    "{1}{2}": (L2(7 / 6), L2(4 / 3)), "{1}{3}": (L2(7 / 6), L2(4 / 3)),
    "{2}{3}": (L2(7 / 6), L2(4 / 3)),
    "{1}{2}{3}": (L2(8 / 7), 0.0),
}

PARITY3_WIDE = {("{1,2}{1,3}{2,3}", "plus"), ("{1,2}{1,3}{2,3}", "net")}


def test_criterion_04_parity3_table():
    t0 = time.perf_counter()
    avg = M.average_decomposition(parity_distribution(3))
    lat = avg.lattice
    for name, (pp, pm, pn) in PARITY3_PRINTED.items():
        j = lat.index(lat.node_by_name(name))
        tol_p = 1e-4 if (name, "plus") in PARITY3_WIDE else 5e-5
        tol_n = 1e-4 if (name, "net") in PARITY3_WIDE else 5e-5
        assert avg.Pi_plus[j] == pytest.approx(pp, abs=tol_p), (name, "plus")
        assert avg.Pi_minus[j] == pytest.approx(pm, abs=5e-5), (name, "minus")
        assert avg.Pi[j] == pytest.approx(pn, abs=tol_n), (name, "net")
        ep, em = PARITY3_EXACT[name]
        assert avg.Pi_plus[j] == pytest.approx(ep, abs=1e-9)
        assert avg.Pi_minus[j] == pytest.approx(em, abs=1e-9)
        assert avg.Pi[j] == pytest.approx(ep - em, abs=1e-9)
    _report(4, "3-bit parity: all 18 averaged atoms in all three blocks",
            t0, 1.0)


def test_criterion_05_xorduplicate():
    t0 = time.perf_counter()
    want = {"{1}{3}": 0.5849, "{2}": 0.5849, "{1,2}{2,3}": 0.415,
            "{1}{2}": 0.0, "{2}{3}": 0.0, "{2}{1,3}": 0.0,
            "{1}{2}{3}": -0.5849}
    d = xorduplicate_distribution()
    rep = M.duplicate_invariance_check(d, pair=(1, 3), expected_pi=want,
                                       tol=1e-3)
    assert rep.passed, rep.violations[:3]
    avg = M.average_decomposition(d)
    for name, v in want.items():
        assert avg.pi_by_name(name) == pytest.approx(v, abs=1e-3)
    _report(5, "duplicating a source relocates but never changes the atoms",
            t0, 1.0)


def test_criterion_06_parity4_atom():
    t0 = time.perf_counter()
    d = parity_distribution(4)
    r = Realization(t=1, s=(0, 0, 1, 0))
    lat = enumerate_lattice(4)
    alpha = lat.node_by_name("{1,2}{3,4}")
    assert M.i_sx(d, r, alpha) == pytest.approx(L2(6 / 7), abs=1e-9)
    dec = M.pointwise_decomposition(d, r, lat)
    assert dec.pi[lat.index(alpha)] == pytest.approx(-0.0145, abs=5e-4)
    _report(6, "4-bit parity two-coalition atom on the 166-node lattice",
            t0, 5.0)


def test_criterion_07_v_channel():
    t0 = time.perf_counter()
    rep = M.v_channel_xor()
    assert len(rep.rows) == 12
    assert rep.n_incorrect == 4 and rep.n_correct == 8
    assert all(row.carries_shared for row in rep.rows if not row.correct)
    assert all(row.correct for row in rep.rows if not row.carries_shared)
    assert rep.avg_info_all > 0
    assert rep.avg_info_shared < 0
    assert rep.avg_info_shared == pytest.approx(L2(2 / 3), abs=1e-12)
    _report(7, "statement channel: 4 wrong / 8 right, positive overall, "
               "negative on shared rows", t0, 1.0)


# ---------------------------------------------------------------------------
# criterion 8: the property battery over seeded random distributions
# ---------------------------------------------------------------------------

def _theorem_and_moebius_checks(d, lat, Lf):
    decs = M.decompose_support(d, lat)
    by_source: dict[tuple, list] = {}
    for dec in decs:
        pi_p = np.asarray(dec.pi_plus)
        pi_m = np.asarray(dec.pi_minus)
        assert pi_p.min() >= -1e-9 and pi_m.min() >= -1e-9  # non-negativity
        # downset re-summation reproduces the cumulative values
        assert np.max(np.abs(pi_p @ Lf - np.asarray(dec.i_plus))) <= 1e-9
        assert np.max(np.abs(pi_m @ Lf - np.asarray(dec.i_minus))) <= 1e-9
        by_source.setdefault(dec.realization.s, []).append(dec)
    # self-shared bound: i+ depends on the sources only and dominates i
    for group in by_source.values():
        base = np.asarray(group[0].i_plus)
        for dec in group:
            assert np.max(np.abs(np.asarray(dec.i_plus) - base)) <= 1e-12
            assert np.min(base - np.asarray(dec.i)) >= -1e-9
    return decs


def _closed_form_checks(d, lat, decs):
    for dec in decs:
        for j, a in enumerate(lat.nodes):
            got = M.atom_via_closed_form(d, dec.realization, a, "plus", lat)
            assert abs(got - dec.pi_plus[j]) <= 1e-9
            got = M.atom_via_closed_form(d, dec.realization, a, "minus", lat)
            assert abs(got - dec.pi_minus[j]) <= 1e-9


def _chain_rule_checks(d, lat, group_of):
    groups = sorted(set(group_of))
    coarse = M.coarsen_target(d, group_of)
    conds = {g: M.condition_on_target_group(d, group_of, g) for g in groups}
    avg_resid = np.zeros(len(lat.nodes))
    for r, w in zip(d.support, d.masses):
        r1 = Realization(t=groups.index(group_of[r.t]), s=r.s)
        for j, a in enumerate(lat.nodes):
            whole = M.i_sx(d, r, a)
            first = M.i_sx(coarse, r1, a)
            second = M.i_sx(conds[group_of[r.t]], r, a)
            resid = whole - first - second
            assert abs(resid) <= 1e-9
            avg_resid[j] += float(w) * resid
    assert np.max(np.abs(avg_resid)) <= 1e-9


def test_criterion_08_property_battery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240817)
    counts = {2: 600, 3: 400}
    for n, count in counts.items():
        lat = enumerate_lattice(n)
        Lf = lat.leq_matrix.astype(float)
        for k in range(count):
            d = random_grid_distribution(n, rng)
            decs = _theorem_and_moebius_checks(d, lat, Lf)
            _closed_form_checks(d, lat, decs)
            assert M.form_equivalence_max_dev(d, lat) <= 1e-12
            assert M.child_meet_mass_identity_max_dev(d, lat) <= 1e-12
            rep = M.axiom_suite(d, lat)
            assert rep.passed, rep.violations[:2]
    # the builtin examples obey the non-negativity theorem as well
    for d in (xor_distribution(), pwunq_distribution(), rnd_distribution(),
              rnderr_distribution(), xorduplicate_distribution()):
        for dec in M.decompose_support(d):
            assert min(dec.pi_plus) >= -1e-9 and min(dec.pi_minus) >= -1e-9
    # target chain rule on composite-target distributions
    lat2 = enumerate_lattice(2)
    group_of = [0, 0, 1, 1]
    for _ in range(200):
        d = random_grid_distribution(2, rng, t_card=4)
        _chain_rule_checks(d, lat2, group_of)
    # public self-shared helper agrees with the bound used above
    d = random_grid_distribution(2, rng)
    for a in lat2.nodes:
        s = d.support[0].s
        assert M.self_shared(d, s, a) == pytest.approx(
            M.i_sx_plus(d, d.support[0], a), abs=1e-12)
    _report(8, "1000 seeded distributions: non-negativity, axioms, "
               "monotonicity, inversion, closed form, form equivalence, "
               "meet-mass identity, chain rule, self-shared bound", t0, 120.0)


def test_criterion_09_gradient_battery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    plans = {
        2: (60, ["{1}{2}", "{1}", "{1,2}"], ["{1}{2}", "{1}", "{1,2}"]),
        3: (50, ["{1}{2}{3}", "{2}", "{1}{2,3}", "{1,2,3}"],
            ["{1}{2}{3}", "{2}", "{1,2,3}"]),
    }
    checked = 0
    for n, (points, node_names, avg_names) in plans.items():
        lat = enumerate_lattice(n)
        nodes = [lat.node_by_name(x) for x in node_names]
        avg_nodes = [lat.node_by_name(x) for x in avg_names]
        shape = (2,) + (2,) * n
        cells = [Realization(t=idx[0], s=tuple(idx[1:]))
                 for idx in np.ndindex(*shape)]
        for _ in range(points):
            pt = G.random_interior(shape, rng)
            r = cells[rng.integers(len(cells))]
            for alpha in nodes:
                for which in ("plus", "minus"):
                    rec = G.grad_i_sx_parts(pt, r, alpha, which)
                    fd = G.central_difference(
                        lambda p: G.pointwise_value(p, shape, r, alpha,
                                                    "i", which), pt.p)
                    assert G.fd_mismatch(rec.partials, fd) <= 1.0
                    arec = G.grad_atom(pt, r, alpha, which, path="closed")
                    rrec = G.grad_atom(pt, r, alpha, which, path="recursion")
                    assert np.max(np.abs(arec.partials - rrec.partials)) <= 1e-9
                    fd = G.central_difference(
                        lambda p: G.pointwise_value(p, shape, r, alpha,
                                                    "pi", which), pt.p)
                    assert G.fd_mismatch(arec.partials, fd) <= 1.0
            for alpha in avg_nodes:
                rec = G.grad_average(pt, alpha, "net")
                fd = G.central_difference(
                    lambda p: G.average_atom_value(p, shape, alpha, "net"),
                    pt.p)
                assert G.fd_mismatch(rec.partials, fd) <= 1.0
            checked += 1
    assert checked >= 100
    _report(9, f"analytic gradients vs central differences at {checked} "
               "interior points", t0, 60.0)


def test_criterion_10_lattice_cardinalities():
    t0 = time.perf_counter()
    for n, want in NODE_COUNTS.items():
        assert len(enumerate_lattice(n)) == want
    _report(10, "antichain counts 1, 4, 18, 166, 7579 for 1..5 sources",
            t0, 30.0)
