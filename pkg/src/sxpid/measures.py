"""Pointwise and average information quantities on the redundancy lattice.

For a realization (t, s) and an antichain alpha = {a_1..a_m}, the coalition
event of a_j is the cylinder {S_i = s_i for i in a_j}; E_alpha is the union
of coalition events. Everything in this module reduces to probabilities of
E_alpha and of its intersection with the target event:

    informative part      i+ = -log2 P(E_alpha)
    misinformative part   i- =  log2 P(t) - log2 P(t & E_alpha)
    shared information    i  = i+ - i-

The per-node increments pi+/pi-/pi are recovered by Moebius inversion of
i+/i- over the lattice; both are nonnegative, pi = pi+ - pi- may not be.
Averages weight the pointwise values by the realization masses over the
support. All logarithms are base 2; every quantity is in bits.

When the distribution's masses are exact rationals, pointwise quantities
are logs of rationals; for small lattices the exact log-arguments are
carried along so reports can print them (paper-style tables are exact
logs of small fractions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dist import (Alphabet, CylinderEvent, DistributionError, JointDistribution,
                   Mass, Realization, marginal)
from .lattice import (Antichain, BoundaryError, RedundancyLattice, closed_form_atom,
                      enumerate_lattice, invert_array)

#: Exact rational log-arguments are carried only for lattices this small;
#: beyond n=3 the fractions grow without bound through the recursion.
EXACT_RATIO_NODE_LIMIT = 18


def _log2(x: Mass) -> float:
    if isinstance(x, Fraction):
        if x <= 0:
            raise BoundaryError("log of a nonpositive probability")
        return math.log2(x.numerator) - math.log2(x.denominator)
    if x <= 0.0:
        raise BoundaryError("log of a nonpositive probability")
    return math.log2(x)


class _RealizationContext:
    """Event probabilities for one support realization, memoized.

    Support points are indexed by bit position; each source position and
    the target get a match bitset, coalition events are ANDs, antichain
    events ORs. Probabilities are mass sums over set bits, computed once
    per distinct bitset.
    """

    __slots__ = ("d", "r", "_src", "_tgt", "_coll", "_mass", "_node")

    def __init__(self, d: JointDistribution, r: Realization):
        if d.mass(r) == 0:
            raise DistributionError(f"realization {r} not in support")
        self.d = d
        self.r = r
        self._src = []
        for pos in range(d.n_sources):
            bits = 0
            for idx, sp in enumerate(d.support):
                if sp.s[pos] == r.s[pos]:
                    bits |= 1 << idx
            self._src.append(bits)
        tbits = 0
        for idx, sp in enumerate(d.support):
            if sp.t == r.t:
                tbits |= 1 << idx
        self._tgt = tbits
        self._coll: dict[int, int] = {}
        self._mass: dict[int, Mass] = {}
        self._node: dict[tuple[tuple[int, ...], bool], Mass] = {}

    def _collection_bits(self, mask: int) -> int:
        bits = self._coll.get(mask)
        if bits is None:
            bits = (1 << len(self.d.support)) - 1
            m = mask
            while m:
                low = m & -m
                bits &= self._src[low.bit_length() - 1]
                m ^= low
            self._coll[mask] = bits
        return bits

    def union_bits(self, masks: Sequence[int]) -> int:
        bits = 0
        for mask in masks:
            bits |= self._collection_bits(mask)
        return bits

    def mass_of(self, bits: int) -> Mass:
        out = self._mass.get(bits)
        if out is None:
            masses = self.d.masses
            picked = []
            b = bits
            while b:
                low = b & -b
                picked.append(masses[low.bit_length() - 1])
                b ^= low
            if picked and isinstance(picked[0], float):
                out = math.fsum(picked)
            else:
                out = sum(picked, Fraction(0))
            self._mass[bits] = out
        return out

    def p_target(self) -> Mass:
        return self.mass_of(self._tgt)

    def prob(self, masks: Sequence[int], with_target: bool) -> Mass:
        key = (tuple(masks), with_target)
        out = self._node.get(key)
        if out is None:
            bits = self.union_bits(masks)
            if with_target:
                bits &= self._tgt
            out = self.mass_of(bits)
            self._node[key] = out
        return out

    def prob_complement_intersection(self, masks: Sequence[int],
                                     with_target: bool) -> Mass:
        """Mass of support points excluded by every coalition event."""
        bits = ~self.union_bits(masks) & ((1 << len(self.d.support)) - 1)
        if with_target:
            bits &= self._tgt
        return self.mass_of(bits)


def _context(d: JointDistribution, r: Realization) -> _RealizationContext:
    return _RealizationContext(d, r)


def _check_alpha(d: JointDistribution, alpha: Antichain) -> None:
    if alpha.n != d.n_sources:
        raise DistributionError(
            f"antichain over {alpha.n} sources, distribution has {d.n_sources}")


# ---------------------------------------------------------------------------
# Pointwise quantities at a single (realization, node).
# ---------------------------------------------------------------------------

def i_sx_plus(d: JointDistribution, r: Realization, alpha: Antichain) -> float:
    """Informative shared information: -log2 of the union-event probability."""
    _check_alpha(d, alpha)
    return -_log2(_context(d, r).prob(alpha.masks, with_target=False))


def i_sx_minus(d: JointDistribution, r: Realization, alpha: Antichain) -> float:
    """Misinformative shared information: log2 P(t) / P(t & union event)."""
    _check_alpha(d, alpha)
    ctx = _context(d, r)
    return _log2(ctx.p_target()) - _log2(ctx.prob(alpha.masks, with_target=True))


def i_sx(d: JointDistribution, r: Realization, alpha: Antichain) -> float:
    """Signed shared information, the difference of the two parts."""
    _check_alpha(d, alpha)
    ctx = _context(d, r)
    plus = -_log2(ctx.prob(alpha.masks, with_target=False))
    minus = _log2(ctx.p_target()) - _log2(ctx.prob(alpha.masks, with_target=True))
    return plus - minus


def i_sx_conditional_form(d: JointDistribution, r: Realization,
                          alpha: Antichain) -> float:
    """The OR-statement form log2 p(t | some coalition fully matches) / p(t).

    Derived check only; must equal :func:`i_sx` to float precision.
    """
    _check_alpha(d, alpha)
    ctx = _context(d, r)
    p_e = ctx.prob(alpha.masks, with_target=False)
    p_te = ctx.prob(alpha.masks, with_target=True)
    return _log2(p_te) - _log2(p_e) - _log2(ctx.p_target())


def i_sx_exclusion_form(d: JointDistribution, r: Realization,
                        alpha: Antichain) -> float:
    """The remove/rescale/compare form over complement-intersection masses.

    Removes the mass excluded by every coalition event, rescales, and
    compares the target mass before and after. Derived check only; equals
    :func:`i_sx` up to the De Morgan identity, which the support-scan
    evaluation preserves exactly.
    """
    _check_alpha(d, alpha)
    ctx = _context(d, r)
    total = d.total_mass()
    p_t = ctx.p_target()
    p_excl = ctx.prob_complement_intersection(alpha.masks, with_target=False)
    p_t_excl = ctx.prob_complement_intersection(alpha.masks, with_target=True)
    return _log2(p_t - p_t_excl) - _log2(total - p_excl) - _log2(p_t)


def _parts_from_masks(ctx: _RealizationContext,
                      masks: Sequence[int]) -> tuple[float, float]:
    plus = -_log2(ctx.prob(masks, with_target=False))
    minus = _log2(ctx.p_target()) - _log2(ctx.prob(masks, with_target=True))
    return plus, minus


def i_sx_parts_from_collections(d: JointDistribution, r: Realization,
                                collections: Sequence[Iterable[int]],
                                ) -> tuple[float, float]:
    """(i+, i-) for a raw, un-normalized list of coalitions.

    The list is used exactly as given (duplicates and supersets allowed),
    which is what the symmetry and monotonicity checks need.
    """
    masks = []
    for coll in collections:
        mask = 0
        for i in coll:
            mask |= 1 << (i - 1)
        masks.append(mask)
    return _parts_from_masks(_context(d, r), masks)


def local_mi(d: JointDistribution, r: Realization,
             coalition: Iterable[int]) -> float:
    """Plain pointwise mutual information of one coalition about the target."""
    mask = 0
    for i in coalition:
        if not 1 <= i <= d.n_sources:
            raise DistributionError(f"source index {i} out of range")
        mask |= 1 << (i - 1)
    if mask == 0:
        raise DistributionError("coalition must be nonempty")
    ctx = _context(d, r)
    p_a = ctx.prob((mask,), with_target=False)
    p_ta = ctx.prob((mask,), with_target=True)
    return _log2(p_ta) - _log2(p_a) - _log2(ctx.p_target())


def self_shared(d: JointDistribution, s: Sequence[int], alpha: Antichain) -> float:
    """Self-shared information of the coalition events at source outcome s.

    Equals -log2 of the union-event probability; nonnegative, and an upper
    bound on i_sx(u : alpha) for every target symbol u. Nonzero even for
    independent sources whenever the union event is not almost sure, which
    is how mechanistic shared information arises.
    """
    _check_alpha(d, alpha)
    if len(s) != d.n_sources:
        raise DistributionError("source outcome has wrong arity")
    events = [CylinderEvent(sources=tuple((i - 1, s[i - 1]) for i in coll))
              for coll in alpha.collections]
    p = d.mass_where(lambda sp: any(ev.matches(sp) for ev in events))
    return -_log2(p)


# ---------------------------------------------------------------------------
# Full decompositions.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointwiseDecomposition:
    """Per-node values at one support realization, in canonical node order.

    ``exact_pi_plus`` etc. hold the rational log-arguments (value =
    log2(fraction)) when the distribution is exact and the lattice small
    enough; otherwise None.
    """

    realization: Realization
    weight: Mass
    n: int
    i_plus: tuple[float, ...]
    i_minus: tuple[float, ...]
    i: tuple[float, ...]
    pi_plus: tuple[float, ...]
    pi_minus: tuple[float, ...]
    pi: tuple[float, ...]
    exact_i_plus: tuple[Fraction, ...] | None = None
    exact_i_minus: tuple[Fraction, ...] | None = None
    exact_pi_plus: tuple[Fraction, ...] | None = None
    exact_pi_minus: tuple[Fraction, ...] | None = None

    @property
    def lattice(self) -> RedundancyLattice:
        return enumerate_lattice(self.n)

    @property
    def nodes(self) -> tuple[Antichain, ...]:
        return self.lattice.nodes

    def node_values(self, alpha: Antichain) -> dict[str, float]:
        j = self.lattice.index(alpha)
        return {"i_plus": self.i_plus[j], "i_minus": self.i_minus[j],
                "i": self.i[j], "pi_plus": self.pi_plus[j],
                "pi_minus": self.pi_minus[j], "pi": self.pi[j]}

    def pi_by_name(self, name: str) -> float:
        return self.pi[self.lattice.index(self.lattice.node_by_name(name))]


@dataclass(frozen=True)
class AverageDecomposition:
    """Support-weighted averages of the pointwise fields, per node."""

    n: int
    I_plus: tuple[float, ...]
    I_minus: tuple[float, ...]
    I: tuple[float, ...]
    Pi_plus: tuple[float, ...]
    Pi_minus: tuple[float, ...]
    Pi: tuple[float, ...]

    @property
    def lattice(self) -> RedundancyLattice:
        return enumerate_lattice(self.n)

    @property
    def nodes(self) -> tuple[Antichain, ...]:
        return self.lattice.nodes

    def node_values(self, alpha: Antichain) -> dict[str, float]:
        j = self.lattice.index(alpha)
        return {"I_plus": self.I_plus[j], "I_minus": self.I_minus[j],
                "I": self.I[j], "Pi_plus": self.Pi_plus[j],
                "Pi_minus": self.Pi_minus[j], "Pi": self.Pi[j]}

    def pi_by_name(self, name: str) -> float:
        return self.Pi[self.lattice.index(self.lattice.node_by_name(name))]


def _exact_invert(lattice: RedundancyLattice,
                  ratios: list[Fraction]) -> list[Fraction]:
    """Multiplicative Moebius recursion on exact log-arguments."""
    out: list[Fraction | None] = [None] * len(ratios)
    for j in lattice.topological_order:
        acc = ratios[j]
        for k in lattice.strict_lower(int(j)):
            acc /= out[k]
        out[j] = acc
    return out  # type: ignore[return-value]


def pointwise_decomposition(d: JointDistribution, r: Realization,
                            lattice: RedundancyLattice | None = None,
                            ) -> PointwiseDecomposition:
    """Evaluate i+/i- at every node and Moebius-invert both lattices."""
    lat = lattice or enumerate_lattice(d.n_sources)
    ctx = _context(d, r)
    p_t = ctx.p_target()
    size = len(lat.nodes)
    ip = np.empty(size)
    im = np.empty(size)
    p_plus: list[Mass] = [0] * size
    p_minus: list[Mass] = [0] * size
    for j, a in enumerate(lat.nodes):
        p_plus[j] = ctx.prob(a.masks, with_target=False)
        p_minus[j] = ctx.prob(a.masks, with_target=True)
        ip[j] = -_log2(p_plus[j])
        im[j] = _log2(p_t) - _log2(p_minus[j])
    pip = invert_array(lat, ip)
    pim = invert_array(lat, im)

    exact = {}
    if d.exact and size <= EXACT_RATIO_NODE_LIMIT:
        ri_plus = [1 / Fraction(p) for p in p_plus]
        ri_minus = [Fraction(p_t) / Fraction(p) for p in p_minus]
        exact = {
            "exact_i_plus": tuple(ri_plus),
            "exact_i_minus": tuple(ri_minus),
            "exact_pi_plus": tuple(_exact_invert(lat, ri_plus)),
            "exact_pi_minus": tuple(_exact_invert(lat, ri_minus)),
        }

    return PointwiseDecomposition(
        realization=r, weight=d.mass(r), n=d.n_sources,
        i_plus=tuple(ip), i_minus=tuple(im), i=tuple(ip - im),
        pi_plus=tuple(pip), pi_minus=tuple(pim), pi=tuple(pip - pim),
        **exact)


def _decompose_chunk(d: JointDistribution,
                     indices: Sequence[int]) -> list[PointwiseDecomposition]:
    lat = enumerate_lattice(d.n_sources)
    return [pointwise_decomposition(d, d.support[i], lat) for i in indices]


def decompose_support(d: JointDistribution,
                      lattice: RedundancyLattice | None = None,
                      workers: int = 1) -> list[PointwiseDecomposition]:
    """Pointwise decomposition at every support point.

    Work items are realizations (node loops are internal); results are
    reassembled in support order, so the output is identical for any
    worker count.
    """
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    lat = lattice or enumerate_lattice(d.n_sources)
    indices = list(range(len(d.support)))
    if workers == 1 or len(indices) <= 1:
        return _decompose_chunk(d, indices)

    from concurrent.futures import ProcessPoolExecutor

    chunks = [indices[k::workers] for k in range(workers)]
    chunks = [c for c in chunks if c]
    out: dict[int, PointwiseDecomposition] = {}
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for chunk, results in zip(chunks, pool.map(_decompose_chunk,
                                                   [d] * len(chunks), chunks)):
            for i, dec in zip(chunk, results):
                out[i] = dec
    return [out[i] for i in indices]


def average_decomposition(d: JointDistribution,
                          lattice: RedundancyLattice | None = None,
                          workers: int = 1,
                          decompositions: Sequence[PointwiseDecomposition] | None = None,
                          ) -> AverageDecomposition:
    """Mass-weighted averages over the support (zero-mass outcomes carry
    no weight and are never evaluated)."""
    decs = decompositions or decompose_support(d, lattice, workers)
    weights = [float(dec.weight) for dec in decs]
    size = len(decs[0].i_plus)

    def avg(attr: str) -> tuple[float, ...]:
        cols = [getattr(dec, attr) for dec in decs]
        return tuple(math.fsum(w * col[j] for w, col in zip(weights, cols))
                     for j in range(size))

    return AverageDecomposition(
        n=d.n_sources,
        I_plus=avg("i_plus"), I_minus=avg("i_minus"), I=avg("i"),
        Pi_plus=avg("pi_plus"), Pi_minus=avg("pi_minus"), Pi=avg("pi"))


def node_event_probabilities(d: JointDistribution, r: Realization,
                             lattice: RedundancyLattice | None = None,
                             ) -> tuple[list[Mass], list[Mass], Mass]:
    """(P(E_node), P(t & E_node)) per node in lattice order, plus P(t)."""
    lat = lattice or enumerate_lattice(d.n_sources)
    ctx = _context(d, r)
    plus = [ctx.prob(a.masks, with_target=False) for a in lat.nodes]
    minus = [ctx.prob(a.masks, with_target=True) for a in lat.nodes]
    return plus, minus, ctx.p_target()


def form_equivalence_max_dev(d: JointDistribution,
                             lattice: RedundancyLattice | None = None) -> float:
    """Largest disagreement between the three arithmetic routes to i_sx.

    Compares the primary difference-of-parts value against the conditional
    (OR-statement) form and against the remove/rescale/compare form that
    works through complement-intersection masses, over every support
    realization and node.
    """
    lat = lattice or enumerate_lattice(d.n_sources)
    worst = 0.0
    total = d.total_mass()
    for r in d.support:
        ctx = _context(d, r)
        p_t = ctx.p_target()
        for a in lat.nodes:
            p_e = ctx.prob(a.masks, with_target=False)
            p_te = ctx.prob(a.masks, with_target=True)
            base = -_log2(p_e) - (_log2(p_t) - _log2(p_te))
            cond = _log2(p_te) - _log2(p_e) - _log2(p_t)
            p_x = ctx.prob_complement_intersection(a.masks, with_target=False)
            p_tx = ctx.prob_complement_intersection(a.masks, with_target=True)
            excl = _log2(p_t - p_tx) - _log2(total - p_x) - _log2(p_t)
            worst = max(worst, abs(base - cond), abs(base - excl))
    return worst


_MEET_PLANS: dict[int, list[tuple[int, int, int, int]]] = {}


def _child_meet_plan(lat: RedundancyLattice) -> list[tuple[int, int, int, int]]:
    """(node, child, meet(B), meet(B + child)) for every child and every
    subset B of the node's remaining children; meet(empty) is the node."""
    if lat.n not in _MEET_PLANS:
        plan = []
        for j in range(len(lat.nodes)):
            kids = lat.children_table[j]
            for gi, g in enumerate(kids):
                others = [c for ci, c in enumerate(kids) if ci != gi]
                for bitset in range(1 << len(others)):
                    members = [others[k] for k in range(len(others))
                               if bitset >> k & 1]
                    if members:
                        mb = members[0]
                        for c in members[1:]:
                            mb = lat.meet_idx(mb, c)
                    else:
                        mb = j
                    plan.append((j, g, mb, lat.meet_idx(mb, g)))
        _MEET_PLANS[lat.n] = plan
    return _MEET_PLANS[lat.n]


def child_meet_mass_identity_max_dev(d: JointDistribution,
                                     lattice: RedundancyLattice | None = None,
                                     ) -> float:
    """Mass differences are preserved along child meets.

    For every node a with child g and subset B of the remaining children,
    P(meet(B) ^ g) = P(meet(B)) + P(g) - P(a) in both the plain and the
    target-intersected measure. Returns the largest absolute violation
    over the support; this is what makes the closed-form atom a telescoping
    product of actual event probabilities.
    """
    lat = lattice or enumerate_lattice(d.n_sources)
    plan = _child_meet_plan(lat)
    worst = 0.0
    for r in d.support:
        plus, minus, _ = node_event_probabilities(d, r, lat)
        for table in (plus, minus):
            for j, g, mb, mbg in plan:
                dev = abs(float(table[mbg] - (table[mb] + table[g] - table[j])))
                worst = max(worst, dev)
    return worst


def atom_via_closed_form(d: JointDistribution, r: Realization, alpha: Antichain,
                         which: str = "plus",
                         lattice: RedundancyLattice | None = None) -> float:
    """One atom through the inclusion-exclusion closed form.

    Independent of the Moebius recursion: only child orderings, meets and
    event probabilities enter. ``which`` selects the informative part
    ("plus") or the misinformative part ("minus"); the latter runs the
    same formula under the target-conditioned measure.
    """
    lat = lattice or enumerate_lattice(d.n_sources)
    ctx = _context(d, r)
    if which == "plus":
        prob = lambda a: ctx.prob(a.masks, with_target=False)
    elif which == "minus":
        p_t = ctx.p_target()
        prob = lambda a: ctx.prob(a.masks, with_target=True) / p_t
    else:
        raise ValueError("which must be 'plus' or 'minus'")
    return closed_form_atom(lat, alpha, prob)


# ---------------------------------------------------------------------------
# Composite targets: chain rule and the entropy decomposition.
# ---------------------------------------------------------------------------

def coarsen_target(d: JointDistribution, group_of: Sequence[int],
                   group_labels: Sequence[str] | None = None) -> JointDistribution:
    """Merge target symbols that share a group id (first chain-rule factor)."""
    groups = sorted(set(group_of))
    if group_labels is None:
        group_labels = [str(g) for g in groups]
    remap = {g: i for i, g in enumerate(groups)}
    acc: dict[Realization, Mass] = {}
    for r, m in zip(d.support, d.masses):
        key = Realization(t=remap[group_of[r.t]], s=r.s)
        acc[key] = acc.get(key, 0) + m
    target = Alphabet(d.target_alphabet.name, tuple(group_labels))
    return JointDistribution.from_points(target, d.source_alphabets, acc.items(),
                                         normalization_tolerance=d.normalization_tolerance)


def condition_on_target_group(d: JointDistribution, group_of: Sequence[int],
                              group) -> JointDistribution:
    """Restrict to target symbols in a group and renormalize."""
    sel = [(r, m) for r, m in zip(d.support, d.masses) if group_of[r.t] == group]
    if not sel:
        raise DistributionError(f"target group {group!r} has zero probability")
    total = sum(m for _, m in sel) if isinstance(sel[0][1], Fraction) \
        else math.fsum(m for _, m in sel)
    points = [(r, m / total) for r, m in sel]
    return JointDistribution.from_points(
        d.target_alphabet, d.source_alphabets, points,
        normalization_tolerance=max(d.normalization_tolerance, 1e-12))


def conditional_i_sx(d: JointDistribution, r: Realization, alpha: Antichain,
                     group_of: Sequence[int]) -> float:
    """Shared information about the fine target given its group: the second
    chain-rule factor, evaluated with every probability conditioned on the
    group event of r's target symbol."""
    _check_alpha(d, alpha)
    cond = condition_on_target_group(d, group_of, group_of[r.t])
    return i_sx(cond, r, alpha)


def target_chain_terms(d: JointDistribution, r: Realization, alpha: Antichain,
                       group_of: Sequence[int]) -> tuple[float, float, float]:
    """(i(t:alpha), i(t1:alpha), i(t2:alpha | t1)) for a factored target.

    The first value must equal the sum of the other two (the target chain
    rule); t1 is the group of r's target symbol under ``group_of``.
    """
    whole = i_sx(d, r, alpha)
    coarse = coarsen_target(d, group_of)
    groups = sorted(set(group_of))
    r1 = Realization(t=groups.index(group_of[r.t]), s=r.s)
    first = i_sx(coarse, r1, alpha)
    second = conditional_i_sx(d, r, alpha, group_of)
    return whole, first, second


def joint_source_distribution(d: JointDistribution) -> JointDistribution:
    """Composite-target distribution: the target is the full source tuple."""
    acc: dict[tuple[int, ...], Mass] = {}
    for r, m in zip(d.support, d.masses):
        acc[r.s] = acc.get(r.s, 0) + m
    combos = sorted(acc)
    labels = tuple(
        ",".join(a.label(si) for a, si in zip(d.source_alphabets, combo))
        for combo in combos)
    target = Alphabet("joint", labels)
    points = [(Realization(t=i, s=combo), acc[combo])
              for i, combo in enumerate(combos)]
    return JointDistribution.from_points(target, d.source_alphabets, points,
                                         normalization_tolerance=d.normalization_tolerance)


def entropy_decomposition(d: JointDistribution,
                          workers: int = 1) -> AverageDecomposition:
    """Entropy atoms: decompose the self-information of the source tuple.

    The average at the full coalition equals the joint source entropy.
    """
    composite = joint_source_distribution(d)
    return average_decomposition(composite, workers=workers)


# ---------------------------------------------------------------------------
# Property-check surface: axioms, lattice monotonicity, duplicates, V-channel.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    realization: Realization | None
    detail: str


@dataclass
class CheckReport:
    checks_run: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, ok: bool, kind: str, realization: Realization | None,
               detail: str) -> None:
        self.checks_run += 1
        if not ok:
            self.violations.append(Violation(kind, realization, detail))


def check_lattice_monotonicity(lattice: RedundancyLattice,
                               values: Mapping[Antichain, float],
                               tol: float = 1e-9) -> list[tuple[str, str, float]]:
    """Cover edges where the value decreases going up; empty if monotone."""
    bad = []
    for child, parent in lattice.cover_edges():
        lo, hi = lattice.nodes[child], lattice.nodes[parent]
        delta = values[hi] - values[lo]
        if delta < -tol:
            bad.append((lo.name, hi.name, float(delta)))
    return bad


def axiom_suite(d: JointDistribution,
                lattice: RedundancyLattice | None = None,
                tol: float = 1e-9) -> CheckReport:
    """Run the axiom battery at every support realization.

    Checks: (a) invariance of i+/i- under permutation of the collection
    list, (b) monotone decrease when a collection is appended, with
    equality when a subset-collection already exists, (c) self-redundancy
    against independently computed marginal surprisals, and (d) monotone
    increase of i+/i- along every lattice cover edge.
    """
    lat = lattice or enumerate_lattice(d.n_sources)
    report = CheckReport()
    n = d.n_sources
    all_colls = [tuple(i + 1 for i in range(n) if m >> i & 1)
                 for m in range(1, 1 << n)]

    # independent surprisal oracle: -log2 of marginal masses
    coll_marginal = {coll: marginal(d, coll) for coll in all_colls}
    coll_t_marginal = {coll: marginal(d, ["t", *coll]) for coll in all_colls}
    t_marginal = marginal(d, ["t"])

    def h_marginal(coll: tuple[int, ...], r: Realization) -> float:
        key = Realization(t=r.s[coll[0] - 1], s=tuple(r.s[i - 1] for i in coll[1:]))
        return -_log2(coll_marginal[coll].mass(key))

    def h_conditional(coll: tuple[int, ...], r: Realization) -> float:
        joint = Realization(t=r.t, s=tuple(r.s[i - 1] for i in coll))
        return (-_log2(coll_t_marginal[coll].mass(joint))
                + _log2(t_marginal.mass(Realization(t=r.t, s=()))))

    for r in d.support:
        ctx = _context(d, r)
        dec = pointwise_decomposition(d, r, lat)
        table = {a: (dec.i_plus[j], dec.i_minus[j])
                 for j, a in enumerate(lat.nodes)}

        # (a) permutation invariance
        for a in lat.nodes:
            if len(a.masks) < 2:
                continue
            for variant in (tuple(reversed(a.masks)), a.masks[1:] + a.masks[:1]):
                got = _parts_from_masks(ctx, variant)
                want = table[a]
                ok = abs(got[0] - want[0]) <= 1e-12 and abs(got[1] - want[1]) <= 1e-12
                report.record(ok, "permutation", r,
                              f"{a.name} reordered: {got} vs {want}")

        # (b) appending a collection never increases i+/i-
        for a in lat.nodes:
            base = table[a]
            for extra_mask in range(1, 1 << n):
                got = _parts_from_masks(ctx, a.masks + (extra_mask,))
                ok = got[0] <= base[0] + 1e-12 and got[1] <= base[1] + 1e-12
                report.record(ok, "monotone-append", r,
                              f"{a.name} + {extra_mask:b}: {got} > {base}")
                if any(m & extra_mask == m for m in a.masks):
                    ok = (abs(got[0] - base[0]) <= 1e-12
                          and abs(got[1] - base[1]) <= 1e-12)
                    report.record(ok, "append-equality", r,
                                  f"{a.name} + superset {extra_mask:b}: "
                                  f"{got} != {base}")

        # (c) self-redundancy against the marginal oracle
        for coll in all_colls:
            a = Antichain.of(n, [coll])
            want_plus = h_marginal(coll, r)
            want_minus = h_conditional(coll, r)
            got_plus, got_minus = table[a]
            ok = abs(got_plus - want_plus) <= tol and abs(got_minus - want_minus) <= tol
            report.record(ok, "self-redundancy", r,
                          f"{a.name}: ({got_plus}, {got_minus}) vs "
                          f"({want_plus}, {want_minus})")
        full = Antichain.of(n, [range(1, n + 1)])
        mi = local_mi(d, r, range(1, n + 1))
        got = table[full][0] - table[full][1]
        report.record(abs(got - mi) <= tol, "full-coalition-mi", r,
                      f"{got} vs local mi {mi}")

        # (d) monotone increase along cover edges
        for which, col in (("plus", 0), ("minus", 1)):
            bad = check_lattice_monotonicity(
                lat, {a: table[a][col] for a in lat.nodes}, tol)
            report.record(not bad, f"lattice-monotone-{which}", r, str(bad))

    return report


def duplicate_invariance_check(d: JointDistribution,
                               pair: tuple[int, int],
                               expected_pi: Mapping[str, float] | None = None,
                               tol: float = 1e-3) -> CheckReport:
    """Check that a duplicated source changes no information content.

    ``pair`` names the two identical sources (1-based). For every support
    realization and every node, replacing one twin by the other in the
    node's coalitions must leave i_sx unchanged. When ``expected_pi`` maps
    node names to values, the pointwise atoms are additionally checked
    against them at every realization (tolerance ``tol``).
    """
    i, j = pair
    report = CheckReport()
    for r in d.support:
        if r.s[i - 1] != r.s[j - 1]:
            report.record(False, "duplicate-pair", r,
                          f"sources {i} and {j} differ on support")
            return report
    lat = enumerate_lattice(d.n_sources)
    for r in d.support:
        dec = pointwise_decomposition(d, r, lat)
        for k, a in enumerate(lat.nodes):
            swapped = [[i if x == j else x for x in coll] for coll in a.collections]
            got = i_sx_parts_from_collections(d, r, swapped)
            want = (dec.i_plus[k], dec.i_minus[k])
            ok = abs(got[0] - want[0]) <= 1e-9 and abs(got[1] - want[1]) <= 1e-9
            report.record(ok, "twin-swap", r, f"{a.name}: {got} vs {want}")
        if expected_pi is not None:
            for name, want_pi in expected_pi.items():
                got_pi = dec.pi_by_name(name)
                report.record(abs(got_pi - want_pi) <= tol, "expected-atom", r,
                              f"pi({name}) = {got_pi}, expected {want_pi}")
    return report


# ---------------------------------------------------------------------------
# The statement channel for XOR: why a negative average is operationally
# meaningful. Fixed construction; see v_channel_xor.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelRow:
    realization: Realization
    statement: tuple[int, int]  # claimed symbols (a, b) in (S1=a) v (S2=b)
    carries_shared: bool        # both claims true for this realization
    predicted_t: int
    correct: bool
    info_bits: float


@dataclass(frozen=True)
class VChannelReport:
    rows: tuple[ChannelRow, ...]
    avg_info_all: float      # over every statement the channel can emit
    avg_info_shared: float   # over the shared-information rows only

    @property
    def n_correct(self) -> int:
        return sum(row.correct for row in self.rows)

    @property
    def n_incorrect(self) -> int:
        return len(self.rows) - self.n_correct


def v_channel_xor() -> VChannelReport:
    """Reproduce the XOR statement-channel table.

    For each XOR realization the channel emits one of three equiprobable
    true OR-statements (S1=a) v (S2=b); exactly one of them has both
    claims true and therefore carries the shared information. A receiver
    performing Bayes-optimal inference from the statement mispredicts on
    exactly the shared rows, so the channel as a whole is informative on
    average while the shared contribution is negative.
    """
    from .builtins import xor_distribution

    d = xor_distribution()
    rows = []
    weighted_all = []
    weighted_shared = []
    for r, m in zip(d.support, d.masses):
        s1, s2 = r.s
        statements = [(s1, s2), (s1, 1 - s2), (1 - s1, s2)]
        for idx, (a, b) in enumerate(statements):
            pred_match = lambda sp, a=a, b=b: sp.s[0] == a or sp.s[1] == b
            p_v = d.mass_where(pred_match)
            post = {t: d.mass_where(lambda sp: pred_match(sp) and sp.t == t) / p_v
                    for t in range(len(d.target_alphabet))}
            predicted = max(post, key=lambda t: (post[t], -t))
            p_t = d.mass_where(lambda sp: sp.t == r.t)
            info = _log2(post[r.t]) - _log2(p_t)
            row = ChannelRow(realization=r, statement=(a, b),
                             carries_shared=(idx == 0), predicted_t=predicted,
                             correct=(predicted == r.t), info_bits=info)
            rows.append(row)
            weighted_all.append(float(m) / len(statements) * info)
            if row.carries_shared:
                weighted_shared.append(float(m) * info)
    return VChannelReport(rows=tuple(rows),
                          avg_info_all=math.fsum(weighted_all),
                          avg_info_shared=math.fsum(weighted_shared))
