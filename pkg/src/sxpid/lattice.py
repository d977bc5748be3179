"""Redundancy lattice of antichains over source coalitions.

Nodes are antichains of nonempty subsets of {1..n} (no subset contains
another). The lattice over n sources has d(n)-2 nodes where d is the
Dedekind number: 1, 4, 18, 166, 7579 for n = 1..5. Enumeration beyond
``MAX_SOURCES`` = 5 is not supported; the node count grows super
exponentially and this implementation targets exhaustive evaluation.

Coalitions are stored as bit masks (bit i-1 set <=> source i in the
coalition), antichains as tuples of masks sorted by (size, index list),
so equality and hashing are structural and cheap. Each antichain also has
an "up-closure" bitset over all 2^n - 1 coalition masks; the partial order
is plain bitset inclusion on these closures, which keeps the O(N^2) order
computation fast enough even for n = 5.

Order and children are computed lazily: enumerating nodes (e.g. to count
them) never pays for the order matrix.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .dist import Mass

MAX_SOURCES = 5

#: d(n) - 2 for n = 1..5, used as an enumeration self-check.
NODE_COUNTS = {1: 1, 2: 4, 3: 18, 4: 166, 5: 7579}


class LatticeError(ValueError):
    """Invalid antichain input or unsupported source count."""


class BoundaryError(ValueError):
    """A required event probability is zero (boundary of the simplex)."""


def _mask_indices(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def _collection_key(mask: int) -> tuple[int, tuple[int, ...]]:
    return (bin(mask).count("1"), _mask_indices(mask))


@dataclass(frozen=True)
class Antichain:
    """Canonical set of pairwise-incomparable coalitions of {1..n}."""

    n: int
    masks: tuple[int, ...]

    def __post_init__(self):
        if not self.masks:
            raise LatticeError("antichain must be nonempty")
        full = (1 << self.n) - 1
        for m in self.masks:
            if m == 0:
                raise LatticeError("empty coalition not allowed")
            if m & ~full:
                raise LatticeError(f"coalition outside 1..{self.n}")
        for a in self.masks:
            for b in self.masks:
                if a != b and a & b == a:
                    raise LatticeError(
                        f"{_mask_indices(a)} is a subset of {_mask_indices(b)}; "
                        "normalize_antichain removes supersets")
        canonical = tuple(sorted(set(self.masks), key=_collection_key))
        object.__setattr__(self, "masks", canonical)

    @classmethod
    def of(cls, n: int, collections: Iterable[Iterable[int]]) -> "Antichain":
        """Build from 1-based index collections, e.g. of(3, [[1], [2, 3]])."""
        masks = []
        for coll in collections:
            mask = 0
            for i in coll:
                if not 1 <= i <= n:
                    raise LatticeError(f"source index {i} outside 1..{n}")
                mask |= 1 << (i - 1)
            masks.append(mask)
        return cls(n, tuple(masks))

    @cached_property
    def collections(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_mask_indices(m) for m in self.masks)

    @cached_property
    def name(self) -> str:
        return "".join("{" + ",".join(map(str, c)) + "}" for c in self.collections)

    def sort_key(self):
        return tuple(_collection_key(m) for m in self.masks)

    def __repr__(self) -> str:
        return f"Antichain({self.n}, {self.name})"


_NODE_TOKEN = re.compile(r"\{([^{}]*)\}")


def parse_node_name(n: int, text: str) -> Antichain:
    """Parse ``{1,2}{3}`` style names; whitespace-tolerant, canonicalizing."""
    compact = text.strip()
    if not compact or compact.replace(" ", "") != "".join(
            m.group(0) for m in _NODE_TOKEN.finditer(compact)).replace(" ", ""):
        raise LatticeError(f"cannot parse node name {text!r}")
    collections = []
    for m in _NODE_TOKEN.finditer(compact):
        body = m.group(1).strip()
        if not body:
            raise LatticeError(f"empty coalition in node name {text!r}")
        try:
            collections.append([int(tok) for tok in body.split(",")])
        except ValueError:
            raise LatticeError(f"bad coalition {body!r} in node name {text!r}") from None
    return Antichain.of(n, collections)


def normalize_antichain(n: int, collections: Iterable[Iterable[int]]) -> Antichain:
    """Remove every collection that strictly contains another, canonicalize.

    This is the reduction that makes redundancy queries over arbitrary
    collection sets equivalent to antichain queries: a superset never
    changes the union of coalition events.
    """
    masks = []
    for coll in collections:
        mask = 0
        for i in coll:
            if not 1 <= i <= n:
                raise LatticeError(f"source index {i} outside 1..{n}")
            mask |= 1 << (i - 1)
        if mask == 0:
            raise LatticeError("empty coalition not allowed")
        masks.append(mask)
    if not masks:
        raise LatticeError("need at least one collection")
    kept = [a for a in masks
            if not any(b != a and a & b == b for b in masks)]
    return Antichain(n, tuple(set(kept)))


def leq(a: Antichain, b: Antichain) -> bool:
    """Partial order: a <= b iff every coalition of b contains one of a."""
    if a.n != b.n:
        raise LatticeError("antichains over different source counts")
    return all(any(am & bm == am for am in a.masks) for bm in b.masks)


def meet(a: Antichain, b: Antichain) -> Antichain:
    """Greatest lower bound: the normalized union of the two antichains."""
    if a.n != b.n:
        raise LatticeError("antichains over different source counts")
    masks = a.masks + b.masks
    kept = [m for m in masks if not any(x != m and m & x == x for x in masks)]
    return Antichain(a.n, tuple(set(kept)))


def _upclosure(n: int, masks: Sequence[int]) -> int:
    """Bitset over coalition masks 1..2^n-1: which coalitions include a member."""
    bits = 0
    for m in range(1, 1 << n):
        if any(m & a == a for a in masks):
            bits |= 1 << m
    return bits


class RedundancyLattice:
    """All antichains of {1..n} with order, children and meets.

    The instance is immutable from the caller's perspective; internal
    caches (order matrix, children, meet tables) are filled lazily and
    are safe to share across threads once built.
    """

    def __init__(self, n: int):
        if not 1 <= n <= MAX_SOURCES:
            raise LatticeError(f"n must be in 1..{MAX_SOURCES}, got {n}")
        self.n = n
        self.nodes: tuple[Antichain, ...] = tuple(
            sorted(self._enumerate(n), key=Antichain.sort_key))
        if len(self.nodes) != NODE_COUNTS[n]:
            raise AssertionError(
                f"enumerated {len(self.nodes)} antichains for n={n}, "
                f"expected {NODE_COUNTS[n]}")
        self._index = {a: i for i, a in enumerate(self.nodes)}
        self._name_index = {a.name: i for i, a in enumerate(self.nodes)}
        self.bottom = Antichain.of(n, [[i] for i in range(1, n + 1)])
        self.top = Antichain.of(n, [range(1, n + 1)])
        self._leq: np.ndarray | None = None
        self._children: list[tuple[int, ...]] | None = None
        self._strict_lower: dict[int, np.ndarray] = {}
        self._meet_cache: dict[tuple[int, int], int] = {}
        self._topo: np.ndarray | None = None

    @staticmethod
    def _enumerate(n: int) -> list[Antichain]:
        """DFS over coalition masks; each antichain is emitted exactly once
        as an increasing mask sequence."""
        all_masks = list(range(1, 1 << n))
        out: list[Antichain] = []

        def extend(chosen: list[int], start: int):
            if chosen:
                out.append(Antichain(n, tuple(chosen)))
            for m in all_masks[start:]:
                if all(m & c != c and m & c != m for c in chosen):
                    chosen.append(m)
                    extend(chosen, m)  # masks are scanned in increasing order
                    chosen.pop()

        extend([], 0)
        return out

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, a: Antichain) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise LatticeError(f"{a!r} is not a node of this lattice") from None

    def node_by_name(self, name: str) -> Antichain:
        a = parse_node_name(self.n, name)
        if a not in self._index:
            raise LatticeError(f"{name!r} is not a lattice node")
        return a

    # -- order ------------------------------------------------------------

    @property
    def leq_matrix(self) -> np.ndarray:
        """Boolean matrix L with L[i, j] = (nodes[i] <= nodes[j])."""
        if self._leq is None:
            up = [_upclosure(self.n, a.masks) for a in self.nodes]
            size = len(self.nodes)
            words = np.array([[(u >> (32 * w)) & 0xFFFFFFFF
                               for w in range((1 << self.n) // 32 + 1)]
                              for u in up], dtype=np.uint64)
            L = np.ones((size, size), dtype=bool)
            # i <= j iff upclosure(j) is a subset of upclosure(i), wordwise.
            for w in range(words.shape[1]):
                col = words[:, w]
                L &= (col[None, :] & ~col[:, None]) == 0
            self._leq = L
        return self._leq

    def leq_idx(self, i: int, j: int) -> bool:
        return bool(self.leq_matrix[i, j])

    def strict_lower(self, j: int) -> np.ndarray:
        """Indices of nodes strictly below node j."""
        if j not in self._strict_lower:
            below = np.flatnonzero(self.leq_matrix[:, j])
            self._strict_lower[j] = below[below != j].astype(np.int32)
        return self._strict_lower[j]

    @property
    def topological_order(self) -> np.ndarray:
        """Node indices sorted bottom-up (downsets before their nodes)."""
        if self._topo is None:
            counts = self.leq_matrix.sum(axis=0)  # |downset| including self
            self._topo = np.argsort(counts, kind="stable")
        return self._topo

    # -- children ----------------------------------------------------------

    @property
    def children_table(self) -> list[tuple[int, ...]]:
        """children[j] = indices of maximal strict lower bounds of node j.

        Computed from the full order relation by maximality filtering:
        i is a child of j iff i < j and no k with i < k < j exists.
        """
        if self._children is None:
            L = self.leq_matrix
            table = []
            for j in range(len(self.nodes)):
                low = self.strict_lower(j)
                if low.size == 0:
                    table.append(())
                    continue
                sub = L[np.ix_(low, low)]
                maximal = sub.sum(axis=1) == 1  # only comparable to itself
                table.append(tuple(int(i) for i in low[maximal]))
            self._children = table
        return self._children

    def children(self, a: Antichain) -> tuple[Antichain, ...]:
        return tuple(self.nodes[i] for i in self.children_table[self.index(a)])

    def cover_edges(self) -> list[tuple[int, int]]:
        """(child, parent) index pairs; the Hasse diagram of the order."""
        return [(c, j) for j, kids in enumerate(self.children_table) for c in kids]

    def meet_idx(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        if key not in self._meet_cache:
            self._meet_cache[key] = self.index(meet(self.nodes[i], self.nodes[j]))
        return self._meet_cache[key]


_LATTICES: dict[int, RedundancyLattice] = {}


def enumerate_lattice(n: int) -> RedundancyLattice:
    """Build (or fetch the cached) redundancy lattice over n sources."""
    if n not in _LATTICES:
        _LATTICES[n] = RedundancyLattice(n)
    return _LATTICES[n]


# ---------------------------------------------------------------------------
# Moebius inversion and the inclusion-exclusion closed form.
# ---------------------------------------------------------------------------

def invert_array(lattice: RedundancyLattice, v: np.ndarray) -> np.ndarray:
    """Moebius recursion on a vector indexed like ``lattice.nodes``."""
    pi = np.empty(len(v), dtype=float)
    for j in lattice.topological_order:
        below = lattice.strict_lower(int(j))
        pi[j] = v[j] - (pi[below].sum() if below.size else 0.0)
    return pi


def moebius_invert(lattice: RedundancyLattice,
                   values: Mapping[Antichain, float],
                   verify_tol: float | None = 1e-9) -> dict[Antichain, float]:
    """Invert cumulative node values into per-node increments.

    Returns pi with sum(pi[b] for b <= a) == values[a] for every node a,
    computed bottom-up by pi[a] = values[a] - sum(pi[b] for b < a). When
    ``verify_tol`` is set, the downset re-summation is checked against the
    inputs and a ValueError names the first violating node.
    """
    missing = [a for a in lattice.nodes if a not in values]
    if missing:
        raise LatticeError(f"values missing for node {missing[0].name}")
    v = np.array([float(values[a]) for a in lattice.nodes])
    pi = invert_array(lattice, v)
    if verify_tol is not None:
        for j in range(len(v)):
            below = lattice.strict_lower(j)
            resum = pi[j] + (pi[below].sum() if below.size else 0.0)
            if abs(resum - v[j]) > verify_tol:
                raise ValueError(
                    f"moebius inversion failed re-summation at node "
                    f"{lattice.nodes[j].name}: {resum} != {v[j]}")
    return {a: float(pi[i]) for i, a in enumerate(lattice.nodes)}


def _log2(x: Mass) -> float:
    if isinstance(x, Fraction):
        return math.log2(x.numerator) - math.log2(x.denominator)
    return math.log2(x)


def closed_form_atom(lattice: RedundancyLattice, alpha: Antichain,
                     event_prob: Callable[[Antichain], Mass]) -> float:
    """Evaluate one atom directly from event probabilities of child meets.

    With children g_1..g_k of ``alpha`` ordered by increasing event
    probability and d_1 = P(g_1) - P(alpha), the atom is

        sum over B subset of {g_2..g_k} of (-1)^|B| * log2((P(^B) + d_1) / P(^B))

    where the meet over the empty subset is ``alpha`` itself. Probability
    mass differences are preserved along child meets, so every numerator
    P(^B) + d_1 equals the probability of an actual lattice event and the
    result matches the Moebius recursion. Ties among child probabilities
    are broken by canonical node order; the value is tie-invariant.

    ``event_prob`` must be positive on alpha and on all child meets;
    a zero raises BoundaryError.
    """
    j = lattice.index(alpha)
    p_alpha = event_prob(alpha)
    if p_alpha <= 0:
        raise BoundaryError(f"event probability of {alpha.name} is not positive")
    kids = lattice.children_table[j]
    if not kids:
        return -_log2(p_alpha)

    probs = []
    for c in kids:
        p = event_prob(lattice.nodes[c])
        if p <= 0:
            raise BoundaryError(f"event probability of {lattice.nodes[c].name} "
                                "is not positive")
        probs.append((p, lattice.nodes[c].sort_key(), c))
    probs.sort()
    d1 = probs[0][0] - p_alpha
    others = [c for _, _, c in probs[1:]]

    total = 0.0
    for bits in range(1 << len(others)):
        members = [others[i] for i in range(len(others)) if bits >> i & 1]
        if members:
            m = members[0]
            for c in members[1:]:
                m = lattice.meet_idx(m, c)
            p = event_prob(lattice.nodes[m])
            if p <= 0:
                raise BoundaryError(f"event probability of {lattice.nodes[m].name} "
                                    "is not positive")
        else:
            p = p_alpha
        sign = -1.0 if bin(bits).count("1") % 2 else 1.0
        total += sign * (_log2(p + d1) - _log2(p))
    return total
