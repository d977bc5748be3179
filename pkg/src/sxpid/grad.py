"""Analytic derivatives of the shared-information quantities on the simplex.

The joint pmf is treated as a raw coordinate vector over the full outcome
grid (target axis first). All quantities here are smooth functions of
event mass sums, so their partials are sums of indicator/mass-ratio terms;
normalization is *not* enforced during differentiation, which keeps the
central-difference oracle unambiguous: perturb one raw coordinate, do not
renormalize. The simplex-tangent projection appears only in the optimizer.

Derivatives per coordinate k (natural log divided out as 1/ln 2):

    d i+ / dp_k = -[k in E] / (P(E) ln2)
    d i- / dp_k =  [k in T] / (P(T) ln2) - [k in T&E] / (P(T&E) ln2)

Atom gradients come either from the Moebius recursion (a signed sum of
the above over the downset) or from the inclusion-exclusion closed form,
whose terms are logs of event masses as well. The two paths agree
wherever the closed form's child ordering is stable; at ties the
recursion value is used and a warning is emitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .dist import JointDistribution, Realization
from .lattice import (Antichain, BoundaryError, RedundancyLattice,
                      enumerate_lattice, invert_array)

_LN2 = math.log(2.0)

DEFAULT_FD_STEP = 1e-6
DEFAULT_INTERIOR_MARGIN = 1e-9
DEFAULT_LEARNING_RATE = 0.05
GRAD_NORM_STOP = 1e-8
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SimplexPoint:
    """Strictly positive pmf over the full outcome grid (target axis first)."""

    shape: tuple[int, ...]
    p: np.ndarray
    epsilon: float = DEFAULT_INTERIOR_MARGIN

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float).reshape(-1).copy()
        if arr.size != int(np.prod(self.shape)):
            raise ValueError("pmf length does not match the outcome grid")
        if arr.min() < self.epsilon:
            raise BoundaryError(
                f"not an interior point: min mass {arr.min()} < {self.epsilon}")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {arr.sum()!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "p", arr)

    @property
    def n_sources(self) -> int:
        return len(self.shape) - 1


def grid_shape(d: JointDistribution) -> tuple[int, ...]:
    return (len(d.target_alphabet),) + tuple(len(a) for a in d.source_alphabets)


def grid_from_distribution(d: JointDistribution) -> np.ndarray:
    """Flat raw-mass vector over the full grid; zeros where unsupported."""
    shape = grid_shape(d)
    p = np.zeros(int(np.prod(shape)))
    for r, m in zip(d.support, d.masses):
        p[int(np.ravel_multi_index((r.t, *r.s), shape))] = float(m)
    return p


def simplex_point_from_distribution(d: JointDistribution,
                                    epsilon: float = DEFAULT_INTERIOR_MARGIN,
                                    ) -> SimplexPoint:
    return SimplexPoint(grid_shape(d), grid_from_distribution(d), epsilon)


def interior_mix(d: JointDistribution, lam: float,
                 epsilon: float = DEFAULT_INTERIOR_MARGIN) -> SimplexPoint:
    """Mix with the uniform grid distribution to move off the boundary."""
    shape = grid_shape(d)
    p = grid_from_distribution(d)
    return SimplexPoint(shape, (1 - lam) * p + lam / p.size, epsilon)


def random_interior(shape: Sequence[int], rng: np.random.Generator,
                    low: float = 0.2) -> SimplexPoint:
    """Random point bounded away from the boundary (masses >= low/size)."""
    raw = rng.uniform(low, 1.0, size=int(np.prod(tuple(shape))))
    return SimplexPoint(tuple(shape), raw / raw.sum())


class _EventCells:
    """Flat grid-cell index sets for every lattice node at one realization."""

    def __init__(self, shape: tuple[int, ...], r: Realization,
                 lattice: RedundancyLattice):
        self.shape = shape
        self.lattice = lattice
        cells = [Realization(t=idx[0], s=tuple(idx[1:]))
                 for idx in np.ndindex(*shape)]
        self.t_idx = np.array([k for k, c in enumerate(cells) if c.t == r.t],
                              dtype=np.intp)
        plus, minus = [], []
        for node in lattice.nodes:
            hit = [k for k, c in enumerate(cells)
                   if any(all(c.s[i - 1] == r.s[i - 1] for i in coll)
                          for coll in node.collections)]
            plus.append(np.array(hit, dtype=np.intp))
            minus.append(np.array([k for k in hit if cells[k].t == r.t],
                                  dtype=np.intp))
        self.plus_idx = plus
        self.minus_idx = minus

    def idx(self, j: int, which: str) -> np.ndarray:
        return self.plus_idx[j] if which == "plus" else self.minus_idx[j]


@lru_cache(maxsize=4096)
def _event_cells(shape: tuple[int, ...], r: Realization, n: int) -> _EventCells:
    return _EventCells(shape, r, enumerate_lattice(n))


def _cells_for(point_shape: tuple[int, ...], r: Realization) -> _EventCells:
    return _event_cells(point_shape, r, len(point_shape) - 1)


# ---------------------------------------------------------------------------
# Values and gradients on raw coordinate vectors.
# ---------------------------------------------------------------------------

def _i_value(p: np.ndarray, ec: _EventCells, j: int, which: str) -> float:
    if which == "plus":
        return -math.log2(p[ec.plus_idx[j]].sum())
    return math.log2(p[ec.t_idx].sum()) - math.log2(p[ec.minus_idx[j]].sum())


def _i_vector(p: np.ndarray, ec: _EventCells, which: str) -> np.ndarray:
    return np.array([_i_value(p, ec, j, which)
                     for j in range(len(ec.lattice.nodes))])


def _pi_vector(p: np.ndarray, ec: _EventCells, which: str) -> np.ndarray:
    if which == "net":
        return (_pi_vector(p, ec, "plus") - _pi_vector(p, ec, "minus"))
    return invert_array(ec.lattice, _i_vector(p, ec, which))


def _grad_i(p: np.ndarray, ec: _EventCells, j: int, which: str) -> np.ndarray:
    g = np.zeros_like(p)
    if which in ("plus", "net"):
        idx = ec.plus_idx[j]
        g[idx] -= 1.0 / (p[idx].sum() * _LN2)
    if which in ("minus", "net"):
        sign = -1.0 if which == "net" else 1.0
        g[ec.t_idx] += sign / (p[ec.t_idx].sum() * _LN2)
        idx = ec.minus_idx[j]
        g[idx] -= sign / (p[idx].sum() * _LN2)
    return g


def _grad_pi_all(p: np.ndarray, ec: _EventCells, which: str) -> np.ndarray:
    """Recursion-path gradients for every node, rows in node order."""
    if which == "net":
        return _grad_pi_all(p, ec, "plus") - _grad_pi_all(p, ec, "minus")
    lat = ec.lattice
    G = np.zeros((len(lat.nodes), p.size))
    for j in lat.topological_order:
        row = _grad_i(p, ec, int(j), which)
        below = lat.strict_lower(int(j))
        if below.size:
            row = row - G[below].sum(axis=0)
        G[j] = row
    return G


def _grad_pi_closed(p: np.ndarray, ec: _EventCells, j: int,
                    which: str) -> np.ndarray:
    """Closed-form-path gradient for one node (plus or minus only).

    Raises BoundaryError-adjacent ties to the caller via ValueError so it
    can fall back to the recursion path.
    """
    lat = ec.lattice
    kids = lat.children_table[j]
    if not kids:
        return _grad_i(p, ec, j, which)
    probs = [(p[ec.idx(c, which)].sum(), lat.nodes[c].sort_key(), c) for c in kids]
    vals = sorted(v for v, _, _ in probs)
    if any(b - a <= TIE_TOLERANCE for a, b in zip(vals, vals[1:])):
        raise ValueError("tied child event probabilities")
    probs.sort()
    gamma1 = probs[0][2]
    others = [c for _, _, c in probs[1:]]

    p_alpha = p[ec.idx(j, which)].sum()
    ind_alpha = np.zeros_like(p)
    ind_alpha[ec.idx(j, which)] = 1.0
    ind_g1 = np.zeros_like(p)
    ind_g1[ec.idx(gamma1, which)] = 1.0
    d1 = probs[0][0] - p_alpha

    g = np.zeros_like(p)
    for bits in range(1 << len(others)):
        members = [others[i] for i in range(len(others)) if bits >> i & 1]
        if members:
            m = members[0]
            for c in members[1:]:
                m = lat.meet_idx(m, c)
            idx = ec.idx(m, which)
        else:
            idx = ec.idx(j, which)
        ind_b = np.zeros_like(p)
        ind_b[idx] = 1.0
        pb = p[idx].sum()
        sign = -1.0 if bin(bits).count("1") % 2 else 1.0
        g += sign * ((ind_b + ind_g1 - ind_alpha) / (pb + d1) - ind_b / pb) / _LN2
    return g


@dataclass(frozen=True)
class GradientRecord:
    """Partials of one quantity w.r.t. every raw grid coordinate."""

    quantity: str                 # e.g. "i_plus", "pi_net", "avg_pi_plus"
    node: Antichain
    realization: Realization | None
    shape: tuple[int, ...]
    partials: np.ndarray

    def by_cell(self) -> dict[tuple[int, ...], float]:
        return {tuple(idx): float(v)
                for idx, v in zip(np.ndindex(*self.shape), self.partials)}


def _check_point(point: SimplexPoint, alpha: Antichain) -> None:
    if alpha.n != point.n_sources:
        raise ValueError(f"antichain over {alpha.n} sources, grid has "
                         f"{point.n_sources}")


def grad_i_sx_parts(point: SimplexPoint, r: Realization, alpha: Antichain,
                    which: str = "net") -> GradientRecord:
    """Analytic gradient of i+ / i- / i at one realization and node."""
    _check_point(point, alpha)
    ec = _cells_for(point.shape, r)
    j = ec.lattice.index(alpha)
    g = _grad_i(point.p, ec, j, which)
    return GradientRecord(f"i_{which}", alpha, r, point.shape, g)


def grad_atom(point: SimplexPoint, r: Realization, alpha: Antichain,
              which: str = "net", path: str = "auto") -> GradientRecord:
    """Analytic gradient of an atom.

    ``path`` is "closed" (inclusion-exclusion chain rule), "recursion"
    (signed sum of i-part gradients over the downset), or "auto": the
    closed form with a recursion fallback when child event probabilities
    tie, in which case a warning is emitted — the ordering in the closed
    form is not differentiable across a tie, the measure itself is.
    """
    _check_point(point, alpha)
    ec = _cells_for(point.shape, r)
    j = ec.lattice.index(alpha)
    if path == "recursion":
        g = _grad_pi_all(point.p, ec, which)[j]
        return GradientRecord(f"pi_{which}", alpha, r, point.shape, g)
    try:
        if which == "net":
            g = _grad_pi_closed(point.p, ec, j, "plus") \
                - _grad_pi_closed(point.p, ec, j, "minus")
        else:
            g = _grad_pi_closed(point.p, ec, j, which)
    except ValueError:
        if path == "closed":
            raise
        warnings.warn(f"tied child event probabilities at {alpha.name}; "
                      "using the recursion-path gradient", RuntimeWarning,
                      stacklevel=2)
        g = _grad_pi_all(point.p, ec, which)[j]
    return GradientRecord(f"pi_{which}", alpha, r, point.shape, g)


def _support_realizations(shape: tuple[int, ...],
                          mask: np.ndarray | None) -> list[tuple[int, Realization]]:
    out = []
    for k, idx in enumerate(np.ndindex(*shape)):
        if mask is None or mask[k]:
            out.append((k, Realization(t=idx[0], s=tuple(idx[1:]))))
    return out


def average_atom_value(p: np.ndarray, shape: tuple[int, ...], alpha: Antichain,
                       which: str = "net",
                       support: np.ndarray | None = None) -> float:
    """Mass-weighted atom average over the grid (or a support mask)."""
    lat = enumerate_lattice(len(shape) - 1)
    j = lat.index(alpha)
    total = 0.0
    for k, r in _support_realizations(shape, support):
        ec = _cells_for(shape, r)
        total += p[k] * _pi_vector(p, ec, which)[j]
    return total


def grad_average(point: SimplexPoint, alpha: Antichain,
                 which: str = "net") -> GradientRecord:
    """Gradient of the averaged atom: weight term plus measure term."""
    _check_point(point, alpha)
    g = _grad_average_raw(point.p, point.shape, alpha, which, None)
    return GradientRecord(f"avg_pi_{which}", alpha, None, point.shape, g)


def _grad_average_raw(p: np.ndarray, shape: tuple[int, ...], alpha: Antichain,
                      which: str, support: np.ndarray | None) -> np.ndarray:
    lat = enumerate_lattice(len(shape) - 1)
    j = lat.index(alpha)
    g = np.zeros_like(p)
    for k, r in _support_realizations(shape, support):
        ec = _cells_for(shape, r)
        g[k] += _pi_vector(p, ec, which)[j]          # d weight / dp_k
        g += p[k] * _grad_pi_all(p, ec, which)[j]    # weight * d atom / dp
    return g


# ---------------------------------------------------------------------------
# Finite differences.
# ---------------------------------------------------------------------------

def central_difference(f: Callable[[np.ndarray], float], p: np.ndarray,
                       step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central differences on raw coordinates, no renormalization."""
    g = np.zeros_like(p)
    for k in range(p.size):
        up = p.copy()
        up[k] += step
        down = p.copy()
        down[k] -= step
        g[k] = (f(up) - f(down)) / (2 * step)
    return g


def fd_mismatch(analytic: np.ndarray, fd: np.ndarray,
                rel_tol: float = 1e-5, abs_tol: float = 1e-7,
                small: float = 1e-2) -> float:
    """Worst tolerance-normalized deviation (<= 1 means within tolerance).

    Partials below ``small`` in magnitude are held to the absolute
    tolerance, everything else to the relative one.
    """
    worst = 0.0
    for a, b in zip(analytic, fd):
        err = abs(a - b)
        bound = abs_tol if abs(a) < small else rel_tol * abs(a)
        worst = max(worst, err / bound)
    return worst


def pointwise_value(p: np.ndarray, shape: tuple[int, ...], r: Realization,
                    alpha: Antichain, quantity: str, which: str) -> float:
    """Raw-vector evaluator matching the gradient conventions.

    ``p`` need not be normalized; finite-difference oracles call this on
    singly-perturbed coordinate vectors.
    """
    ec = _cells_for(shape, r)
    j = ec.lattice.index(alpha)
    if quantity == "i":
        if which == "net":
            return _i_value(p, ec, j, "plus") - _i_value(p, ec, j, "minus")
        return _i_value(p, ec, j, which)
    if quantity == "pi":
        return float(_pi_vector(p, ec, which)[j])
    raise ValueError("quantity must be 'i' or 'pi'")


# ---------------------------------------------------------------------------
# Projected gradient optimization on the simplex interior.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryStep:
    step: int
    point: np.ndarray
    objective: float
    grad_norm: float


def _project_step(x: np.ndarray, g: np.ndarray, lr: float,
                  epsilon: float) -> np.ndarray:
    x = x + lr * (g - g.mean())
    # clip to the interior margin; renormalize over the unclipped block so
    # clipped coordinates stay exactly at epsilon and the total is exactly 1
    floored = x < epsilon
    for _ in range(x.size):
        x = np.where(floored, epsilon, x)
        free = ~floored
        budget = 1.0 - floored.sum() * epsilon
        x[free] *= budget / x[free].sum()
        newly = free & (x < epsilon)
        if not newly.any():
            break
        floored |= newly
    return x


def optimize_atom(start: SimplexPoint, alpha: Antichain, which: str = "net",
                  maximize: bool = True, steps: int = 100,
                  learning_rate: float = DEFAULT_LEARNING_RATE,
                  grad_tol: float = GRAD_NORM_STOP) -> list[TrajectoryStep]:
    """Projected gradient ascent/descent of an averaged atom.

    Each iteration projects the raw gradient onto the sum-zero tangent,
    steps, clips to the interior margin and renormalizes. The trajectory
    (including the start) is returned; iteration stops after ``steps`` or
    once the projected-gradient norm drops below ``grad_tol``.
    """
    _check_point(start, alpha)
    sign = 1.0 if maximize else -1.0
    x = start.p.copy()
    traj = []
    for it in range(steps + 1):
        obj = average_atom_value(x, start.shape, alpha, which)
        g = sign * _grad_average_raw(x, start.shape, alpha, which, None)
        g_proj = g - g.mean()
        norm = float(np.linalg.norm(g_proj))
        traj.append(TrajectoryStep(it, x.copy(), obj, norm))
        if it == steps or norm < grad_tol:
            break
        x = _project_step(x, g, learning_rate, start.epsilon)
    return traj


def optimize_atom_mechanism_fixed(mechanism: np.ndarray, q0: np.ndarray,
                                  shape: tuple[int, ...], alpha: Antichain,
                                  which: str = "net", maximize: bool = True,
                                  steps: int = 100,
                                  learning_rate: float = DEFAULT_LEARNING_RATE,
                                  epsilon: float = DEFAULT_INTERIOR_MARGIN,
                                  grad_tol: float = GRAD_NORM_STOP,
                                  ) -> list[TrajectoryStep]:
    """Optimize over the input block with the channel p(t|s) held fixed.

    ``mechanism`` is the flat conditional grid p(t|s) (columns over the
    target axis sum to 1), ``q0`` the starting source pmf. The joint is
    the product p(t,s) = p(t|s) q(s); gradients chain through it, so only
    the source block moves. Cells where the mechanism is zero stay zero;
    pointwise terms are evaluated on the fixed support only.
    """
    n_t = shape[0]
    src_size = int(np.prod(shape[1:]))
    M = np.asarray(mechanism, dtype=float).reshape(n_t, src_size)
    col = M.sum(axis=0)
    if not np.allclose(col, 1.0, atol=1e-9):
        raise ValueError("mechanism columns must sum to 1")
    q = np.asarray(q0, dtype=float).reshape(-1).copy()
    if q.size != src_size:
        raise ValueError("source pmf length does not match the grid")
    if q.min() < epsilon:
        raise BoundaryError("source pmf is not interior")
    q /= q.sum()
    support = (M.reshape(-1) > 0)

    sign = 1.0 if maximize else -1.0
    traj = []
    for it in range(steps + 1):
        joint = (M * q[None, :]).reshape(-1)
        obj = average_atom_value(joint, shape, alpha, which, support)
        g_joint = _grad_average_raw(joint, shape, alpha, which, support)
        g_q = sign * (M * g_joint.reshape(n_t, src_size)).sum(axis=0)
        g_proj = g_q - g_q.mean()
        norm = float(np.linalg.norm(g_proj))
        traj.append(TrajectoryStep(it, joint.copy(), obj, norm))
        if it == steps or norm < grad_tol:
            break
        q = _project_step(q, g_q, learning_rate, epsilon)
    return traj


def mechanism_from_distribution(d: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Split a joint into (p(t|s) grid, p(s) vector); needs p(s) > 0."""
    shape = grid_shape(d)
    joint = grid_from_distribution(d).reshape(shape[0], -1)
    q = joint.sum(axis=0)
    if q.min() <= 0:
        raise BoundaryError("some source outcome has zero probability")
    return (joint / q[None, :]).reshape(-1), q
