"""Weight-proportional random rooted trees built from particles on a circle.

A ranked probability vector places n particles at uniform positions on the
unit circle; the walk with drift -1 and a jump of p_i at particle i encodes
a random rooted tree on [n] with probability prod_v p_v^(children of v).
Both a breadth-first and a depth-first reading of the same walk are
implemented, together with the exact structural identities tying the tree
to the walk: pending-mass, generation-weight, width, and exploration-height
relations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateError,
    DuplicatePositionError,
    IdentityViolation,
    SignError,
    TieError,
)
from .paths import CadlagPath, Theta, combine, sup_distance
from .rng import RngState

TIE_TOL = 1e-12
IDENTITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# Ranked probability vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PSeq:
    """Ranked probability vector with a designated count of large entries."""

    probs: np.ndarray
    n_heavy: int = 0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a nonempty 1-d array")
        if np.any(p <= 0.0):
            raise SignError("all probabilities must be positive")
        if np.any(np.diff(p) > 0.0):
            raise ValueError("probs must be ranked nonincreasing")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probs sum to {p.sum():.15f}, expected 1")
        if not 0 <= self.n_heavy <= p.size:
            raise ValueError("n_heavy out of range")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_cum", np.cumsum(p))

    @property
    def n(self) -> int:
        return int(self.probs.size)

    @property
    def sigma(self) -> float:
        return float(np.sqrt((self.probs ** 2).sum()))

    @property
    def p_min(self) -> float:
        return float(self.probs[-1])

    @property
    def tail_probs(self) -> np.ndarray:
        """Probabilities with the heavy entries zeroed."""
        out = self.probs.copy()
        out[: self.n_heavy] = 0.0
        return out

    def draw(self, rng: RngState, size=None):
        """Sample vertex indices from the vector."""
        u = rng.gen.random(size)
        return np.searchsorted(self._cum, u, side="right")


def uniform_pseq(n: int) -> PSeq:
    return PSeq(np.full(n, 1.0 / n), n_heavy=0)


def approximating_pseq(theta: Theta, n: int) -> PSeq:
    """Ranked vector with n small entries converging to the given parameters.

    Heavy entries are z*theta_i/s and the n light ones 1/s, with
    z = sqrt(n)/theta0 and s = n + z*sum(theta_i).  Requires n large enough
    that the heavy entries stay above the light ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if theta.theta0 <= 0.0:
        raise ValueError("theta0 must be positive")
    z = np.sqrt(n) / theta.theta0
    s = n + z * theta.atom_sum
    heavy = np.array([z * a / s for a in theta.atoms])
    if heavy.size and heavy[-1] < 1.0 / s:
        raise ValueError("n too small: heavy entries would fall below 1/s")
    probs = np.concatenate([heavy, np.full(n, 1.0 / s)])
    return PSeq(probs, n_heavy=theta.length)


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class RootedTree:
    """Rooted tree on [n] with the construction's visit bookkeeping.

    parent[root] = -1; `order` is the visit order (breadth: position order,
    depth: examination order); `children` lists are in circle order (built
    lazily for breadth trees); `positions` are the relocated particle
    positions; `e_times` are the per-vertex examination end times (depth
    only); `visit_cum` is the cumulative weight in visit order, from 0.
    """

    n: int
    root: int
    parent: np.ndarray
    order: np.ndarray
    positions: np.ndarray
    visit_cum: np.ndarray
    kind: str
    e_times: np.ndarray | None = None
    children_data: list | None = None
    _heights: np.ndarray | None = None

    @property
    def children(self) -> list:
        if self.children_data is None:
            rank_of = np.empty(self.n, dtype=np.int64)
            rank_of[self.order] = np.arange(self.n)
            nonroot = self.order[1:]
            self.children_data = _group_children(
                self.n, self.order, rank_of[self.parent[nonroot]])
        return self.children_data

    @property
    def heights(self) -> np.ndarray:
        if self._heights is None:
            ht = [0] * self.n
            par = self.parent.tolist()
            for v in self.order[1:].tolist():
                ht[v] = ht[par[v]] + 1
            self._heights = np.asarray(ht, dtype=np.int64)
        return self._heights

    def validate(self) -> None:
        """Acyclicity and single-root checks."""
        if int((self.parent < 0).sum()) != 1 or self.parent[self.root] != -1:
            raise ValueError("tree must have exactly one root")
        seen = np.zeros(self.n, dtype=bool)
        seen[self.root] = True
        for v in self.order[1:].tolist():
            if not seen[self.parent[v]] or seen[v]:
                raise ValueError("visit order inconsistent with parent array")
            seen[v] = True
        if not seen.all():
            raise ValueError("not all vertices reached")

    def parent_key(self) -> tuple:
        return tuple(int(v) for v in self.parent)


def sample_positions(n: int, rng: RngState) -> np.ndarray:
    """n distinct uniform positions in (0, 1)."""
    for _ in range(100):
        x = rng.gen.random(n)
        if np.unique(x).size == n and x.min() > 0.0:
            return x
    raise DuplicatePositionError("could not sample distinct positions")


def _relocate(p: PSeq, x) -> tuple[int, np.ndarray]:
    """Minimizing particle and positions relocated to start there.

    The walk attains its infimum as a left limit at a unique particle;
    ties within 1e-12 raise TieError.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != p.n:
        raise ValueError("positions must match the probability vector length")
    if np.unique(x).size != x.size:
        raise DuplicatePositionError("particle positions must be distinct")
    order = np.argsort(x)
    x_sorted = x[order]
    cum_before = np.concatenate([[0.0], np.cumsum(p.probs[order])[:-1]])
    pre_min = cum_before - x_sorted  # left limits at each particle
    k = int(np.argmin(pre_min))
    if x.size > 1:
        lows = np.partition(pre_min, 1)[:2]
        if lows[1] - lows[0] <= TIE_TOL:
            raise TieError("two left limits tie for the minimum")
    v1 = int(order[k])
    shifted = np.mod(x - x[v1], 1.0)
    shifted[v1] = 0.0
    if np.unique(shifted).size != shifted.size:
        raise DuplicatePositionError("positions collide after relocation")
    return v1, shifted


def particle_bridge(p: PSeq, x) -> CadlagPath:
    """The walk u -> -u + sum_i p_i 1{x_i <= u} on [0, 1], exact jumps."""
    x = np.asarray(x, dtype=float)
    if np.unique(x).size != x.size:
        raise DuplicatePositionError("particle positions must be distinct")
    order = np.argsort(x)
    xs = x[order]
    ps = p.probs[order]
    inner_left = np.concatenate([[0.0], np.cumsum(ps)[:-1]]) - xs
    inner_right = inner_left + ps
    if xs[0] == 0.0:
        t = np.concatenate([xs, [1.0]])
        left = np.concatenate([inner_left, [0.0]])
        right = np.concatenate([inner_right, [0.0]])
    else:
        t = np.concatenate([[0.0], xs, [1.0]])
        left = np.concatenate([[0.0], inner_left, [0.0]])
        right = np.concatenate([[0.0], inner_right, [0.0]])
    return CadlagPath(t, left, right)


def particle_excursion(p: PSeq, x) -> tuple[CadlagPath, int, np.ndarray]:
    """Excursion read of the walk, relocated at the minimizing particle.

    Returns (path, minimizer, relocated positions).  The path is
    nonnegative, jumps by p_i at each relocated position (the minimizer's
    jump sits at time 0), and ends at exactly 0.
    """
    v1, xs = _relocate(p, x)
    order = np.argsort(xs)
    xs_sorted = xs[order]
    ps = p.probs[order]
    inner_left = np.concatenate([[0.0], np.cumsum(ps)[:-1]]) - xs_sorted
    inner_right = inner_left + ps
    t = np.concatenate([xs_sorted, [1.0]])
    left = np.concatenate([inner_left, [0.0]])
    right = np.concatenate([inner_right, [0.0]])
    return CadlagPath(t, left, right), v1, xs


def ptree_probability(tree_or_parent, p: PSeq) -> float:
    """prod_v p_v^(children count of v) for a rooted tree on [n]."""
    if isinstance(tree_or_parent, RootedTree):
        parent = tree_or_parent.parent
    else:
        parent = np.asarray(tree_or_parent)
    counts = np.bincount(parent[parent >= 0], minlength=p.n)
    return float(np.prod(p.probs ** counts))


def enumerate_parent_arrays(n: int):
    """All rooted trees on [n] as parent tuples (root marked -1)."""
    from itertools import product

    for root in range(n):
        others = [v for v in range(n) if v != root]
        for assign in product(range(n), repeat=n - 1):
            parent = [-1] * n
            for v, q in zip(others, assign):
                parent[v] = q
            ok = True
            for v in others:
                seen = {v}
                w = v
                while parent[w] != -1:
                    w = parent[w]
                    if w in seen:
                        ok = False
                        break
                    seen.add(w)
                if not ok:
                    break
            if ok:
                yield tuple(parent)


def _group_children(n: int, order: np.ndarray, rank: np.ndarray) -> list:
    """Children arrays per vertex id from non-root visit ranks and their
    parents' visit ranks, preserving position order within each group."""
    nonroot = order[1:]
    grouping = np.argsort(rank, kind="stable")
    grouped = nonroot[grouping]
    bounds = np.searchsorted(rank[grouping], np.arange(n + 1))
    children: list = [None] * n
    for j in range(n):
        children[int(order[j])] = grouped[bounds[j]:bounds[j + 1]]
    return children


def breadth_tree(p: PSeq, x) -> RootedTree:
    """Tree read in position order: particle j's children are the particles
    whose relocated positions fall in its cumulative-weight interval."""
    v1, xs = _relocate(p, x)
    n = p.n
    order = np.argsort(xs)
    y = np.concatenate([[0.0], np.cumsum(p.probs[order])])
    y[-1] = 1.0
    q = xs[order[1:]]
    rank = np.searchsorted(y, q, side="left") - 1
    if rank.size and (rank.min() < 0 or rank.max() >= n):
        raise DegenerateError("position escaped every interval")
    parent = np.full(n, -1, dtype=np.int64)
    parent[order[1:]] = order[rank]
    return RootedTree(n=n, root=v1, parent=parent, order=order,
                      positions=xs, visit_cum=y, kind="breadth")


def depth_tree(p: PSeq, x) -> RootedTree:
    """Tree read in examination order: each examined vertex's interval of
    length p_v recruits its children; examination proceeds to the first
    unexamined child, backtracking when none remain."""
    v1, xs = _relocate(p, x)
    n = p.n
    pos_order = np.argsort(xs)
    xs_sorted = xs[pos_order]
    probs = p.probs
    parent = np.full(n, -1, dtype=np.int64)
    children: list = [None] * n
    e_times = np.zeros(n)
    w_order = np.empty(n, dtype=np.int64)
    state = {"cursor": 0.0, "examined": 0}

    def examine(v: int) -> np.ndarray:
        cursor = state["cursor"]
        w_order[state["examined"]] = v
        state["examined"] += 1
        hi = 1.0 if state["examined"] == n else cursor + probs[v]
        i0 = np.searchsorted(xs_sorted, cursor, side="right")
        i1 = np.searchsorted(xs_sorted, hi, side="right")
        kids = pos_order[i0:i1]
        children[v] = kids
        parent[kids] = v
        state["cursor"] = hi
        e_times[v] = min(hi, 1.0)
        return kids

    stack = [(v1, examine(v1), 0)]
    while stack:
        v, kids, i = stack.pop()
        if i < kids.size:
            stack.append((v, kids, i + 1))
            w = int(kids[i])
            stack.append((w, examine(w), 0))
    if state["examined"] != n:
        raise DegenerateError("examination intervals missed a particle")
    visit_cum = np.concatenate([[0.0], e_times[w_order]])
    return RootedTree(n=n, root=v1, parent=parent, order=w_order,
                      positions=xs, visit_cum=visit_cum,
                      kind="depth", e_times=e_times, children_data=children)


# ---------------------------------------------------------------------------
# Exact identities between tree and walk
# ---------------------------------------------------------------------------

def _require(tree: RootedTree, kind: str) -> None:
    if tree.kind != kind:
        raise ValueError(f"operation requires a {kind}-order tree")


def _sibling_suffix_sums(tree: RootedTree, weights: np.ndarray) -> np.ndarray:
    """For each non-root vertex, the summed weight of its later siblings."""
    after = np.zeros(tree.n)
    for v in range(tree.n):
        kids = tree.children[v]
        if kids.size:
            w = weights[kids]
            after[kids] = np.concatenate([np.cumsum(w[::-1])[-2::-1], [0.0]])
    return after


def _path_accumulate(tree: RootedTree, per_vertex: np.ndarray) -> np.ndarray:
    """acc[v] = sum of per_vertex over the path from the root's child to v."""
    acc = [0.0] * tree.n
    par = tree.parent.tolist()
    pv = per_vertex.tolist()
    for v in tree.order[1:].tolist():
        acc[v] = acc[par[v]] + pv[v]
    return np.asarray(acc)


def pending_mass_error(tree: RootedTree, exc: CadlagPath, p: PSeq) -> float:
    """Max |exc(e(v)) - pending mass at v| over all vertices.

    The pending set of v holds the later children of v's ancestors plus all
    children of v; it is computed from the tree alone, so this is a genuine
    two-sided check of the examination-time identity.
    """
    _require(tree, "depth")
    probs = p.probs
    after = _sibling_suffix_sums(tree, probs)
    own = np.array([probs[tree.children[v]].sum() for v in range(tree.n)])
    pending = _path_accumulate(tree, after) + own
    vals = exc.value(tree.e_times)
    return float(np.abs(vals - pending).max())


def claim_margin(tree: RootedTree) -> float:
    """Max of position minus interval start over non-root visit ranks.

    A negative margin certifies the ordering property: every particle is
    seen strictly before its own examination interval opens.
    """
    pos = tree.positions[tree.order[1:]]
    starts = tree.visit_cum[1:-1]
    return float((pos - starts).max()) if pos.size else float("-inf")


def generation_weights(tree: RootedTree, exc: CadlagPath, p: PSeq,
                       tol: float = IDENTITY_TOL) -> list[tuple[float, float]]:
    """Per-generation identity: the walk's value at the cumulative visit
    time of each generation equals the next generation's weight.

    Returns (time, value) pairs for heights 1..max+1; raises
    IdentityViolation beyond tol.
    """
    _require(tree, "breadth")
    ht = tree.heights
    probs = p.probs
    max_h = int(ht.max())
    masses = np.bincount(ht, weights=probs, minlength=max_h + 2)
    counts = np.bincount(ht, minlength=max_h + 2)
    t_h = np.cumsum(counts)
    out = []
    worst = 0.0
    cum = 0.0
    for h in range(1, max_h + 2):
        cum += masses[h - 1]
        u_h = float(tree.visit_cum[t_h[h - 1]])
        val = float(exc.value(u_h))
        worst = max(worst, abs(u_h - cum), abs(val - masses[h]))
        out.append((u_h, val))
    if worst > tol:
        raise IdentityViolation(f"generation identity off by {worst:.3g}")
    return out


def exploration_height(tree: RootedTree, p: PSeq) -> CadlagPath:
    """Step path whose value on the i-th examination interval is the height
    of the i-th examined vertex; heights at examination end times are the
    stored left limits."""
    _require(tree, "depth")
    ht = tree.heights[tree.order].astype(float)
    t = tree.visit_cum.copy()
    t[-1] = 1.0
    left = np.concatenate([[ht[0]], ht])
    right = np.concatenate([ht, [ht[-1]]])
    return CadlagPath(t, left, right)


def dfs_mass_path(tree: RootedTree, p: PSeq) -> CadlagPath:
    """Linear interpolation of cumulative visit-order weight over i/n."""
    n = tree.n
    t = np.arange(n + 1) / n
    v = tree.visit_cum.copy()
    v[-1] = 1.0
    return CadlagPath(t, v, v.copy())


def classical_exploration(tree: RootedTree, p: PSeq) -> CadlagPath:
    """Step path with the i-th examined vertex's height on [(i-1)/n, i/n)."""
    _require(tree, "depth")
    n = tree.n
    ht = tree.heights[tree.order].astype(float)
    t = np.arange(n + 1) / n
    left = np.concatenate([[ht[0]], ht])
    right = np.concatenate([ht, [ht[-1]]])
    return CadlagPath(t, left, right)


def classical_identity_error(tree: RootedTree, p: PSeq) -> float:
    """Max deviation, at cell midpoints, of the classical step path from the
    exploration path composed with the cumulative-weight interpolant."""
    _require(tree, "depth")
    n = tree.n
    hp = exploration_height(tree, p)
    hn = classical_exploration(tree, p)
    sn = dfs_mass_path(tree, p)
    mids = (np.arange(n) + 0.5) / n
    return float(np.abs(hn.value(mids) - hp.value(sn.value(mids))).max())


def corrected_excursion(tree: RootedTree, exc: CadlagPath, p: PSeq) -> CadlagPath:
    """Excursion minus the ramp processes of the heavy vertices' children.

    Each child v of a heavy vertex contributes p_v from the heavy parent's
    jump time until its own examination interval, through which it ramps
    back to zero.  With no heavy vertices this is the excursion itself.
    """
    _require(tree, "depth")
    n_heavy = p.n_heavy
    if n_heavy == 0:
        return exc
    probs = p.probs
    jump_t, jump_v, kink_t, kink_s = [], [], [], []
    for i in range(n_heavy):
        kids = tree.children[i]
        if kids.size == 0:
            continue
        jump_t.append(float(tree.positions[i]))
        jump_v.append(float(probs[kids].sum()))
        for v in kids.tolist():
            e_v = min(float(tree.e_times[v]), 1.0)
            kink_t.extend([e_v - probs[v], e_v])
            kink_s.extend([-1.0, 1.0])
    if not jump_t:
        return exc
    ev_t = np.concatenate([jump_t, kink_t])
    ev_jump = np.concatenate([jump_v, np.zeros(len(kink_t))])
    ev_slope = np.concatenate([np.zeros(len(jump_t)), kink_s])
    keep = ev_t < 1.0  # a slope restore at the domain end has no effect
    ev_t, ev_jump, ev_slope = ev_t[keep], ev_jump[keep], ev_slope[keep]
    order = np.argsort(ev_t, kind="stable")
    ev_t, ev_jump, ev_slope = ev_t[order], ev_jump[order], ev_slope[order]
    t_u, start = np.unique(ev_t, return_index=True)
    end = np.concatenate([start[1:], [ev_t.size]])
    jumps = np.add.reduceat(ev_jump, start) if ev_t.size else np.array([])
    slope_steps = np.add.reduceat(ev_slope, start) if ev_t.size else np.array([])
    del end
    if t_u[0] > 0.0:
        times = np.concatenate([[0.0], t_u, [1.0]])
        jumps = np.concatenate([[0.0], jumps, [0.0]])
        slope_steps = np.concatenate([[0.0], slope_steps, [0.0]])
    else:
        times = np.concatenate([t_u, [1.0]])
        jumps = np.concatenate([jumps, [0.0]])
        slope_steps = np.concatenate([slope_steps, [0.0]])
    slopes = np.cumsum(slope_steps)
    left = np.zeros(times.size)
    right = np.zeros(times.size)
    acc = 0.0
    for k in range(times.size):
        left[k] = acc
        acc += jumps[k]
        right[k] = acc
        if k + 1 < times.size:
            acc += slopes[k] * (times[k + 1] - times[k])
    ramp = CadlagPath(times, left, right)
    return combine([exc, ramp], [1.0, -1.0])


def corrected_pending_error(tree: RootedTree, exc: CadlagPath, p: PSeq):
    """Two-route check of the corrected excursion at examination end times.

    Valid only when no heavy vertex has a heavy child (returns None
    otherwise).  The tree-side expression is the pending mass restricted to
    vertices with light parents, plus, for each pending heavy vertex, its
    own weight net of its children's (the ramp of a pending heavy vertex
    has not started delivering, so its children's mass is removed while its
    own weight still counts).
    """
    _require(tree, "depth")
    n_heavy = p.n_heavy
    heavy = np.zeros(tree.n, dtype=bool)
    heavy[:n_heavy] = True
    for i in range(n_heavy):
        if heavy[tree.children[i]].any():
            return None
    probs = p.probs
    deficit = np.zeros(tree.n)
    for i in range(n_heavy):
        deficit[i] = probs[i] - probs[tree.children[i]].sum()
    light_w = np.where(heavy, 0.0, probs)
    heavy_w = np.where(heavy, deficit, 0.0)
    after_light = np.zeros(tree.n)
    after_heavy = np.zeros(tree.n)
    own_light = np.zeros(tree.n)
    own_heavy = np.zeros(tree.n)
    for v in range(tree.n):
        kids = tree.children[v]
        if kids.size == 0:
            continue
        wl = light_w[kids]
        wh = heavy_w[kids]
        own_heavy[v] = wh.sum()
        suffix_h = np.concatenate([np.cumsum(wh[::-1])[-2::-1], [0.0]])
        after_heavy[kids] = suffix_h
        if not heavy[v]:
            own_light[v] = wl.sum()
            after_light[kids] = np.concatenate([np.cumsum(wl[::-1])[-2::-1], [0.0]])
    rhs = (_path_accumulate(tree, after_light) + own_light
           + _path_accumulate(tree, after_heavy) + own_heavy)
    g = corrected_excursion(tree, exc, p)
    lhs = g.value(tree.e_times)
    return float(np.abs(lhs - rhs).max())


# ---------------------------------------------------------------------------
# Width profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GenerationStepFunction:
    """Step function constant on height bands [g*sigma, (g+1)*sigma)."""

    sigma: float
    values: np.ndarray

    def __call__(self, h):
        h_arr = np.asarray(h, dtype=float)
        g = np.clip(np.floor(h_arr / self.sigma).astype(int), 0, self.values.size - 1)
        out = np.where(h_arr < 0, 0.0, self.values[g])
        return float(out) if np.isscalar(h) else out


def width_profile(tree: RootedTree, p: PSeq, exc: CadlagPath | None = None,
                  tol: float = IDENTITY_TOL):
    """Per-generation weight and its cumulative version on the sigma-scaled
    height axis.  With the breadth excursion supplied, checks the exact
    width identity at every band and raises IdentityViolation on failure."""
    ht = tree.heights
    probs = p.probs
    max_h = int(ht.max())
    masses = np.bincount(ht, weights=probs, minlength=max_h + 2)  # final band 0
    cum_before = np.concatenate([[0.0], np.cumsum(masses)[:-1]])
    cum_before[max_h + 1] = 1.0
    sigma = p.sigma
    width = GenerationStepFunction(sigma, masses)
    cumulative = GenerationStepFunction(sigma, cum_before)
    if exc is not None:
        err = float(np.abs(exc.value(cum_before) - masses).max())
        if err > tol:
            raise IdentityViolation(f"width identity off by {err:.3g}")
    return width, cumulative


def width_at_quantile(width: GenerationStepFunction,
                      cumulative: GenerationStepFunction, u: float) -> float:
    """Width at the first band where the cumulative profile reaches u."""
    g = int(np.searchsorted(cumulative.values, u, side="left"))
    g = min(g, width.values.size - 1)
    return float(width.values[g])


# ---------------------------------------------------------------------------
# Repeat times, diagnostics, coupling gap
# ---------------------------------------------------------------------------

def repeat_time_sample(p: PSeq, rng: RngState) -> tuple[int, float]:
    """Draw from p until the first repeated vertex.

    Returns (T, S): the index of the first repeat and the accumulated
    heavy-zeroed weight of the distinct draws before it.
    """
    tail = p.tail_probs
    seen = set()
    total = 0.0
    t = 0
    while True:
        t += 1
        xi = int(p.draw(rng))
        if xi in seen:
            return t, total
        seen.add(xi)
        total += tail[xi]


def repeat_time_mean_uniform(n: int) -> float:
    """Exact mean first-repeat index for the uniform vector on [n]."""
    total = 2.0  # P(T > 0) + P(T > 1)
    prod = 1.0
    for k in range(1, n + 1):
        prod *= 1.0 - k / n
        if prod == 0.0:
            break
        total += prod
    return total


@dataclass(frozen=True, eq=False)
class RegimeReport:
    sigma: float
    p_min: float
    heavy_over_sigma: np.ndarray
    tail_mean_ratio: float
    mgf_lambdas: np.ndarray
    mgf_values: np.ndarray


def regime_diagnostics(p: PSeq, lambdas=None) -> RegimeReport:
    """Scaling diagnostics: sigma, smallest weight, rescaled heavy entries,
    the mean of the heavy-zeroed weight of a drawn vertex over sigma^2
    (which approaches theta0^2), and its exact moment generating function
    on a lambda grid."""
    if lambdas is None:
        lambdas = np.linspace(-1.0, 1.0, 9)
    lambdas = np.asarray(lambdas, dtype=float)
    sigma = p.sigma
    ratio = p.tail_probs / sigma ** 2
    tail_mean = float((p.probs * ratio).sum())
    mgf = np.array([float((p.probs * np.exp(lam * ratio)).sum()) for lam in lambdas])
    return RegimeReport(
        sigma=sigma,
        p_min=p.p_min,
        heavy_over_sigma=p.probs[: p.n_heavy] / sigma,
        tail_mean_ratio=tail_mean,
        mgf_lambdas=lambdas,
        mgf_values=mgf,
    )


def exploration_gap(p: PSeq, rng: RngState) -> float:
    """Uniform gap between the scaled exploration height and the scaled
    corrected excursion on one realization.

    Single-vertex inputs return 0 by convention.
    """
    if p.n == 1:
        return 0.0
    x = sample_positions(p.n, rng)
    exc, _, _ = particle_excursion(p, x)
    tree = depth_tree(p, x)
    g = corrected_excursion(tree, exc, p)
    h = exploration_height(tree, p)
    sigma = p.sigma
    theta0_sq = float((p.tail_probs ** 2).sum()) / sigma ** 2
    return sup_distance(h.scale_values(0.5 * theta0_sq * sigma),
                        g.scale_values(1.0 / sigma))
