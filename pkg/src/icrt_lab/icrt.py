"""Trees with edge lengths: line-breaking sampler, function-sampled reduced
trees, and spanning reductions of discrete trees.

The line-breaking sampler cuts the half line at the superposition of a
quadratic-intensity planar process (projected) and one linear-rate process
per atom, gluing each new segment at its joinpoint; the stage-J tree spans
the root and J leaves.  The function sampler reads leaf depths and
branchpoint depths off an excursion at given times.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DuplicateSampleError
from .paths import CadlagPath, Theta
from .ptree import PSeq, RootedTree
from .rng import RngState

MERGE_TOL = 1e-12


# ---------------------------------------------------------------------------
# Edge trees
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class EdgeTree:
    """Rooted tree with positive edge lengths and labeled leaves.

    Node 0 is the root; parent[0] = -1 and lengths[0] = 0.  leaf_nodes maps
    label (1..J) to node id.  A labeled node is normally a leaf but may sit
    internally in degenerate reductions.
    """

    parent: np.ndarray
    lengths: np.ndarray
    leaf_nodes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)
        self.lengths = np.asarray(self.lengths, dtype=float)
        if self.parent[0] != -1:
            raise ValueError("node 0 must be the root")

    @property
    def n_nodes(self) -> int:
        return int(self.parent.size)

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_nodes)

    def children_lists(self) -> list:
        out = [[] for _ in range(self.n_nodes)]
        for v in range(1, self.n_nodes):
            out[int(self.parent[v])].append(v)
        return out

    def depths(self) -> np.ndarray:
        d = np.zeros(self.n_nodes)
        done = np.zeros(self.n_nodes, dtype=bool)
        done[0] = True
        for v in range(1, self.n_nodes):
            chain = []
            w = v
            while not done[w]:
                chain.append(w)
                w = int(self.parent[w])
            base = d[w]
            for u in reversed(chain):
                base = base + self.lengths[u]
                d[u] = base
                done[u] = True
        return d

    def total_length(self) -> float:
        return float(self.lengths.sum())

    def leaf_depths(self) -> np.ndarray:
        d = self.depths()
        return np.array([d[self.leaf_nodes[lab]] for lab in sorted(self.leaf_nodes)])

    def scale_lengths(self, c: float) -> "EdgeTree":
        return EdgeTree(self.parent.copy(), c * self.lengths, dict(self.leaf_nodes))

    def shape_code(self) -> str:
        """Canonical shape string: invariant under internal relabeling,
        leaf labels kept, edge lengths ignored."""
        kids = self.children_lists()
        labels_at: dict = {}
        for lab, node in self.leaf_nodes.items():
            labels_at.setdefault(node, []).append(lab)

        def code(v: int) -> str:
            lab = ",".join(str(x) for x in sorted(labels_at.get(v, [])))
            sub = sorted(code(c) for c in kids[v])
            inner = ("L" + lab if lab else "") + ("|".join(sub) if sub else "")
            return "(" + inner + ")"

        return code(0)

    def validate(self, min_internal_degree: int = 3) -> None:
        """Positive lengths; labeled leaves; internal non-root degree bound."""
        if np.any(self.lengths[1:] <= 0.0):
            raise ValueError("edge lengths must be positive")
        kids = self.children_lists()
        labeled = set(self.leaf_nodes.values())
        for v in range(1, self.n_nodes):
            deg = len(kids[v]) + 1
            if len(kids[v]) == 0 and v not in labeled:
                raise ValueError(f"unlabeled leaf node {v}")
            if len(kids[v]) > 0 and v not in labeled and deg < min_internal_degree:
                raise ValueError(f"internal node {v} has degree {deg}")

    def to_json(self) -> str:
        edges = [[int(self.parent[v]), int(v), float(self.lengths[v])]
                 for v in range(1, self.n_nodes)]
        leaves = [int(self.leaf_nodes[lab]) for lab in sorted(self.leaf_nodes)]
        return json.dumps({"edges": edges, "leaves": leaves})

    @staticmethod
    def from_json(text: str) -> "EdgeTree":
        obj = json.loads(text)
        edges = obj["edges"]
        n = len(edges) + 1
        parent = np.full(n, -1, dtype=np.int64)
        lengths = np.zeros(n)
        for par, child, ln in edges:
            parent[child] = par
            lengths[child] = ln
        leaves = {i + 1: node for i, node in enumerate(obj["leaves"])}
        return EdgeTree(parent, lengths, leaves)


def edge_tree_stats(t: EdgeTree) -> tuple[float, np.ndarray, str]:
    """(total length, leaf depths by label, canonical shape code)."""
    return t.total_length(), t.leaf_depths(), t.shape_code()


# ---------------------------------------------------------------------------
# Line-breaking sampler
# ---------------------------------------------------------------------------

class _CutpointStream:
    """Merged increasing stream of cutpoints paired with joinpoints.

    Source 0 is the planar process: x-coordinates arrive with quadratic
    cumulative intensity theta0^2 x^2 / 2, each paired with a uniform
    joinpoint below it.  Source i >= 1 is the rate-theta_i process on the
    line: its first point is held back as the shared joinpoint (the hub)
    and only later points are cutpoints.
    """

    def __init__(self, theta: Theta, rng: RngState):
        self.theta = theta
        self.gen = rng.gen
        self.heap: list = []
        self._s0 = 0.0
        if theta.theta0 > 0.0:
            self._push_planar()
        self.hubs = {}
        for i, rate in enumerate(theta.atoms, start=1):
            first = self.gen.exponential(1.0 / rate)
            self.hubs[i] = first
            heapq.heappush(self.heap, (first + self.gen.exponential(1.0 / rate), i))

    def _push_planar(self):
        self._s0 += self.gen.exponential(1.0)
        x = float(np.sqrt(2.0 * self._s0) / self.theta.theta0)
        heapq.heappush(self.heap, (x, 0))

    def next_cut(self) -> tuple[float, float]:
        x, src = heapq.heappop(self.heap)
        if src == 0:
            join = float(self.gen.uniform(0.0, x))
            self._push_planar()
        else:
            join = self.hubs[src]
            rate = self.theta.atoms[src - 1]
            heapq.heappush(self.heap, (x + self.gen.exponential(1.0 / rate), src))
        return float(x), join


def line_breaking_tree(theta: Theta, leaves: int, rng: RngState) -> EdgeTree:
    """Stage-J tree of the recursive line-breaking construction.

    Segment k covers (eta_{k-1}, eta_k] of the half line; segment k >= 2
    attaches at the joinpoint of cutpoint eta_{k-1}; the free end of
    segment k is leaf k.
    """
    if leaves < 1:
        raise ValueError("need at least one leaf")
    stream = _CutpointStream(theta, rng)
    cuts, joins = [], []
    for _ in range(leaves):
        c, j = stream.next_cut()
        cuts.append(c)
        joins.append(j)
    cut_edges = np.concatenate([[0.0], cuts])
    seg_attachments: list = [[] for _ in range(leaves)]
    for k in range(1, leaves):
        a = joins[k - 1]
        host = int(np.searchsorted(cut_edges, a, side="left")) - 1
        seg_attachments[host].append((a - cut_edges[host], k))
    parent = [-1]
    lengths = [0.0]
    leaf_nodes = {}
    seg_root = [0] * leaves
    node_of: dict = {}

    def new_node(par: int, ln: float) -> int:
        parent.append(par)
        lengths.append(ln)
        return len(parent) - 1

    # attachment targets lie on earlier segments, so processing segments in
    # creation order guarantees the host chain exists when referenced
    for k in range(leaves):
        offsets = sorted(set(o for o, _ in seg_attachments[k]))
        cur_node, cur_off = seg_root[k], 0.0
        for o in offsets:
            node = new_node(cur_node, o - cur_off)
            node_of[(k, o)] = node
            cur_node, cur_off = node, o
        seg_len = float(cut_edges[k + 1] - cut_edges[k])
        leaf_nodes[k + 1] = new_node(cur_node, seg_len - cur_off)
        for o, child_seg in seg_attachments[k]:
            seg_root[child_seg] = node_of[(k, o)]
    return EdgeTree(np.array(parent), np.array(lengths), leaf_nodes)


# ---------------------------------------------------------------------------
# Sampling a function
# ---------------------------------------------------------------------------

def sample_function_tree(h: CadlagPath, sample_times,
                         leaf_shift: float = 0.0) -> EdgeTree:
    """Reduced tree read off an excursion at the given times.

    Root-to-leaf distances are the path values at the sorted times;
    consecutive leaves branch at the interval infimum.  The i-th smallest
    time carries the label of its original position in `sample_times`
    (1-based).  Depth coincidences within 1e-12 merge into one node.

    leaf_shift is added to the point evaluations only: for paths sampled on
    a grid and re-based at a grid minimum, point values sit low by the
    discrete-monitoring constant while interval infima self-correct (the
    grid misses interval dips by the same constant), so only the leaf
    depths need the correction.
    """
    u = np.asarray(sample_times, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("need at least one sample time")
    order = np.argsort(u)
    u_sorted = u[order]
    if np.any(np.diff(u_sorted) == 0.0):
        raise DegenerateError("coincident sample times")
    depths = np.array([h.value(t) for t in u_sorted]) + leaf_shift
    branch = np.array([h.interval_inf(u_sorted[i], u_sorted[i + 1])
                       for i in range(u.size - 1)])
    parent = [-1]
    lengths = [0.0]
    leaf_nodes = {}

    def new_node(par: int, ln: float) -> int:
        parent.append(par)
        lengths.append(ln)
        return len(parent) - 1

    spine = [(0, 0.0)]  # nodes along the path to the latest leaf
    for i in range(u.size):
        label = int(order[i]) + 1
        d = float(depths[i])
        if i > 0:
            b = float(branch[i - 1])
            popped = None
            while len(spine) > 1 and spine[-1][1] > b + MERGE_TOL:
                popped = spine.pop()
            top, td = spine[-1]
            if b - td > MERGE_TOL:
                # split the spine edge toward the popped node at depth b
                mid = new_node(top, b - td)
                pop_node, pop_depth = popped
                parent[pop_node] = mid
                lengths[pop_node] = pop_depth - b
                spine.append((mid, b))
        base, bd = spine[-1]
        if d - bd <= MERGE_TOL:
            leaf_nodes[label] = base  # depth coincidence: label the base node
            continue
        leaf = new_node(base, d - bd)
        leaf_nodes[label] = leaf
        spine.append((leaf, d))
    return EdgeTree(np.array(parent), np.array(lengths), leaf_nodes)


# ---------------------------------------------------------------------------
# Spanning reduction of a discrete tree
# ---------------------------------------------------------------------------

def _root_distance(v: int, parent: np.ndarray) -> int:
    steps = 0
    while parent[v] != -1:
        v = int(parent[v])
        steps += 1
    return steps


def spanning_subtree(tree: RootedTree, p: PSeq, leaves: int,
                     rng: RngState | None = None, vertices=None) -> EdgeTree:
    """Reduced spanning tree on the root and `leaves` drawn vertices.

    Vertices are drawn from p (or passed explicitly); unit-length edges are
    contracted through unmarked degree-2 vertices, leaving integer edge
    lengths.  Raises DuplicateSampleError on a repeated draw and
    DegenerateError when the root itself is drawn.
    """
    if vertices is None:
        if rng is None:
            raise ValueError("rng required to sample vertices")
        vertices = [int(v) for v in p.draw(rng, size=leaves)]
    else:
        vertices = [int(v) for v in vertices]
        if len(vertices) != leaves:
            raise ValueError("vertex count mismatch")
    if len(set(vertices)) != len(vertices):
        raise DuplicateSampleError("two sampled vertices coincide")
    if tree.root in vertices:
        raise DegenerateError("sampled the root")
    parent = tree.parent
    union = set(vertices) | {int(tree.root)}
    for v in vertices:
        w = v
        while parent[w] != -1:
            w = int(parent[w])
            union.add(w)
    child_sets: dict = {v: set() for v in union}
    for v in union:
        if parent[v] != -1:
            child_sets[int(parent[v])].add(v)
    marked = set(vertices) | {int(tree.root)}
    keep = {v for v in union if v in marked or len(child_sets[v]) >= 2}
    node_of = {int(tree.root): 0}
    parent_out = [-1]
    lengths_out = [0.0]

    def ensure(v: int) -> int:
        if v in node_of:
            return node_of[v]
        w = v
        steps = 0
        while True:
            w = int(parent[w])
            steps += 1
            if w in keep:
                break
        par_node = ensure(w)
        parent_out.append(par_node)
        lengths_out.append(float(steps))
        node_of[v] = len(parent_out) - 1
        return node_of[v]

    for v in sorted(keep, key=lambda q: _root_distance(q, parent)):
        ensure(v)
    leaf_nodes = {i + 1: node_of[v] for i, v in enumerate(vertices)}
    return EdgeTree(np.array(parent_out), np.array(lengths_out), leaf_nodes)
