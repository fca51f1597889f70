import numpy as np
import pytest

from icrt_lab.errors import DegenerateError, DuplicateSampleError
from icrt_lab.icrt import (
    EdgeTree,
    edge_tree_stats,
    line_breaking_tree,
    sample_function_tree,
    spanning_subtree,
)
from icrt_lab.paths import continuous_path, validate_theta
from icrt_lab.ptree import PSeq, breadth_tree, sample_positions, uniform_pseq
from icrt_lab.reflect import sample_reflected
from icrt_lab.rng import RngState
from icrt_lab.stats import ks_two_sample

from conftest import make_tent


def cherry(stem=1.0, arm1=2.0, arm2=3.0) -> EdgeTree:
    return EdgeTree(np.array([-1, 0, 1, 1]),
                    np.array([0.0, stem, arm1, arm2]),
                    {1: 2, 2: 3})


class TestEdgeTree:
    def test_single_edge_stats(self):
        et = EdgeTree(np.array([-1, 0]), np.array([0.0, 2.5]), {1: 1})
        total, depths, code = edge_tree_stats(et)
        assert total == 2.5 and list(depths) == [2.5]
        assert code == "((L1))"

    def test_cherry_stats(self):
        total, depths, _ = edge_tree_stats(cherry())
        assert total == 6.0
        assert list(depths) == [3.0, 4.0]

    def test_shape_code_invariant_under_internal_relabeling(self):
        # same cherry with internal node created in a different order
        a = cherry()
        b = EdgeTree(np.array([-1, 0, 1, 1]),
                     np.array([0.0, 1.0, 3.0, 2.0]),
                     {2: 2, 1: 3})
        assert a.shape_code() == b.shape_code()

    def test_shape_code_distinguishes_labels(self):
        a = cherry()
        c = EdgeTree(np.array([-1, 0, 1, 2]),
                     np.array([0.0, 1.0, 2.0, 3.0]),
                     {1: 2, 2: 3})  # caterpillar, label 1 internal
        assert a.shape_code() != c.shape_code()

    def test_json_roundtrip(self):
        et = cherry()
        back = EdgeTree.from_json(et.to_json())
        assert back.shape_code() == et.shape_code()
        assert back.total_length() == et.total_length()

    def test_scale(self):
        et = cherry().scale_lengths(2.0)
        assert et.total_length() == 12.0


class TestLineBreaking:
    def test_single_leaf_shape(self, brownian_theta):
        et = line_breaking_tree(brownian_theta, 1, RngState(3))
        assert et.n_nodes == 2 and et.n_leaves == 1
        et.validate()

    def test_two_leaves_one_branchpoint(self, brownian_theta):
        for k in range(20):
            et = line_breaking_tree(brownian_theta, 2, RngState(4, k))
            assert et.n_nodes == 4  # root, branchpoint, two leaves
            et.validate()

    def test_leaf_count(self, reference_theta):
        for j in (1, 2, 5):
            et = line_breaking_tree(reference_theta, j, RngState(5))
            assert et.n_leaves == j
            et.validate()

    def test_segment_lengths_shrink_with_stage(self, reference_theta):
        # the final segment is never subdivided, so the last leaf's edge is
        # the newest cutpoint gap; its mean shrinks as the stage grows
        def last_edge(j, k):
            et = line_breaking_tree(reference_theta, j, RngState(6, k))
            return et.lengths[et.leaf_nodes[j]]

        early = np.mean([last_edge(2, k) for k in range(200)])
        late = np.mean([last_edge(8, k) for k in range(200)])
        assert 0.0 < late < early

    def test_rayleigh_first_branch(self, brownian_theta):
        # survival of the first cutpoint is exp(-x^2 / 2)
        n = 4000
        ls = np.array([line_breaking_tree(brownian_theta, 1, RngState(7, k)).total_length()
                       for k in range(n)])
        ref = np.sqrt(2.0 * RngState(8).gen.exponential(size=n))
        rep = ks_two_sample(ls, ref)
        assert rep.p_value > 0.001

    def test_first_cut_survival_with_atoms(self, reference_theta):
        # survival exp(-theta0^2 x^2 / 2) * prod_i (1 + theta_i x) exp(-theta_i x)
        n = 4000
        ls = np.array([line_breaking_tree(reference_theta, 1, RngState(9, k)).total_length()
                       for k in range(n)])
        th0, atoms = reference_theta.theta0, reference_theta.atoms

        def survival(x):
            s = np.exp(-th0 ** 2 * x ** 2 / 2.0)
            for a in atoms:
                s = s * (1.0 + a * x) * np.exp(-a * x)
            return s

        # inverse-transform reference sample via bisection
        us = RngState(10).gen.random(n)
        ref = np.empty(n)
        for i, u in enumerate(us):
            lo, hi = 0.0, 50.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if survival(mid) > u:
                    lo = mid
                else:
                    hi = mid
            ref[i] = 0.5 * (lo + hi)
        rep = ks_two_sample(ls, ref)
        assert rep.p_value > 0.001

    def test_hub_reuse_creates_high_degree(self):
        # a dominant atom forces repeated attachment to one joinpoint
        theta = validate_theta(0.1, [0.99498743710662])  # norm within 1e-4
        counts = []
        for k in range(50):
            et = line_breaking_tree(theta, 6, RngState(11, k))
            kids = et.children_lists()
            counts.append(max(len(c) for c in kids))
        assert max(counts) >= 3


class TestSampleFunctionTree:
    def test_single_time(self):
        et = sample_function_tree(make_tent(), [0.3])
        assert et.n_nodes == 2
        assert et.leaf_depths()[0] == pytest.approx(0.3)

    def test_tent_degenerate_merge(self):
        # depths 0.25 and 0.25 with branch depth 0.25: all merge
        et = sample_function_tree(make_tent(), [0.25, 0.75])
        assert et.leaf_nodes[1] == et.leaf_nodes[2]
        assert et.leaf_depths()[0] == pytest.approx(0.25)

    def test_tent_nested(self):
        et = sample_function_tree(make_tent(), [0.2, 0.4])
        # branch depth = tent(0.2) = 0.2; leaf depths 0.2 and 0.4
        assert sorted(et.leaf_depths()) == pytest.approx([0.2, 0.4])
        assert et.total_length() == pytest.approx(0.4)

    def test_label_relabeling(self):
        # the later time in the input order is the first on the axis
        et = sample_function_tree(make_tent(), [0.4, 0.2])
        d = et.leaf_depths()
        assert d[0] == pytest.approx(0.4)  # label 1 = first input = time 0.4
        assert d[1] == pytest.approx(0.2)

    def test_scaling_property(self, reference_theta):
        y = sample_reflected(reference_theta, 256, RngState(12))
        u = RngState(13).gen.random(4)
        a = sample_function_tree(y, u)
        b = sample_function_tree(y.scale_values(3.0), u)
        assert b.shape_code() == a.shape_code()
        assert b.total_length() == pytest.approx(3.0 * a.total_length(), rel=1e-12)

    def test_branchpoint_count(self, reference_theta):
        for k in range(20):
            y = sample_reflected(reference_theta, 256, RngState(14, k))
            u = RngState(15, k).gen.random(5)
            et = sample_function_tree(y, u)
            n_internal = et.n_nodes - 1 - et.n_leaves
            assert n_internal <= 4  # at most J - 1 branchpoints
            et.validate()

    def test_coincident_times_raise(self):
        with pytest.raises(DegenerateError):
            sample_function_tree(make_tent(), [0.3, 0.3])


class TestSpanningSubtree:
    def setup_method(self):
        self.p = PSeq(np.array([0.5, 0.3, 0.2]))
        self.tree = breadth_tree(self.p, [0.05, 0.5, 0.7])  # chain 0 -> 1 -> 2

    def test_single_vertex_path(self):
        et = spanning_subtree(self.tree, self.p, 1, vertices=[2])
        assert et.n_nodes == 2
        assert et.leaf_depths()[0] == 2.0  # height of vertex 2

    def test_nested_markers(self):
        et = spanning_subtree(self.tree, self.p, 2, vertices=[1, 2])
        # vertex 1 is on the path to vertex 2: kept as a labeled inner node
        d = et.leaf_depths()
        assert list(d) == [1.0, 2.0]
        assert et.total_length() == 2.0

    def test_duplicate_raises(self):
        with pytest.raises(DuplicateSampleError):
            spanning_subtree(self.tree, self.p, 2, vertices=[2, 2])

    def test_root_draw_raises(self):
        with pytest.raises(DegenerateError):
            spanning_subtree(self.tree, self.p, 1, vertices=[0])

    def test_duplicate_rate_shrinks(self):
        rates = []
        for n in (1000, 10_000):
            p = uniform_pseq(n)
            tree = breadth_tree(p, sample_positions(n, RngState(16)))
            dup = 0
            draws = 2000
            for k in range(draws):
                try:
                    spanning_subtree(tree, p, 5, RngState(17, k))
                except (DuplicateSampleError, DegenerateError):
                    dup += 1
            rates.append(dup / draws)
        assert rates[1] < 0.01
        assert rates[1] <= rates[0]

    def test_random_contraction_consistency(self):
        # total length equals the number of spanning-tree edges
        n = 200
        p = uniform_pseq(n)
        tree = breadth_tree(p, sample_positions(n, RngState(18)))
        et = spanning_subtree(tree, p, 3, RngState(19))
        # recompute by brute force: union of root paths
        # (vertices drawn again with the same stream)
        verts = [int(v) for v in p.draw(RngState(19), size=3)]
        union = set()
        for v in verts:
            w = v
            while w != tree.root:
                union.add(w)
                w = int(tree.parent[w])
        assert et.total_length() == float(len(union))
