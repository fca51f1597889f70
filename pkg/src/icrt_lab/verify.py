"""Verification suites: exact identities, law checks, and limit diagnostics.

Each suite returns (reports, passed).  Statistical checks that fail are
re-run once with a fresh seed before flagging (a multiple-testing guard);
both outcomes are logged and the retry decides.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError, DuplicateSampleError, TieError
from .icrt import edge_tree_stats, line_breaking_tree, sample_function_tree, spanning_subtree
from .paths import sample_brownian_bridge, sup_distance, validate_theta
from .ptree import (
    PSeq,
    approximating_pseq,
    breadth_tree,
    classical_identity_error,
    claim_margin,
    corrected_pending_error,
    depth_tree,
    enumerate_parent_arrays,
    exploration_gap,
    particle_excursion,
    pending_mass_error,
    ptree_probability,
    repeat_time_sample,
    sample_positions,
    uniform_pseq,
    width_at_quantile,
    width_profile,
)
from .reflect import sample_excursion, sample_reflected, truncated_coupling
from .rng import RngState
from .stats import (
    MONITORING_BETA,
    TestReport,
    chi_square_gof,
    excursion_time_change,
    jeulin_check,
    ks_two_sample,
)

# Demo parameter sequence used across the suites (three-decimal inputs).
REFERENCE_THETA = validate_theta(0.862, (0.345, 0.302, 0.216))
BROWNIAN_THETA = validate_theta(1.0, ())

IDENTITY_TOL = 1e-9
RETRY_OFFSET = 1000


def _with_retry(build, seed: int) -> list[TestReport]:
    """Run a statistical check; on failure re-run once at a fresh seed."""
    rep = build(seed)
    if rep.passed:
        return [rep]
    rep2 = build(seed + RETRY_OFFSET)
    rep2.extra.update({"retried": True, "first_p": rep.p_value})
    return [rep, rep2]


def _amax(values) -> float:
    return float(np.max(values)) if len(values) else 0.0


# ---------------------------------------------------------------------------
# 1. exact identity suite
# ---------------------------------------------------------------------------

def suite_identities(n: int = 1000, reps: int = 100, seed: int = 0,
                     tol: float = IDENTITY_TOL):
    """Structural identities on random realizations, uniform and
    heavy-atom probability vectors alternating."""
    p_uniform = uniform_pseq(n)
    p_heavy = approximating_pseq(REFERENCE_THETA, n)
    errs = {"pending": [], "generation": [], "width": [], "claim": [],
            "classical": [], "corrected": []}
    hypothesis_skips = 0
    for r in range(reps):
        p = p_uniform if r % 2 == 0 else p_heavy
        rng = RngState(seed, r)
        x = sample_positions(p.n, rng)
        exc, _, _ = particle_excursion(p, x)
        bt = breadth_tree(p, x)
        bt.validate()
        errs["generation"].append(_generation_error(bt, exc, p))
        w_fn, wbar_fn = width_profile(bt, p)
        errs["width"].append(_amax(np.abs(exc.value(wbar_fn.values) - w_fn.values)))
        errs["claim"].append(max(claim_margin(bt), 0.0))
        dt = depth_tree(p, x)
        dt.validate()
        errs["pending"].append(pending_mass_error(dt, exc, p))
        errs["claim"].append(max(claim_margin(dt), 0.0))
        errs["classical"].append(classical_identity_error(dt, p))
        ce = corrected_pending_error(dt, exc, p)
        if ce is None:
            hypothesis_skips += 1
        else:
            errs["corrected"].append(ce)
    reports = []
    all_ok = True
    for name, vals in errs.items():
        worst = _amax(vals)
        ok = worst <= tol
        all_ok &= ok
        reports.append(TestReport(suite=f"identities/{name}", statistic=worst,
                                  p_value=1.0 if ok else 0.0, passed=ok,
                                  n_samples=len(vals), seed=seed,
                                  extra={"tol": tol, "n": n,
                                         "hypothesis_skips": hypothesis_skips if name == "corrected" else 0}))
    return reports, all_ok


def _generation_error(bt, exc, p) -> float:
    ht = bt.heights
    probs = p.probs
    max_h = int(ht.max())
    masses = np.bincount(ht, weights=probs, minlength=max_h + 2)
    counts = np.bincount(ht, minlength=max_h + 2)
    t_h = np.cumsum(counts)
    worst = 0.0
    cum = 0.0
    for h in range(1, max_h + 2):
        cum += masses[h - 1]
        u_h = float(bt.visit_cum[t_h[h - 1]])
        worst = max(worst, abs(u_h - cum), abs(float(exc.value(u_h)) - masses[h]))
    return worst


# ---------------------------------------------------------------------------
# 2. law of the constructions
# ---------------------------------------------------------------------------

def _tree_law_report(p: PSeq, kind: str, samples: int, seed: int) -> TestReport:
    trees = list(enumerate_parent_arrays(p.n))
    index = {t: i for i, t in enumerate(trees)}
    probs = np.array([ptree_probability(np.array(t), p) for t in trees])
    counts = np.zeros(len(trees))
    build = breadth_tree if kind == "breadth" else depth_tree
    rng = RngState(seed, 77 if kind == "breadth" else 78)
    for _ in range(samples):
        tr = build(p, sample_positions(p.n, rng))
        counts[index[tr.parent_key()]] += 1
    rep = chi_square_gof(counts, probs, suite=f"tree-law/{kind}-n{p.n}", seed=seed)
    return rep


def suite_tree_law(samples: int = 100_000, seed: int = 0):
    """Chi-square of both constructions against enumerated probabilities."""
    cases = [
        (uniform_pseq(3), "breadth"),
        (uniform_pseq(3), "depth"),
        (PSeq(np.array([0.4, 0.3, 0.2, 0.1])), "breadth"),
        (PSeq(np.array([0.4, 0.3, 0.2, 0.1])), "depth"),
    ]
    reports = []
    all_ok = True
    for p, kind in cases:
        reps = _with_retry(lambda s, p=p, kind=kind: _tree_law_report(p, kind, samples, s), seed)
        reports.extend(reps)
        all_ok &= reps[-1].passed
    return reports, all_ok


# ---------------------------------------------------------------------------
# 3. reduced-tree law: function sampling vs line breaking
# ---------------------------------------------------------------------------

def _function_tree_summaries(theta, grid: int, replicates: int, leaves_list,
                             seed: int):
    """Per-replicate (total length, leaf-1 depth) of function-sampled trees
    from the scaled reflected excursion, for each leaf count.

    Point evaluations carry the grid-minimum continuity correction (the
    relocated origin sits MONITORING_BETA/sqrt(grid) above the true
    infimum); interval infima self-correct, so the shift enters through
    the leaf depths only.
    """
    scale = 2.0 / theta.theta0 ** 2
    shift = scale * MONITORING_BETA / np.sqrt(grid)
    out = {j: np.empty((replicates, 2)) for j in leaves_list}
    for k in range(replicates):
        rng = RngState(seed, k)
        path = sample_reflected(theta, grid, rng).scale_values(scale)
        for j in leaves_list:
            u = rng.gen.random(j)
            et = sample_function_tree(path, u, leaf_shift=shift)
            out[j][k, 0] = et.total_length()
            out[j][k, 1] = et.leaf_depths()[0]
    return out


def _line_breaking_summaries(theta, leaves: int, replicates: int, seed: int):
    out = np.empty((replicates, 2))
    for k in range(replicates):
        et = line_breaking_tree(theta, leaves, RngState(seed, 500_000 + k))
        out[k, 0] = et.total_length()
        out[k, 1] = et.leaf_depths()[0]
    return out


def suite_theorem1(replicates: int = 10_000, grid: int = 2 ** 14, seed: int = 0,
                   leaves_list=(1, 2, 3)):
    """Reduced trees sampled from the scaled reflected excursion match the
    line-breaking law, for the Brownian and the reference parameters."""
    reports = []
    all_ok = True
    for name, theta in [("brownian", BROWNIAN_THETA), ("reference", REFERENCE_THETA)]:
        def build_all(s, theta=theta, name=name):
            fn = _function_tree_summaries(theta, grid, replicates, leaves_list, s)
            per = {}
            for j in leaves_list:
                lb = _line_breaking_summaries(theta, j, replicates, s)
                per[j] = (fn[j], lb)
            return per
        cache = {seed: build_all(seed)}
        for j in leaves_list:
            for col, stat in [(0, "total-length"), (1, "leaf-depth")]:
                def check(s, j=j, col=col, stat=stat, name=name):
                    if s not in cache:
                        cache[s] = build_all(s)
                    fn, lb = cache[s][j]
                    return ks_two_sample(fn[:, col], lb[:, col],
                                         suite=f"theorem1/{name}-J{j}-{stat}", seed=s)
                reps = _with_retry(check, seed)
                reports.extend(reps)
                all_ok &= reps[-1].passed
    return reports, all_ok


# ---------------------------------------------------------------------------
# 4. spanning reduction vs line breaking
# ---------------------------------------------------------------------------

def _spanning_summaries(p: PSeq, leaves: int, replicates: int, seed: int):
    sigma = p.sigma
    out = np.empty((replicates, 2))
    rejects = 0
    for k in range(replicates):
        attempt = 0
        while True:
            rng = RngState(seed, (k << 6) + attempt)
            try:
                x = sample_positions(p.n, rng)
                tr = breadth_tree(p, x)
                et = spanning_subtree(tr, p, leaves, rng)
                break
            except (DuplicateSampleError, DegenerateError, TieError):
                rejects += 1
                attempt += 1
        st = et.scale_lengths(sigma)
        out[k, 0] = st.total_length()
        out[k, 1] = st.leaf_depths()[0]
    return out, rejects


def suite_theorem2(n: int = 100_000, replicates: int = 4000, leaves: int = 2,
                   seed: int = 0, marginal_n: int = 10_000,
                   marginal_reps: int = 2000, marginal_grid: int = 2 ** 12):
    """Scaled spanning reductions of large discrete trees match the
    line-breaking law; the width profile read at a fixed mass quantile
    matches the excursion marginal."""
    p = approximating_pseq(REFERENCE_THETA, n)
    reports = []
    all_ok = True

    def build_sides(s):
        sp, rejects = _spanning_summaries(p, leaves, replicates, s)
        lb = _line_breaking_summaries(REFERENCE_THETA, leaves, replicates, s)
        return sp, lb, rejects

    cache = {}
    for col, stat in [(0, "total-length"), (1, "leaf-depth")]:
        def check(s, col=col, stat=stat):
            if s not in cache:
                cache[s] = build_sides(s)
            sp, lb, rejects = cache[s]
            rep = ks_two_sample(sp[:, col], lb[:, col],
                                suite=f"theorem2/spanning-{stat}", seed=s)
            rep.extra["resample_count"] = rejects
            return rep
        reps = _with_retry(check, seed)
        reports.extend(reps)
        all_ok &= reps[-1].passed

    def marginal_check(s):
        u_star = 0.5
        pm = approximating_pseq(REFERENCE_THETA, marginal_n)
        widths = np.empty(marginal_reps)
        for k in range(marginal_reps):
            rng = RngState(s, 900_000 + k)
            tr = breadth_tree(pm, sample_positions(pm.n, rng))
            w_fn, wbar_fn = width_profile(tr, pm)
            widths[k] = width_at_quantile(w_fn, wbar_fn, u_star) / pm.sigma
        marginals = np.empty(marginal_reps)
        eps = MONITORING_BETA / np.sqrt(marginal_grid)  # grid-minimum re-base offset
        for k in range(marginal_reps):
            exc = sample_excursion(REFERENCE_THETA, marginal_grid, RngState(s, 990_000 + k))
            marginals[k] = exc.value(u_star) + eps
        return ks_two_sample(widths, marginals, suite="theorem2/width-marginal", seed=s)

    reps = _with_retry(marginal_check, seed)
    reports.extend(reps)
    all_ok &= reps[-1].passed
    return reports, all_ok


# ---------------------------------------------------------------------------
# 5. local-time identity
# ---------------------------------------------------------------------------

def suite_jeulin(grid: int = 2 ** 14, replicates: int = 5000, seed: int = 0,
                 u: float = 0.5):
    """Occupation-density identity at a fixed point plus the independent
    mean cross-check of the total reciprocal integral against twice the
    maximum."""
    reports = []
    reps = _with_retry(lambda s: jeulin_check(grid, replicates, RngState(s), u=u), seed)
    reports.extend(reps)
    all_ok = reps[-1].passed

    def mean_check(s):
        eps = MONITORING_BETA / np.sqrt(grid)
        totals = np.empty(replicates)
        maxes = np.empty(replicates)
        for k in range(replicates):
            e1 = sample_excursion(BROWNIAN_THETA, grid, RngState(s, 300_000 + k))
            totals[k] = excursion_time_change(e1, shift=eps).total
            e2 = sample_excursion(BROWNIAN_THETA, grid, RngState(s, 600_000 + k))
            maxes[k] = 2.0 * (e2.max_value() + eps)
        diff = abs(totals.mean() - maxes.mean())
        se = float(np.sqrt(totals.var(ddof=1) / replicates + maxes.var(ddof=1) / replicates))
        ok = diff <= 3.0 * se
        return TestReport(suite="jeulin/height-mean", statistic=diff / se if se else 0.0,
                          p_value=1.0 if ok else 0.0, passed=ok,
                          n_samples=replicates, seed=s,
                          extra={"mean_integral": totals.mean(), "mean_2max": maxes.mean(),
                                 "combined_se": se})

    reps = _with_retry(mean_check, seed)
    reports.extend(reps)
    all_ok &= reps[-1].passed
    return reports, all_ok


# ---------------------------------------------------------------------------
# 6. exploration-gap trend
# ---------------------------------------------------------------------------

def suite_pkey(ns=(1000, 10_000, 100_000), reps: int = 200, seed: int = 0):
    """Median uniform gap between scaled height and corrected excursion
    decreases strictly along the n ladder."""
    medians = []
    for i, n in enumerate(ns):
        p = approximating_pseq(REFERENCE_THETA, n)
        gaps = [exploration_gap(p, RngState(seed, (i << 20) + k)) for k in range(reps)]
        medians.append(float(np.median(gaps)))
    ok = all(medians[i + 1] < medians[i] for i in range(len(medians) - 1))
    rep = TestReport(suite="pkey/median-trend",
                     statistic=max(medians[i + 1] / medians[i] for i in range(len(medians) - 1)),
                     p_value=1.0 if ok else 0.0, passed=ok, n_samples=reps, seed=seed,
                     extra={"ns": list(ns), "medians": medians})
    return [rep], ok


# ---------------------------------------------------------------------------
# 7. truncation coupling
# ---------------------------------------------------------------------------

def suite_unifconv(reps: int = 100, grid: int = 2 ** 12, seed: int = 0,
                   tol: float = IDENTITY_TOL):
    """Per-realization atom-tail bound and monotonicity of the coupled
    truncated reflections."""
    theta = REFERENCE_THETA
    atoms = theta.atoms
    tails = {k: sum(atoms[k:]) for k in range(1, len(atoms) + 1)}
    worst_excess = -np.inf
    mono_fail = 0
    for r in range(reps):
        rng = RngState(seed, r)
        bridge = sample_brownian_bridge(grid, rng)
        us = [float(rng.gen.uniform()) for _ in atoms]
        dists = []
        for keep in range(1, len(atoms) + 1):
            y_trunc, y_full = truncated_coupling(theta, keep, bridge, us)
            d = sup_distance(y_trunc, y_full)
            worst_excess = max(worst_excess, d - tails[keep])
            dists.append(d)
        if any(dists[i + 1] > dists[i] + tol for i in range(len(dists) - 1)):
            mono_fail += 1
    ok = worst_excess <= tol and mono_fail == 0
    rep = TestReport(suite="unifconv/coupling", statistic=float(worst_excess),
                     p_value=1.0 if ok else 0.0, passed=ok, n_samples=reps,
                     seed=seed, extra={"monotonicity_failures": mono_fail, "tol": tol})
    return [rep], ok


# ---------------------------------------------------------------------------
# 8. repeat-time identity
# ---------------------------------------------------------------------------

def _height_of(tree, v: int) -> int:
    h = 0
    w = v
    while tree.parent[w] != -1:
        w = int(tree.parent[w])
        h += 1
    return h


def suite_repeat_time(n: int = 50, replicates: int = 100_000, seed: int = 0):
    """First-repeat index minus two matches the height of a drawn vertex."""
    p = uniform_pseq(n)

    def check(s):
        rng_a = RngState(s, 1)
        side_a = np.array([repeat_time_sample(p, rng_a)[0] - 2 for _ in range(replicates)])
        side_b = np.empty(replicates, dtype=np.int64)
        for k in range(replicates):
            rng = RngState(s, 100 + k)
            tr = breadth_tree(p, sample_positions(n, rng))
            v = int(p.draw(rng))
            side_b[k] = _height_of(tr, v)
        return ks_two_sample(side_a, side_b, suite="repeat-time", seed=s)

    reps = _with_retry(check, seed)
    return reps, reps[-1].passed


# ---------------------------------------------------------------------------
# 9. reflected-excursion oracle
# ---------------------------------------------------------------------------

def suite_y_oracle(reps: int = 100, grid: int = 2 ** 12, seed: int = 0,
                   grid_points: int = 100, tol: float = IDENTITY_TOL):
    """Reflected excursion agrees with the range-measure representation."""
    from .reflect import infimum_range_measure, reflected_excursion

    worst = 0.0
    for r in range(reps):
        theta = BROWNIAN_THETA if r % 2 == 0 else REFERENCE_THETA
        rng = RngState(seed, r)
        exc = sample_excursion(theta, grid, rng)
        y = reflected_excursion(exc)
        ss = (np.arange(grid_points) + 0.5) / grid_points
        for s in ss:
            worst = max(worst, abs(y.value(s) - infimum_range_measure(exc, float(s))))
    ok = worst <= tol
    rep = TestReport(suite="y-oracle", statistic=worst, p_value=1.0 if ok else 0.0,
                     passed=ok, n_samples=reps * grid_points, seed=seed,
                     extra={"tol": tol})
    return [rep], ok


SUITES = {
    "identities": suite_identities,
    "btree-law": suite_tree_law,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "jeulin": suite_jeulin,
    "pkey": suite_pkey,
    "unifconv": suite_unifconv,
    "repeat-time": suite_repeat_time,
    "y-oracle": suite_y_oracle,
}
