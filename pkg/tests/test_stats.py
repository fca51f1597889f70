import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icrt_lab.errors import EmptySampleError, LowExpectedCountError, NegativePathError
from icrt_lab.paths import CadlagPath, continuous_path
from icrt_lab.reflect import sample_excursion
from icrt_lab.rng import RngState
from icrt_lab.stats import (
    MONITORING_BETA,
    chi_square_gof,
    excursion_time_change,
    jeulin_check,
    kolmogorov_sf,
    ks_two_sample,
    lamperti_time,
    occupation_density,
    time_changed_width,
    time_in_band,
)

from conftest import make_tent


class TestKs:
    def test_identical_samples(self):
        rep = ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert rep.statistic == 0.0 and rep.p_value == 1.0

    def test_disjoint_supports(self):
        rep = ks_two_sample([0.0], [1.0])
        assert rep.statistic == 1.0

    def test_hand_ecdf(self):
        rep = ks_two_sample([1.0, 2.0], [1.5, 2.5])
        assert rep.statistic == 0.5

    def test_empty_raises(self):
        with pytest.raises(EmptySampleError):
            ks_two_sample([], [1.0])

    def test_symmetry_and_monotone_invariance(self):
        a = RngState(1).gen.random(200)
        b = RngState(2).gen.random(300)
        d1 = ks_two_sample(a, b).statistic
        d2 = ks_two_sample(b, a).statistic
        assert d1 == d2
        d3 = ks_two_sample(np.exp(a), np.exp(b)).statistic
        assert d3 == pytest.approx(d1, abs=1e-15)

    def test_null_p_values_roughly_uniform(self):
        ps = []
        for k in range(200):
            g = RngState(3, k).gen
            ps.append(ks_two_sample(g.random(150), g.random(150)).p_value)
        ps = np.array(ps)
        assert (ps < 0.01).mean() < 0.06
        assert ps.mean() > 0.3

    def test_sf_bounds(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(10.0) < 1e-12


class TestChiSquare:
    def test_exact_fit(self):
        rep = chi_square_gof([50, 50], [0.5, 0.5])
        assert rep.statistic == 0.0 and rep.p_value == 1.0

    def test_hand_statistic(self):
        rep = chi_square_gof([60, 40], [0.5, 0.5])
        assert rep.statistic == pytest.approx(4.0)
        assert rep.extra["dof"] == 1

    def test_dof(self):
        rep = chi_square_gof([30, 30, 30, 30], [0.25] * 4)
        assert rep.extra["dof"] == 3

    def test_low_expected_raises(self):
        with pytest.raises(LowExpectedCountError):
            chi_square_gof([100, 1], [0.99, 0.01])


class TestLamperti:
    def test_constant(self):
        x = continuous_path([0.0, 1.0], [2.0, 2.0])
        assert lamperti_time(x, 0.0, 1.0) == pytest.approx(0.5)

    def test_tent_interior(self):
        assert lamperti_time(make_tent(), 0.25, 0.75) == pytest.approx(2 * np.log(2))

    def test_tent_full_diverges(self):
        assert lamperti_time(make_tent(), 0.0, 1.0) == np.inf

    def test_negative_raises(self):
        x = continuous_path([0.0, 1.0], [-1.0, -1.0])
        with pytest.raises(NegativePathError):
            lamperti_time(x, 0.0, 1.0)

    def test_additive_over_intervals(self):
        tent = make_tent()
        whole = lamperti_time(tent, 0.2, 0.8)
        parts = lamperti_time(tent, 0.2, 0.45) + lamperti_time(tent, 0.45, 0.8)
        assert whole == pytest.approx(parts, rel=1e-12)

    def test_monotone_in_integrand(self):
        tent = make_tent()
        taller = tent.scale_values(2.0)
        assert lamperti_time(taller, 0.25, 0.75) < lamperti_time(tent, 0.25, 0.75)


class TestTimeChange:
    def test_constant_width(self):
        x = continuous_path([0.0, 1.0], [3.0, 3.0])
        out = time_changed_width(x, [0.0, 0.1, 0.33, 0.4])
        assert list(out[:3]) == [3.0, 3.0, 3.0]
        assert out[3] == 0.0  # past the total integral 1/3

    def test_zero_grid_point_reports_limit(self):
        tent = make_tent()
        out = time_changed_width(tent, [0.0])
        assert out[0] == 0.0

    def test_profile_total_matches_lamperti_interior(self):
        tent = make_tent()
        prof = excursion_time_change(tent)
        interior = lamperti_time(tent, 0.25, 0.75)
        assert prof.total > interior

    def test_total_monotone_in_shift(self):
        tent = make_tent()
        p1 = excursion_time_change(tent, shift=0.01)
        p2 = excursion_time_change(tent, shift=0.1)
        assert p2.total < p1.total


class TestOccupation:
    def test_tent_interior_density_two(self):
        h = occupation_density(make_tent(), 0.01)
        # two unit-|slope| branches cross each interior band
        dens = h.density
        interior = dens[(h.edges[:-1] >= 0.0) & (h.edges[1:] <= 0.5)]
        assert np.allclose(interior, 2.0)

    def test_constant_single_bin(self):
        x = continuous_path([0.0, 1.0], [0.305, 0.305])
        h = occupation_density(x, 0.01)
        assert h.time_in_bin.max() == pytest.approx(1.0)
        assert (h.time_in_bin > 0).sum() == 1

    def test_total_time_is_one(self, brownian_theta):
        exc = sample_excursion(brownian_theta, 512, RngState(5))
        h = occupation_density(exc, 0.02)
        assert h.total_time == pytest.approx(1.0, abs=1e-9)

    def test_band_time_matches_histogram(self):
        tent = make_tent()
        t = time_in_band(tent, 0.1, 0.2)
        assert t == pytest.approx(0.2)  # 2 branches * 0.1 levels / slope 1


class TestJeulin:
    def test_report_structure_smoke(self):
        rep = jeulin_check(256, 60, RngState(6))
        assert rep.suite == "jeulin"
        assert 0.0 <= rep.p_value <= 1.0
        assert set(rep.extra) >= {"u", "grid", "band", "shift"}

    def test_width_support_matches_twice_max(self, brownian_theta):
        # sup{y : width > 0} is the total reciprocal integral; its law
        # matches twice the excursion maximum (independent samples)
        m = 2 ** 12
        eps = MONITORING_BETA / np.sqrt(m)
        n = 500
        tot = np.empty(n)
        mx = np.empty(n)
        for k in range(n):
            e1 = sample_excursion(brownian_theta, m, RngState(9, k))
            tot[k] = excursion_time_change(e1, shift=eps).total
            e2 = sample_excursion(brownian_theta, m, RngState(10, k))
            mx[k] = 2.0 * (e2.max_value() + eps)
        rep = ks_two_sample(tot, mx)
        assert rep.p_value > 0.001

    def test_grid_refinement_trend(self):
        # the discretization bias shrinks as the grid doubles
        meds = []
        for m in (2 ** 8, 2 ** 11):
            stats = [jeulin_check(m, 150, RngState(7, r)).statistic for r in range(5)]
            meds.append(np.median(stats))
        assert meds[1] <= meds[0] + 0.02


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=5000))
def test_occupation_integral_exact_property(m, seed):
    g = RngState(8, seed).gen
    t = np.sort(np.concatenate([[0.0, 1.0], g.random(m - 1)]))
    t = np.unique(t)
    v = g.random(t.size)
    x = continuous_path(t, v)
    h = occupation_density(x, 0.037)
    assert h.total_time == pytest.approx(1.0, abs=1e-9)
