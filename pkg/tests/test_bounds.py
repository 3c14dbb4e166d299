import math

import numpy as np
import pytest

from mjpbounds import (
    BernsteinParams,
    analyze,
    bernstein_conjugate,
    bound_bernstein_general,
    bound_curve,
    bound_fsobolev,
    bound_general,
    bound_perturbation,
    bound_poincare,
    bound_via_alpha,
    check_f_sobolev,
    donsker_varadhan_info,
    empirical_tail,
    evaluate_family,
    fenchel_conjugate,
    iid_sum_bound,
    lambda0,
    log_sobolev,
    lower_tail,
    make_model,
    probability_vector,
    stationary_model,
    time_averages,
    two_sided,
    verify_info_representation,
)
from mjpbounds.bounds import (
    FSobolevFunction,
    general_bernstein_eigen_bound,
    perturbation_branch_threshold,
)
from mjpbounds.errors import (
    FSobolevNotVerifiedError,
    InfeasibleSliceError,
    ValidationError,
)

from conftest import random_irreducible_model


class TestBoundGeneral:
    def test_trivial_at_zero_for_nonstationary_start(self, two_state):
        p = bound_general(two_state, 5.0, 0.0)
        assert p.bound == 1.0
        assert p.prefactor > 1.0

    def test_exactly_one_for_stationary_start_at_zero(self, two_state):
        m = stationary_model(two_state)
        p = bound_general(m, 5.0, 0.0)
        assert p.prefactor == pytest.approx(1.0, abs=1e-12)
        assert p.bound == pytest.approx(1.0, abs=1e-10)

    def test_zero_beyond_max_f(self, two_state):
        p = bound_general(two_state, 5.0, 1.5)
        assert math.isinf(p.rate)
        assert p.bound == 0.0


class TestBoundPerturbation:
    def test_zero_threshold_rate_zero_branch_a(self, two_state):
        p = bound_perturbation(two_state, 1.0, 0.0)
        assert p.rate == 0.0
        assert p.branch == "a"

    def test_branch_a_is_subgamma_conjugate(self, three_cycle):
        a = analyze(three_cycle)
        bp = BernsteinParams(v=a.sigma_hat2, c=2.0 * a.f_sup / a.gap)
        for u in (0.05, 0.2, 0.5):
            p = bound_perturbation(three_cycle, 1.0, u, analysis=a)
            assert p.branch == "a"
            assert p.rate == pytest.approx(bernstein_conjugate(bp, u), abs=1e-12)

    def test_continuity_at_branch_point(self, two_state, three_cycle):
        for m in (two_state, three_cycle):
            a = analyze(m)
            u_star = perturbation_branch_threshold(a)
            lo = bound_perturbation(m, 1.0, u_star * (1 - 1e-11), analysis=a)
            hi = bound_perturbation(m, 1.0, u_star * (1 + 1e-11), analysis=a)
            assert {lo.branch, hi.branch} == {"a", "b"}
            assert abs(lo.rate - hi.rate) <= 1e-9


class TestBoundPoincare:
    def test_zero_threshold(self, two_state):
        assert bound_poincare(two_state, 1.0, 0.0).rate == 0.0

    def test_rate_matches_golden_section_oracle(self, three_dense):
        a = analyze(three_dense)
        c = a.f_sup / a.gap
        for u in (0.1, 0.4, 0.8):
            p = bound_poincare(three_dense, 1.0, u, analysis=a)
            res = fenchel_conjugate(
                lambda r: r * r * a.sigma_tilde2 / (2.0 * (1.0 - r * c)),
                u,
                r_max=1.0 / c,
                tol=1e-12,
            )
            assert p.rate == pytest.approx(res.value, abs=1e-9)


class TestBoundBernsteinGeneral:
    def test_zero_threshold(self, two_state):
        assert bound_bernstein_general(two_state, 1.0, 0.0).rate == 0.0

    def test_sharpest_closed_form(self, two_state, three_cycle, three_dense):
        for m in (two_state, three_cycle, three_dense):
            a = analyze(m)
            u_star = perturbation_branch_threshold(a)
            fmax = m.f.values.max()
            for u in np.linspace(0.0, min(u_star, fmax), 12):
                bg = bound_bernstein_general(m, 1.0, float(u), analysis=a).rate
                pert = bound_perturbation(m, 1.0, float(u), analysis=a)
                poin = bound_poincare(m, 1.0, float(u), analysis=a).rate
                if pert.branch == "a":
                    assert bg >= pert.rate - 1e-12
                assert bg >= poin - 1e-12

    def test_eigenvalue_majorant_on_tilts(self, three_dense):
        a = analyze(three_dense)
        r_top = 0.99 * a.gap / a.fplus_sup
        for r in np.linspace(0.0, r_top, 25):
            lam = lambda0(a.sd, three_dense.f, three_dense.pi, float(r))
            assert lam <= general_bernstein_eigen_bound(a, float(r)) + 1e-10

    def test_dominated_by_general_rate(self, two_state):
        from mjpbounds import lambda0_star

        a = analyze(two_state)
        fmax = two_state.f.values.max()
        for u in np.linspace(0.0, 0.95 * fmax, 10):
            bg = bound_bernstein_general(two_state, 1.0, float(u), analysis=a).rate
            gen = lambda0_star(a.sd, two_state.f, two_state.pi, float(u)).value
            assert gen >= bg - 1e-12


class TestFSobolev:
    def test_small_log_constant_holds_on_sweep(self, two_state):
        verdict = check_f_sobolev(two_state, log_sobolev(0.5))
        assert verdict.status == "holds"

    def test_huge_constant_violated_with_witness(self, two_state):
        F = log_sobolev(500.0)
        verdict = check_f_sobolev(two_state, F)
        assert verdict.status == "violated"
        g = verdict.witness
        w = two_state.pi.weights
        # the witness really violates the inequality
        lhs = float(w @ (g * g * F(g * g)))
        rhs = -float(w @ (g * (two_state.q.rates @ g)))
        assert lhs > rhs

    def test_halving_a_passing_function_still_passes(self, two_state):
        assert check_f_sobolev(two_state, log_sobolev(0.5)).status == "holds"
        assert check_f_sobolev(two_state, log_sobolev(0.25)).status == "holds"

    def test_three_state_search_inconclusive_for_modest_constant(self, three_cycle):
        verdict = check_f_sobolev(three_cycle, log_sobolev(0.2), n_restarts=8)
        assert verdict.status in ("inconclusive", "holds")
        assert verdict.max_violation <= 1e-8

    def test_unverified_rejected_without_override(self, two_state):
        F = log_sobolev(500.0)
        with pytest.raises(FSobolevNotVerifiedError):
            bound_fsobolev(two_state, 1.0, 0.3, F)

    def test_log_case_reduces_to_static_cramer(self, two_state):
        from mjpbounds import cramer_transform_static

        c = 0.5
        F = log_sobolev(c)
        verdict = check_f_sobolev(two_state, F)
        for u in (0.1, 0.3, 0.6):
            p = bound_fsobolev(two_state, 1.0, u, F, verdict=verdict)
            target = c * cramer_transform_static(two_state.pi, two_state.f, u)
            assert p.rate == pytest.approx(target, abs=1e-8)

    def test_zero_threshold_rate_zero(self, two_state):
        F = log_sobolev(0.5)
        p = bound_fsobolev(two_state, 1.0, 0.0, F, assume=True)
        assert p.rate == pytest.approx(0.0, abs=1e-12)

    def test_finite_zero_limit_caps_tilt_domain(self, two_state):
        # F(x) = 1 - 1/sqrt(x): increasing, concave, F(1) = 0, F(0+) = -inf
        # is already covered by log; use F(x) = (x-1)/(x+1) with finite slope
        # instead: F(0) = -1, so the cap F(0)/min f is finite
        F = FSobolevFunction(
            fn=lambda x: (np.asarray(x, dtype=float) - 1.0)
            / (np.asarray(x, dtype=float) + 1.0),
            inverse=lambda y: (1.0 + np.asarray(y, dtype=float))
            / (1.0 - np.asarray(y, dtype=float)),
            zero_limit=-1.0,
            name="mobius",
        )
        p = bound_fsobolev(two_state, 1.0, 0.2, F, assume=True)
        f_min = float(two_state.f.values.min())
        assert p.diagnostics["r_cap"] == pytest.approx(-1.0 / f_min)
        assert p.rate >= 0.0


class TestDonskerVaradhan:
    def test_stationary_point_zero(self, three_dense):
        assert donsker_varadhan_info(
            three_dense.q, three_dense.pi, three_dense.pi
        ) == pytest.approx(0.0, abs=1e-14)

    def test_point_mass_gives_exit_rate(self, three_dense):
        for x in range(3):
            w = np.zeros(3)
            w[x] = 1.0
            val = donsker_varadhan_info(
                three_dense.q, three_dense.pi, probability_vector(w)
            )
            assert val == pytest.approx(three_dense.q.exit_rates[x], abs=1e-12)

    def test_nonnegative_on_random_measures(self, three_cycle):
        rng = np.random.default_rng(10)
        for _ in range(500):
            beta = probability_vector(rng.dirichlet(np.ones(3)))
            assert donsker_varadhan_info(three_cycle.q, three_cycle.pi, beta) >= 0.0

    def test_zero_only_at_pi(self, three_dense):
        rng = np.random.default_rng(12)
        for _ in range(100):
            w = rng.dirichlet(np.ones(3))
            if np.max(np.abs(w - three_dense.pi.weights)) < 1e-3:
                continue
            val = donsker_varadhan_info(
                three_dense.q, three_dense.pi, probability_vector(w)
            )
            assert val > 1e-10


class TestInfoRepresentation:
    def test_zero_threshold(self, three_dense):
        rep = verify_info_representation(three_dense, 0.0)
        assert rep.info_infimum == pytest.approx(0.0, abs=1e-8)
        assert rep.gap <= 1e-6

    def test_two_state_unique_slice_point(self, two_state):
        rep = verify_info_representation(two_state, 0.5)
        # slice equation: beta0 - 2 beta1 = 0.5 with beta0 + beta1 = 1
        np.testing.assert_allclose(rep.argmin_beta, [5 / 6, 1 / 6], atol=1e-12)
        assert rep.gap <= 1e-6

    def test_three_state_grid_gap_small_and_shrinking(self, three_dense):
        gaps = [
            verify_info_representation(three_dense, 0.4, grid_density=g).gap
            for g in (31, 301, 3001)
        ]
        assert gaps[-1] <= 1e-4
        assert gaps[2] <= gaps[0] + 1e-12

    def test_infeasible_slice(self, two_state):
        with pytest.raises(InfeasibleSliceError):
            verify_info_representation(two_state, 1.4)


class TestBoundViaAlpha:
    def test_zero_rate_gives_prefactor(self, two_state):
        p = bound_via_alpha(two_state, 3.0, 0.2, lambda u: 0.0)
        assert p.bound == min(1.0, p.prefactor)

    def test_matches_bernstein_general_formula(self, three_cycle):
        a = analyze(three_cycle)
        bp = BernsteinParams(v=a.sigma_hat2, c=a.fplus_sup / a.gap)
        alpha = lambda u: bernstein_conjugate(bp, u)
        for u in (0.1, 0.3):
            via = bound_via_alpha(three_cycle, 2.0, u, alpha, analysis=a)
            direct = bound_bernstein_general(three_cycle, 2.0, u, analysis=a)
            assert via.bound == pytest.approx(direct.bound, abs=1e-14)

    def test_condition_violation_warns_on_small_models(self, two_state):
        with pytest.warns(RuntimeWarning):
            bound_via_alpha(two_state, 1.0, 0.3, lambda u: 100.0, verify=True)


class TestLowerTailAndTwoSided:
    def test_symmetric_model_mirror_rates(self):
        # relabeling the two states maps f to -f and preserves q and pi
        m = make_model([[-1, 1], [1, -1]], [1.0, -1.0], nu=[0.5, 0.5])
        up = evaluate_family(m, 2.0, 0.4, "general")
        low = lower_tail(m, 2.0, -0.4, "general")
        assert low.rate == pytest.approx(up.rate, abs=1e-9)

    def test_zero_threshold_trivial(self, two_state):
        assert lower_tail(two_state, 2.0, 0.0, "poincare").bound == 1.0

    def test_two_sided_is_sum(self, two_state):
        up = evaluate_family(two_state, 4.0, 0.5, "bernstein_general")
        low = lower_tail(two_state, 4.0, -0.5, "bernstein_general")
        ts = two_sided(two_state, 4.0, 0.5, "bernstein_general")
        assert ts == pytest.approx(min(1.0, up.bound + low.bound))

    def test_positive_threshold_rejected(self, two_state):
        with pytest.raises(ValidationError):
            lower_tail(two_state, 1.0, 0.2, "general")


class TestIidSumBound:
    def test_single_replica_unchanged(self):
        assert iid_sum_bound(lambda u: 0.25, 1, 0.3, t=2.0) == pytest.approx(
            math.exp(-0.5)
        )

    def test_arithmetic_example(self):
        assert iid_sum_bound(lambda u: 0.1, 2, 0.3, t=1.0) == pytest.approx(
            math.exp(-0.2)
        )

    def test_monte_carlo_domination_with_replicas(self, two_state):
        # average of 5 independent time averages vs the replicated bound
        n_rep, t, n_groups = 5, 3.0, 20000
        a = analyze(two_state)
        avg = time_averages(two_state, t, n_rep * n_groups, seed=55)
        grouped = avg.reshape(n_groups, n_rep).mean(axis=1)
        u = 0.25
        p_hat = float(np.mean(grouped >= u))
        se = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / n_groups) / n_groups)
        rate = bound_bernstein_general(two_state, t, u, analysis=a).rate
        bound = iid_sum_bound(
            lambda _: rate, n_rep, u, t=t, prefactor=a.prefactor
        )
        assert p_hat <= bound + 3.0 * se


class TestCurveAndDomination:
    def test_curve_shape_and_diagnostics(self, three_cycle):
        grid = np.linspace(0.0, 0.8, 9)
        curve = bound_curve(three_cycle, 5.0, grid, "perturbation")
        assert len(curve.points) == 9
        assert {"sigma_hat2", "gap", "prefactor"} <= set(curve.diagnostics)
        for p in curve.points:
            assert 0.0 <= p.bound <= 1.0
            assert p.rate >= 0.0

    def test_all_families_dominate_monte_carlo(self, two_state, three_cycle):
        for m in (two_state, three_cycle):
            a = analyze(m)
            fmax = m.f.values.max()
            F = log_sobolev(0.2)
            verdict = check_f_sobolev(m, F)
            kwargs = {
                "F": F,
                "fsobolev_verdict": verdict,
                "assume_fsobolev": verdict.status != "violated",
            }
            for t in (1.0, 5.0):
                avg = time_averages(m, t, 30000, seed=17)
                for u in (0.1 * fmax, 0.4 * fmax):
                    est = empirical_tail(m, t, u, 30000, seed=17, averages=avg)
                    for fam in (
                        "general",
                        "perturbation",
                        "poincare",
                        "bernstein_general",
                        "fsobolev",
                    ):
                        kw = kwargs if fam == "fsobolev" else {}
                        p = evaluate_family(m, t, u, fam, analysis=a, **kw)
                        assert est.p_hat <= p.bound + 3.0 * est.ci_half_width, (
                            fam,
                            u,
                            t,
                        )

    def test_random_models_bound_chain(self):
        rng = np.random.default_rng(100)
        for _ in range(6):
            m = random_irreducible_model(rng)
            a = analyze(m)
            r_top = 0.99 * a.gap / a.fplus_sup
            for r in np.linspace(0.0, r_top, 15):
                lam = lambda0(a.sd, m.f, m.pi, float(r))
                assert lam <= general_bernstein_eigen_bound(a, float(r)) + 1e-10
