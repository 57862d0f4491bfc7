#include "doctest.h"

#include "prbm/ensemble.hpp"
#include "prbm/flow.hpp"

#include <cmath>
#include <sstream>

using namespace prbm;

TEST_CASE("renormalized spectral parameter")
{
    CHECK(std::abs(z_flow(0.0, 0.0) - cplx(0.0, 1.0)) < 1e-15);
    for (double E : {-1.5, -0.3, 0.0, 0.7, 1.9})
        CHECK(std::abs(z_flow(E, 1.0) - E) < 1e-15);
    // Im z_t = (1 - t) Im m(E) is positive and decreasing in t
    double prev = 10;
    for (int k = 0; k < 20; ++k) {
        const double t = k / 20.0;
        const double eta = z_flow(0.4, t).imag();
        CHECK(eta == doctest::Approx((1 - t) * m_sc(0.4).imag()).epsilon(1e-14));
        CHECK(eta < prev);
        prev = eta;
    }
    CHECK_THROWS_AS(z_flow(2.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(z_flow(-2.5, 0.5), InvalidArgument);
    CHECK_THROWS_AS(z_flow(0.0, 1.2), InvalidArgument);
}

TEST_CASE("m_t is invariant along the flow")
{
    double worst = 0;
    for (double E : {-1.0, 0.0, 0.5, 1.5})
        for (int k = 0; k < 20; ++k) {
            const double t = k / 20.0;
            worst = std::max(worst, std::abs(m_t(z_flow(E, t), t) - m_sc(E)));
        }
    CHECK(worst <= 1e-10);
}

TEST_CASE("flow parameters for a target z")
{
    const cplx z(0.2, 0.3);
    const auto fp = flow_params_for_target(z);
    CHECK(fp.t_final == doctest::Approx(std::norm(m_sc(z))).epsilon(1e-14));
    CHECK(fp.t_final < 1.0);
    // sqrt(t_f) m(E) = m(z)
    CHECK(std::abs(std::sqrt(fp.t_final) * m_sc(fp.E) - m_sc(z)) < 1e-12);
    CHECK(std::abs(z_flow(fp.E, fp.t_final) - std::sqrt(fp.t_final) * z) < 1e-12);

    for (cplx w : {cplx(-1.2, 0.05), cplx(0.0, 1.0), cplx(1.7, 0.01), cplx(0.3, 0.2)}) {
        const auto q = flow_params_for_target(w);
        CHECK(std::abs(z_flow(q.E, q.t_final) / std::sqrt(q.t_final) - w) < 1e-10);
    }
    CHECK_THROWS_AS(flow_params_for_target(cplx(0.1, 5e-4)), InvalidArgument);
    CHECK_NOTHROW(flow_params_for_target(cplx(0.1, kFlowEtaFloor)));
}

TEST_CASE("default checkpoints")
{
    const auto c = default_checkpoints(0.8, 4);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(0.4));
    CHECK(c[2] == doctest::Approx(0.6));
    CHECK(c[3] == doctest::Approx(0.7));
}

TEST_CASE("simulate_flow")
{
    const auto p = build_power_law_profile(2.0, 2, 8);
    const double E = 0.3;

    SUBCASE("t = 0 is the zero matrix with G = m")
    {
        RngStream rng(1, 0);
        const auto run = simulate_flow(p, E, {0.0, 0.5}, rng);
        REQUIRE(run.states.size() == 2);
        CHECK(run.states[0].H.cwiseAbs().maxCoeff() == 0.0);
        const Resolvent R = run.states[0].resolvent();
        const cplx m = m_sc(E);
        CHECK((R.G - m * Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(std::abs(-1.0 / run.states[0].z - m) < 1e-14);
    }

    SUBCASE("preconditions")
    {
        RngStream rng(1, 0);
        CHECK_THROWS_AS(simulate_flow(p, E, {0.5, 0.2}, rng), InvalidArgument);
        CHECK_THROWS_AS(simulate_flow(p, E, {0.2, 1.0}, rng), InvalidArgument);
        CHECK_THROWS_AS(simulate_flow(p, E, {-0.1}, rng), InvalidArgument);
        const auto run = simulate_flow(p, E, {0.3}, rng, false);
        CHECK_THROWS_AS((void)run.states[0].resolvent(), InvalidArgument);
    }

    SUBCASE("deterministic in the seed")
    {
        RngStream a(42, 3), b(42, 3);
        const auto ra = simulate_flow(p, E, {0.2, 0.6}, a, false);
        const auto rb = simulate_flow(p, E, {0.2, 0.6}, b, false);
        CHECK((ra.states[1].H - rb.states[1].H).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ra.seed == 42);
        CHECK(ra.stream == 3);
    }

    SUBCASE("marginal second moments match t S")
    {
        const int reps = 4000;
        const double t1 = 0.25, t2 = 0.7;
        double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
        double d = 0, dsq = 0;
        for (int i = 0; i < reps; ++i) {
            RngStream rng(77, i);
            const auto run = simulate_flow(p, E, {t1, t2}, rng, false);
            const double a = std::norm(run.states[0].H(1, 3));
            const double b = std::norm(run.states[1].H(1, 3));
            const double c = std::norm(run.states[1].H(2, 2));
            s1 += a;
            s1sq += a * a;
            s2 += b;
            s2sq += b * b;
            d += c;
            dsq += c * c;
        }
        auto check = [&](double sum, double sq, double target) {
            const double mean = sum / reps;
            const double sd = std::sqrt((sq / reps - mean * mean) / reps);
            CHECK(std::abs(mean - target) <= 5 * sd);
        };
        check(s1, s1sq, t1 * p(1, 3));
        check(s2, s2sq, t2 * p(1, 3));
        check(d, dsq, t2 * p(2, 2));
    }
}

TEST_CASE("track_observables")
{
    const auto p = build_power_law_profile(2.0, 2, 16);
    const std::vector<LoopObservable> loops = {{0, 0, Charge::Plus, Charge::Minus},
                                               {0, 3, Charge::Plus, Charge::Plus},
                                               {2, 9, Charge::Minus, Charge::Plus}};
    const std::vector<TObservable> tvars = {{0, 0, 0, Charge::Plus, Charge::Minus},
                                            {1, 4, 4, Charge::Minus, Charge::Minus},
                                            {1, 4, 6, Charge::Plus, Charge::Minus}};
    RngStream rng(5, 0);
    const auto run = simulate_flow(p, 0.4, default_checkpoints(0.9, 5), rng);
    const auto rows = track_observables(p, run, loops, tvars);
    REQUIRE(rows.size() == 5 * 6);

    // residual(0) = 0 for every observable
    for (int i = 0; i < 6; ++i) {
        CHECK(rows[i].t == 0.0);
        CHECK(rows[i].residual < 1e-14);
    }
    for (const auto& r : rows) {
        CHECK(r.normalizer > 0);
        CHECK(std::isfinite(r.normalized()));
    }
    CHECK(rows[1].spec_id == "L++_0_3");
    CHECK(rows[5].spec_id == "T+-_1_4_6");

    for (const auto& st : run.states) {
        const auto w = ward_identity_residuals(st.resolvent(), p);
        CHECK(w.green <= 1e-9);
        CHECK(w.loop <= 1e-9);
        CHECK(w.tvar <= 1e-9);
    }

    std::ostringstream os;
    write_flow_csv(rows, os);
    CHECK(os.str().rfind("seed,t,spec_id,residual,normalizer\n", 0) == 0);
}

TEST_CASE("flow normalizers")
{
    const ShapeParameters sp(2.0, 16, 256);
    CHECK(flow_loop_normalizer(sp, 0.5, 3) == doctest::Approx(sp.B_t(0.5, 0) * sp.B_t(0.5, 3)));
    CHECK(flow_tvar_normalizer(sp, 0.5, 3, 5) ==
          doctest::Approx(std::sqrt(sp.B_t(0.5, 0) * sp.B_t(0.5, 3) * sp.B_t(0.5, 5))));

    const ShapeParameters low(0.5, 16, 256);
    // 1 - t = 1/32 <= W/N = 1/16 is flat
    const double t = 1 - 1.0 / 32;
    CHECK(flow_loop_normalizer(low, t, 7) == doctest::Approx(std::pow(16.0, -1.2) + std::pow(8.0, -1.75)));
    CHECK(flow_tvar_normalizer(low, t, 7, 2) == doctest::Approx(std::pow(16.0, -1.2) + std::pow(8.0, -1.5)));
    CHECK(flow_loop_normalizer(low, 0.5, 7) == doctest::Approx(std::pow(low.B_t(0.5, 0), 0.2) * low.B_t(0.5, 7)));
}

TEST_CASE("quantum diffusion along the flow at desk scale")
{
    const auto p = build_power_law_profile(2.0, 16, 256);
    const double bound = std::pow(256.0, 0.3);
    const std::vector<LoopObservable> loops = {{0, 0, Charge::Plus, Charge::Minus},
                                               {0, 20, Charge::Plus, Charge::Minus},
                                               {10, 140, Charge::Plus, Charge::Plus},
                                               {5, 5, Charge::Minus, Charge::Minus}};
    const std::vector<TObservable> tvars = {{0, 0, 0, Charge::Plus, Charge::Minus},
                                            {3, 30, 30, Charge::Plus, Charge::Minus},
                                            {3, 30, 34, Charge::Plus, Charge::Plus}};
    double worst = 0;
    for (int s = 0; s < 5; ++s) {
        RngStream rng(2024, s);
        const auto run = simulate_flow(p, 0.2, default_checkpoints(0.95, 5), rng);
        for (const auto& r : track_observables(p, run, loops, tvars))
            worst = std::max(worst, r.normalized());
    }
    MESSAGE("max normalized flow residual: " << worst);
    CHECK(worst <= bound);
}

TEST_CASE("distributional check")
{
    const auto p = build_power_law_profile(2.0, 4, 32);
    RngStream rng(9, 0);
    const auto rep = distributional_check(p, cplx(0.3, 0.2), 200, rng);
    CHECK(rep.replicas == 200);
    CHECK(rep.stats.size() == 5);
    CHECK(rep.t_final == doctest::Approx(std::norm(m_sc(cplx(0.3, 0.2)))));
    MESSAGE("max standardized difference: " << rep.max_abs_standardized());
    CHECK(rep.max_abs_standardized() <= 4.0);
    CHECK(rep.to_json().find("\"standardized_diff\"") != std::string::npos);

    RngStream again(9, 0);
    const auto rep2 = distributional_check(p, cplx(0.3, 0.2), 200, again);
    CHECK(rep2.stats[0].mean_direct == rep.stats[0].mean_direct);
    CHECK(rep2.stats[0].mean_flow == rep.stats[0].mean_flow);

    CHECK_THROWS_AS(distributional_check(p, cplx(0.3, 0.2), 50, rng), InvalidArgument);
    CHECK_THROWS_AS(distributional_check(p, cplx(0.3, 1e-4), 100, rng), InvalidArgument);
}
