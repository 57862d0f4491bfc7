#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "prbm/certify.hpp"
#include "prbm/deterministic.hpp"

using namespace prbm;

namespace {

// Dense (1 - t c S)^{-1} c S.
Eigen::MatrixXcd dense_theta(const VarianceProfile& p, double t, cplx c)
{
    const Eigen::MatrixXcd S = p.dense().cast<cplx>();
    const int N = p.size();
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(N, N) - t * c * S;
    return A.partialPivLu().solve(c * S);
}

} // namespace

TEST_CASE("m_sc values")
{
    CHECK(std::abs(m_sc(cplx(0, 0)) - cplx(0, 1)) < 1e-15);
    CHECK(std::abs(m_sc(cplx(0, 1)) - cplx(0, (std::sqrt(5.0) - 1) / 2)) < 1e-15);
    for (int k = 1; k < 100; ++k) {
        const double E = -2.0 + 4.0 * k / 100;
        const cplx m = m_sc(E);
        CHECK(std::abs(std::abs(m) - 1.0) < 1e-12);
        CHECK(m.imag() > 0);
        CHECK(std::abs(m + 1.0 / (m + E)) <= 1e-12);
    }
    // outside the support the boundary value is real and inside the unit disk
    for (double E : {2.5, -3.0}) {
        const cplx m = m_sc(E);
        CHECK(m.imag() == 0.0);
        CHECK(std::abs(m) < 1.0);
        CHECK(std::abs(m + 1.0 / (m + E)) <= 1e-12);
    }
    // random upper half plane points, including large |z| and tiny eta
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(-5, 5), l(-12, 1);
    for (int i = 0; i < 200; ++i) {
        const cplx z(u(g), std::pow(10.0, l(g)));
        const cplx m = m_sc(z);
        CHECK(m.imag() > 0);
        CHECK(std::abs(m + 1.0 / (m + z)) <= 1e-12);
    }
    CHECK_THROWS(m_sc(cplx(0.0, -0.1)));
}

TEST_CASE("m_t")
{
    const cplx z(0.3, 0.4);
    CHECK(std::abs(m_t(z, 0.0) + 1.0 / z) < 1e-15);
    CHECK(std::abs(m_t(z, 1.0) - m_sc(z)) < 1e-12);
    for (double t : {0.2, 0.5, 0.8}) {
        const cplx m = m_t(z, t);
        CHECK(std::abs(m + 1.0 / (z + t * m)) < 1e-13);
        CHECK(m.imag() > 0);
    }
    for (int k = 1; k <= 9; ++k) {
        const double t = 0.1 * k;
        const cplx zt = 0.5 + (1.0 - t) * m_sc(0.5);
        CHECK(std::abs(m_t(zt, t) - m_sc(0.5)) <= 1e-10);
    }
}

TEST_CASE("shape parameters: closed forms")
{
    SUBCASE("alpha = 2 at r = 0")
    {
        const ShapeParameters sp(2.0, 8, 1024);
        for (double eta : {1.0, 0.1, 1e-3, 1e-5}) {
            const double ell = std::min(8.0 / std::sqrt(eta), 1024.0);
            CHECK(sp.ell(eta) == doctest::Approx(ell).epsilon(1e-14));
            CHECK(sp.B(eta, 0) == doctest::Approx(1.0 / (eta * ell)).epsilon(1e-14));
        }
    }
    SUBCASE("alpha = 0.5 with ell = N and r = N")
    {
        const int W = 8, N = 256;
        const ShapeParameters sp(0.5, W, N);
        const double eta = 1e-4;   // W eta^{-2} >> N
        CHECK(sp.ell(eta) == N);
        const double expected = (1.0 / W * std::pow(double(N) / W + 1, -0.5) + 1.0 / (N * eta)) * 0.5;
        CHECK(sp.B(eta, N) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("alpha in (-1, 0]")
    {
        const int W = 4, N = 64;
        const ShapeParameters sp(-0.5, W, N);
        CHECK(sp.ell(0.3) == N);
        const double r = 5, eta = 0.2;
        const double expected = 1.0 / W * std::pow(double(N) / W, -0.5) * std::pow(r / W + 1, -0.5) + 1 / (N * eta);
        CHECK(sp.B(eta, r) == doctest::Approx(expected).epsilon(1e-14));
        CHECK_THROWS_AS(sp.Bcirc(eta, r), UnsupportedRegime);
        CHECK_THROWS_AS(sp.R(eta, r), UnsupportedRegime);
    }
    SUBCASE("zero-mode and difference parameters")
    {
        const int W = 4, N = 256;
        CHECK(ShapeParameters(0.5, W, N).Bcirc(0.1, 12) == doctest::Approx(1.0 / W * std::pow(4.0, -0.5)));
        CHECK(ShapeParameters(3.0, W, N).Bcirc(0.1, 12) == doctest::Approx(1.0 / N * std::pow(double(N) / W, 2.0)));
        CHECK(ShapeParameters(0.5, W, N).R(0.1, 12) == doctest::Approx(1.0 / W / 4.0));
        const ShapeParameters s15(1.5, W, N);
        const double ell = s15.ell(0.1), r = 12;
        CHECK(s15.R(0.1, r) == doctest::Approx(std::pow(W, -0.5) * std::pow(ell, -0.5) * std::pow(r / W + 1, -0.5) *
                                               std::pow(r / ell + 1, -0.5)));
        const ShapeParameters s3(3.0, W, N);
        CHECK(s3.R(0.1, r) == doctest::Approx(1.0 / s3.ell(0.1) / (r / s3.ell(0.1) + 1)));
        CHECK_THROWS_AS(ShapeParameters(0.0, W, N).R(0.1, 1), UnsupportedRegime);
    }
}

TEST_CASE("shape parameters: monotonicity")
{
    for (double a : {-0.5, 0.0, 0.3, 1.0, 1.5, 2.0, 4.0}) {
        const ShapeParameters sp(a, 8, 512);
        for (double eta : {1.0, 0.3, 0.01, 1e-4}) {
            CHECK(sp.ell(eta) <= 512);
            for (int r = 0; r < 512; ++r) {
                CHECK(sp.B(eta, r) > 0);
                CHECK(sp.B(eta, r + 1) <= sp.B(eta, r) * (1 + 1e-14));
            }
        }
        for (double eta : {1.0, 0.3, 0.01, 1e-4})
            CHECK(sp.ell(eta) <= sp.ell(eta / 2));
    }
}

TEST_CASE("critical scales")
{
    const auto c3 = critical_scales(ShapeParameters(3.0, 32, 1000000));
    CHECK(c3.eta_star == doctest::Approx(1.0 / 1024 + 1e-6).epsilon(1e-14));
    CHECK(c3.W_c == doctest::Approx(1000.0).epsilon(1e-14));
    const auto c05 = critical_scales(ShapeParameters(0.5, 32, 4096));
    CHECK(c05.eta_star == doctest::Approx(1.0 / 4096));
    CHECK(c05.W_c == 1.0);
    CHECK(critical_scales(ShapeParameters(1.5, 8, 4096)).W_c == doctest::Approx(16.0).epsilon(1e-13));
    CHECK(critical_scales(ShapeParameters(1.5, 32, 512)).eta_star ==
          doctest::Approx(std::pow(32.0, -3.0) + 1.0 / 512).epsilon(1e-13));
    CHECK(ShapeParameters(0.5, 16, 1024).eta_flat() == doctest::Approx(16.0 / 1024));
    CHECK(ShapeParameters(-0.5, 16, 1024).eta_flat() == doctest::Approx(std::pow(16.0 / 1024, 0.5)));
    CHECK(ShapeParameters(3.0, 16, 1024).eta_flat() == doctest::Approx(std::pow(16.0 / 1024, 2.0)));
}

TEST_CASE("theta propagator")
{
    const double E = 0.4;
    const cplx m = bulk_m(E);
    const auto p = build_power_law_profile(1.5, 4, 64);
    SUBCASE("t = 0 is c S")
    {
        const auto th = theta_propagator(p, 0.0, Charge::Plus, Charge::Plus, E);
        for (int r = 0; r < 64; ++r)
            CHECK(std::abs(th.row[r] - m * m * p.kernel()[r]) < 1e-15);
    }
    SUBCASE("row sum 1/(1-t) for opposite charges")
    {
        for (double t : {0.1, 0.5, 0.9, 0.99}) {
            const auto th = theta_propagator(p, t, Charge::Plus, Charge::Minus, E);
            CHECK(std::abs(th.row_sum() - 1.0 / (1.0 - t)) <= 1e-10 / (1 - t));
        }
    }
    SUBCASE("Fourier path equals dense solve")
    {
        for (int N : {4, 32, 128}) {
            const auto q = N == 4 ? VarianceProfile::from_kernel({0.5, 0.25, 0.0, 0.25}, 1.0, 1)
                                  : build_power_law_profile(2.0, 3, N);
            for (auto [s1, s2] : {std::pair{Charge::Plus, Charge::Minus}, std::pair{Charge::Plus, Charge::Plus},
                                  std::pair{Charge::Minus, Charge::Minus}}) {
                const double t = 0.5;
                const cplx c = charged(m, s1) * charged(m, s2);
                const auto dense = dense_theta(q, t, c);
                const auto th = theta_propagator(q, t, s1, s2, E);
                CHECK((th.dense() - dense).cwiseAbs().maxCoeff() <= 1e-9);
            }
        }
    }
    SUBCASE("toy kernel at E = 0")
    {
        const auto q = VarianceProfile::from_kernel({0.5, 0.25, 0.0, 0.25}, 1.0, 1);
        // |m(0)|^2 = 1, symbol (1, 1/2, 0, 1/2): Theta = S/(1 - S/2) entry (0,0) = mean of psi/(1-psi/2)
        const double expected = (2.0 + 2 * (0.5 / 0.75) + 0.0) / 4.0;
        CHECK(std::abs(theta_propagator(q, 0.5, Charge::Plus, Charge::Minus, 0.0)(0, 0) - expected) < 1e-14);
        CHECK(std::abs(dense_theta(q, 0.5, 1.0)(0, 0) - expected) < 1e-14);
    }
    SUBCASE("near singular")
    {
        CHECK_THROWS_AS(resolvent_from_product(p, 1.0, 1.0), NumericalError);
        CHECK_THROWS_AS(theta_propagator(p, 1.0, Charge::Plus, Charge::Minus, E), InvalidArgument);
    }
}

TEST_CASE("evolution kernels")
{
    const auto p = build_power_law_profile(1.0, 4, 64);
    const double E = -0.7;
    for (auto [s1, s2] : {std::pair{Charge::Plus, Charge::Minus}, std::pair{Charge::Minus, Charge::Minus}}) {
        const auto id = evolution_kernel(p, 0.4, 0.4, s1, s2, E);
        CHECK((id.dense() - Eigen::MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);
        const auto add = evolution_kernel(p, 0.2, 0.7, s1, s2, E);
        const auto prod = evolution_kernel_product_form(p, 0.2, 0.7, s1, s2, E);
        CHECK((add.dense() - prod.dense()).cwiseAbs().maxCoeff() < 1e-10);
    }
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.0, 0.95);
    for (int i = 0; i < 10; ++i) {
        double v[3] = {u(g), u(g), u(g)};
        std::sort(v, v + 3);
        const auto a = evolution_kernel(p, v[0], v[1], Charge::Plus, Charge::Minus, E);
        const auto b = evolution_kernel(p, v[1], v[2], Charge::Plus, Charge::Minus, E);
        const auto c = evolution_kernel(p, v[0], v[2], Charge::Plus, Charge::Minus, E);
        CHECK(((a * b).dense() - c.dense()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("certification")
{
    SUBCASE("toy kernel matches dense evaluation")
    {
        const auto q = build_power_law_profile(1.5, 1, 4);
        const auto grid = std::vector<double>{0.0, 0.5, 0.75};
        const auto xi = default_xi_grid(0.1, 8);
        const auto rep = certify_assumption_bounds(q, grid, xi);
        const ShapeParameters sp(q);
        double upper = 0, upper_xi = 0;
        for (double t : grid) {
            const auto th = dense_theta(q, t, 1.0);
            for (int x = 0; x < 4; ++x)
                for (int y = 0; y < 4; ++y)
                    upper = std::max(upper, std::abs(th(x, y)) / sp.B_t(t, periodic_distance(x, y, 4)));
            for (cplx z : xi) {
                const auto thx = dense_theta(q, t, z);
                for (int x = 0; x < 4; ++x)
                    for (int y = 0; y < 4; ++y)
                        upper_xi = std::max(upper_xi, std::abs(thx(x, y)) / sp.B(1.0, periodic_distance(x, y, 4)));
            }
        }
        CHECK(rep.constants.at("upper") == doctest::Approx(upper).epsilon(1e-10));
        CHECK(rep.constants.at("upper_xi") == doctest::Approx(upper_xi).epsilon(1e-10));
    }
    SUBCASE("t = 0: upper equals upper_xi at xi = 1")
    {
        const auto q = build_power_law_profile(2.0, 4, 64);
        const auto a = certify_assumption_bounds(q, {0.0}, {cplx(1.0, 0.0)}, {0.0});
        CHECK(a.constants.at("upper") == doctest::Approx(a.constants.at("upper_xi")).epsilon(1e-12));
    }
    SUBCASE("xi grid respects c0")
    {
        for (cplx z : default_xi_grid(0.3, 40)) {
            CHECK(std::abs(std::abs(z) - 1.0) < 1e-15);
            CHECK(std::abs(z - 1.0) >= 0.3);
        }
        const auto tg = default_t_grid(256);
        CHECK(tg.front() == 0.0);
        CHECK(tg.back() <= 1.0 - 1.0 / 256 + 1e-15);
    }
    SUBCASE("CSV columns")
    {
        const auto q = build_power_law_profile(2.0, 4, 32);
        std::ostringstream os;
        certify_assumption_bounds(q, default_t_grid(32), default_xi_grid(0.1, 24)).write_csv(os);
        CHECK(os.str().rfind("bound_id,t,fitted_C,N,stable_flag\n", 0) == 0);
    }
}
