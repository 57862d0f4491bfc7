#include "doctest.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "prbm/ensemble.hpp"
#include "prbm/spectral.hpp"

using namespace prbm;

TEST_CASE("Philox known-answer vectors")
{
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(RngStream::philox({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(RngStream::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(RngStream::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct")
{
    RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_c |= x != c();
        differ_d |= x != d();
    }
    CHECK(differ_c);
    CHECK(differ_d);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("PRBM samples are Hermitian and deterministic")
{
    const auto p = build_power_law_profile(1.5, 4, 32);
    RngStream r1(7, 0), r2(7, 0);
    const auto h1 = sample_prbm(p, r1);
    const auto h2 = sample_prbm(p, r2);
    CHECK((h1.matrix - h1.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h1.matrix - h2.matrix).cwiseAbs().maxCoeff() == 0.0);
    for (int x = 0; x < 32; ++x)
        CHECK(h1.matrix(x, x).imag() == 0.0);

    // a sample drawn on another thread is bit-identical
    HermitianSample h3;
    std::thread th([&] {
        RngStream r3(7, 0);
        h3 = sample_prbm(p, r3);
    });
    th.join();
    CHECK((h1.matrix - h3.matrix).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

struct Moments {
    double mean_re = 0, mean_im = 0, abs2 = 0, abs4 = 0;
    cplx pseudo = 0;
    int n = 0;
    void add(cplx h)
    {
        mean_re += h.real();
        mean_im += h.imag();
        abs2 += std::norm(h);
        abs4 += std::norm(h) * std::norm(h);
        pseudo += h * h;
        ++n;
    }
    double var_abs2() const { return abs4 / n - (abs2 / n) * (abs2 / n); }
};

} // namespace

TEST_CASE("PRBM entry moments at 5 sigma")
{
    const auto p = build_power_law_profile(1.0, 2, 16);
    const int reps = 10000;
    Moments off, diag;
    for (int i = 0; i < reps; ++i) {
        RngStream rng(11, i);
        const auto h = sample_prbm(p, rng);
        off.add(h.matrix(2, 5));
        diag.add(h.matrix(3, 3));
    }
    const double s_off = p(2, 5), s_diag = p(3, 3);
    CHECK(std::abs(off.abs2 / reps - s_off) <= 5 * std::sqrt(off.var_abs2() / reps));
    CHECK(std::abs(diag.abs2 / reps - s_diag) <= 5 * std::sqrt(diag.var_abs2() / reps));
    // mean zero
    CHECK(std::abs(off.mean_re / reps) <= 5 * std::sqrt(s_off / 2 / reps));
    CHECK(std::abs(off.mean_im / reps) <= 5 * std::sqrt(s_off / 2 / reps));
    CHECK(std::abs(diag.mean_re / reps) <= 5 * std::sqrt(s_diag / reps));
    // pseudo-variance E h^2 = 0 off the diagonal; each part has sd about S/sqrt(2)
    CHECK(std::abs(off.pseudo.real() / reps) <= 5 * s_off / std::sqrt(2.0 * reps));
    CHECK(std::abs(off.pseudo.imag() / reps) <= 5 * s_off / std::sqrt(2.0 * reps));
}

TEST_CASE("Brownian increments")
{
    const auto p = build_power_law_profile(2.0, 2, 12);
    RngStream rng(5, 0);
    CHECK(sample_mbm_increment(p, 0.0, rng).matrix.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(sample_mbm_increment(p, -0.1, rng), InvalidArgument);

    const int reps = 10000;
    const double dt1 = 0.3, dt2 = 0.45;
    Moments one, sum;
    for (int i = 0; i < reps; ++i) {
        RngStream r(9, i);
        one.add(sample_mbm_increment(p, dt1, r).matrix(1, 2));
        const Eigen::MatrixXcd a = sample_mbm_increment(p, dt1, r).matrix;
        const Eigen::MatrixXcd b = sample_mbm_increment(p, dt2, r).matrix;
        sum.add((a + b)(1, 2));
    }
    CHECK(std::abs(one.abs2 / reps - dt1 * p(1, 2)) <= 5 * std::sqrt(one.var_abs2() / reps));
    CHECK(std::abs(sum.abs2 / reps - (dt1 + dt2) * p(1, 2)) <= 5 * std::sqrt(sum.var_abs2() / reps));
}

TEST_CASE("disjoint increments are uncorrelated")
{
    const auto p = build_power_law_profile(2.0, 2, 8);
    const int reps = 10000;
    double cross = 0, a2 = 0, b2 = 0;
    for (int i = 0; i < reps; ++i) {
        RngStream r(21, i);
        const cplx a = sample_mbm_increment(p, 0.5, r).matrix(0, 1);
        const cplx b = sample_mbm_increment(p, 0.5, r).matrix(0, 1);
        cross += (a * std::conj(b)).real();
        a2 += std::norm(a);
        b2 += std::norm(b);
    }
    const double sd = std::sqrt(a2 / reps * b2 / reps / 2.0 / reps);
    CHECK(std::abs(cross / reps) <= 5 * sd);
}

TEST_CASE("GUE normalization and edge")
{
    double tr = 0, tr2 = 0;
    double edge = 0;
    const int reps = 50, N = 512;
    for (int i = 0; i < reps; ++i) {
        RngStream r(3, i);
        const auto g = sample_gue(N, r);
        CHECK((g.matrix - g.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        const double t = (g.matrix * g.matrix).trace().real() / N;
        tr += t;
        tr2 += t * t;
        const auto ev = eigenvalues_only(g.matrix);
        edge = std::max({edge, std::abs(ev[0]), std::abs(ev[N - 1])});
    }
    const double mean = tr / reps, sd = std::sqrt((tr2 / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 1.0) <= 3 * sd + 1e-12);
    CHECK(edge <= 2.2);
}

TEST_CASE("binary dump round trip")
{
    const auto p = build_power_law_profile(1.0, 2, 6);
    RngStream r(1, 1);
    const auto h = sample_prbm(p, r);
    std::stringstream ss;
    write_binary(h, ss);
    CHECK(ss.str().size() == 6 * 6 * 8);
    const auto back = read_binary(ss, 6);
    CHECK((back - h.matrix).cwiseAbs().maxCoeff() < 1e-6);
    // first stored float is Re H_00, little-endian
    const std::string raw = ss.str();
    float f;
    std::memcpy(&f, raw.data(), 4);
    CHECK(f == static_cast<float>(h.matrix(0, 0).real()));
}
