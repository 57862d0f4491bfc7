#include "prbm/ensemble.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

namespace prbm {

namespace {

template <class VarianceAt>
Eigen::MatrixXcd fill_hermitian(int N, VarianceAt var, double scale, RngStream& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd H(N, N);
    for (int x = 0; x < N; ++x) {
        H(x, x) = scale * std::sqrt(var(x, x)) * gauss(rng);
        for (int y = x + 1; y < N; ++y) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            const double s = scale * std::sqrt(var(x, y) / 2.0);
            H(x, y) = cplx(s * re, s * im);
            H(y, x) = std::conj(H(x, y));
        }
    }
    return H;
}

} // namespace

HermitianSample sample_prbm(const VarianceProfile& profile, RngStream& rng)
{
    HermitianSample s;
    s.matrix = fill_hermitian(profile.size(), [&](int x, int y) { return profile(x, y); }, 1.0, rng);
    s.profile_id = profile.id();
    s.seed = rng.root_seed();
    s.stream = rng.stream_index();
    return s;
}

HermitianSample sample_mbm_increment(const VarianceProfile& profile, double dt, RngStream& rng)
{
    if (!(dt >= 0.0))
        throw InvalidArgument("sample_mbm_increment: dt must be nonnegative");
    HermitianSample s;
    s.profile_id = profile.id();
    s.seed = rng.root_seed();
    s.stream = rng.stream_index();
    if (dt == 0.0) {
        s.matrix = Eigen::MatrixXcd::Zero(profile.size(), profile.size());
        return s;
    }
    s.matrix = fill_hermitian(profile.size(), [&](int x, int y) { return profile(x, y); }, std::sqrt(dt), rng);
    return s;
}

HermitianSample sample_gue(int N, RngStream& rng)
{
    if (N < 1)
        throw InvalidArgument("sample_gue: N must be positive");
    const double v = 1.0 / N;
    HermitianSample s;
    s.matrix = fill_hermitian(N, [v](int, int) { return v; }, 1.0, rng);
    s.profile_id = "GUE_N" + std::to_string(N);
    s.seed = rng.root_seed();
    s.stream = rng.stream_index();
    return s;
}

namespace {
void put_f32(std::ostream& out, float f)
{
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    unsigned char b[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                          static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

float get_f32(std::istream& in)
{
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw InvalidArgument("read_binary: truncated input");
    const std::uint32_t u = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}
} // namespace

void write_binary(const HermitianSample& sample, std::ostream& out)
{
    const auto& H = sample.matrix;
    for (int x = 0; x < H.rows(); ++x)
        for (int y = 0; y < H.cols(); ++y) {
            put_f32(out, static_cast<float>(H(x, y).real()));
            put_f32(out, static_cast<float>(H(x, y).imag()));
        }
}

Eigen::MatrixXcd read_binary(std::istream& in, int N)
{
    Eigen::MatrixXcd H(N, N);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) {
            const float re = get_f32(in);
            const float im = get_f32(in);
            H(x, y) = cplx(re, im);
        }
    return H;
}

} // namespace prbm
