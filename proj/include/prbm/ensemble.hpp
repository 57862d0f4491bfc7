#pragma once

#include "prbm/profile.hpp"
#include "prbm/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace prbm {

struct HermitianSample {
    Eigen::MatrixXcd matrix;   // full storage, lower triangle mirrored from the upper one
    std::string profile_id;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    int size() const { return static_cast<int>(matrix.rows()); }
};

// H_xx ~ N(0, S_xx); H_xy = (xi1 + i xi2) sqrt(S_xy / 2) for x < y; H_yx = conj(H_xy).
HermitianSample sample_prbm(const VarianceProfile& profile, RngStream& rng);

// sqrt(dt) times an independent PRBM sample.
HermitianSample sample_mbm_increment(const VarianceProfile& profile, double dt, RngStream& rng);

// GUE with E|H_xy|^2 = 1/N.
HermitianSample sample_gue(int N, RngStream& rng);

// Row-major complex64 (re, im) little-endian pairs.
void write_binary(const HermitianSample& sample, std::ostream& out);
Eigen::MatrixXcd read_binary(std::istream& in, int N);

} // namespace prbm
