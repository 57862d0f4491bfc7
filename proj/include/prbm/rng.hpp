#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>

namespace prbm {

// Philox4x32-10 counter-based generator. The key is the 64-bit root seed, the upper
// half of the counter is the stream index and the lower half counts blocks, so every
// (root_seed, stream_index) pair owns an independent, schedule-free bit stream.
class RngStream {
public:
    using result_type = std::uint32_t;
    static constexpr const char* algorithm_id = "philox4x32-10";

    RngStream(std::uint64_t root_seed, std::uint64_t stream_index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    std::uint64_t root_seed() const { return root_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    // Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

private:
    std::uint64_t root_seed_;
    std::uint64_t stream_index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

// Stable 64-bit mixing of several integers into one seed (splitmix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0);

} // namespace prbm
