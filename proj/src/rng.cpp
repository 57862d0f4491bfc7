#include "prbm/rng.hpp"

namespace prbm {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace

std::array<std::uint32_t, 4> RngStream::philox(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_index)
    : root_seed_(root_seed), stream_index_(stream_index)
{
}

RngStream::result_type RngStream::operator()()
{
    if (used_ == 4) {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(stream_index_),
                                         static_cast<std::uint32_t>(stream_index_ >> 32)};
        std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(root_seed_),
                                         static_cast<std::uint32_t>(root_seed_ >> 32)};
        buffer_ = philox(ctr, key);
        ++block_;
        used_ = 0;
    }
    return buffer_[used_++];
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b)
{
    return splitmix(splitmix(splitmix(root) ^ a) ^ (b * 0x632BE59BD9B4E019ull));
}

} // namespace prbm
