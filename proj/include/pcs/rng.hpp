#ifndef PCS_RNG_HPP
#define PCS_RNG_HPP

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pcs {

// Counter-seeded xoshiro256++. Every consumer derives its own substream
// from (master seed, stream id), so results do not depend on thread
// count or scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { seed_state(seed); }

    Rng(std::uint64_t master_seed, std::uint64_t stream_id) {
        seed_state(mix(master_seed ^ mix(stream_id + 0x9e3779b97f4a7c15ull)));
    }

    static Rng substream(std::uint64_t master_seed, std::uint64_t stream_id) {
        return Rng(master_seed, stream_id);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1) with 53 random bits
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n); rejection sampling, no modulo bias
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    // k distinct indices from [0, n), partial Fisher-Yates over a scratch pool
    void sample_without_replacement(std::size_t n, std::size_t k,
                                    std::vector<std::size_t>& out) {
        pool_.resize(n);
        for (std::size_t i = 0; i < n; ++i) pool_[i] = i;
        out.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + below(n - i);
            std::swap(pool_[i], pool_[j]);
            out[i] = pool_[i];
        }
    }

    // standard normal via Marsaglia polar method (no cached spare, so the
    // draw sequence is a pure function of the state)
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    void seed_state(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& s : s_) {
            z += 0x9e3779b97f4a7c15ull;
            s = mix(z);
        }
    }

    std::uint64_t s_[4];
    std::vector<std::size_t> pool_;
};

}  // namespace pcs

#endif
