#pragma once

#include <cstdint>

namespace rbmx {

// Counter-based splittable random stream. A stream is (key, counter); output
// words come from the SplitMix64 finalizer applied to key + counter * phi.
// split(id) derives an independent child stream, so samples / coordinates /
// operations can own deterministic streams regardless of scheduling.
class Stream {
public:
    Stream() : Stream(0) {}
    explicit Stream(std::uint64_t seed) : key_(mix(seed ^ 0x5bd1e995u)), ctr_(0) {}

    std::uint64_t next_u64() {
        ++ctr_;
        return mix(key_ + ctr_ * 0x9e3779b97f4a7c15ull);
    }

    // Uniform on the open interval (0,1): (k + 0.5) * 2^-53, never 0 or 1.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via inverse CDF (monotone map of one uniform).
    double next_normal();

    // Derive an independent child stream; does not advance this stream.
    Stream split(std::uint64_t id) const {
        Stream s;
        s.key_ = mix(key_ ^ mix(id + 0x94d049bb133111ebull));
        s.ctr_ = 0;
        return s;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

} // namespace rbmx
