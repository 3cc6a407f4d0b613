#pragma once

#include <cstdint>

namespace sqb {

// SplitMix64: seedable, splittable 64-bit generator. Substreams derived with
// split(k) are independent of the draw order, which keeps parallel sampling
// byte-reproducible regardless of the thread schedule.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    SplitMix64 split(std::uint64_t stream) const {
        SplitMix64 probe(state_ + 0x632be59bd9b4e019ull * (stream + 1));
        return SplitMix64(probe.next());
    }

private:
    std::uint64_t state_;
};

}  // namespace sqb
