#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace rise {

/// Splittable deterministic RNG stream (splitmix64 core).
///
/// Every logical unit of work (one image, one rollout, one judge call)
/// owns its own stream derived via split(), so results do not depend on
/// scheduling or completion order. The generator is self-contained and
/// bit-stable across platforms, which the replay and byte-identity
/// guarantees rely on.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : state_(seed) {}

    /// Child stream keyed by an integer; does not advance this stream.
    RngStream split(uint64_t key) const {
        return RngStream(mix(state_ ^ mix(key + 0x9e3779b97f4a7c15ull)));
    }

    /// Child stream keyed by a label; does not advance this stream.
    RngStream split(std::string_view label) const {
        uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return split(h);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) {
        // Multiply-shift; bias is negligible for the small n used here.
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool next_bernoulli(double p) { return next_unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace rise
