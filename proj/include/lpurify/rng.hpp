#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace lpurify {

namespace rng_detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace rng_detail

// Counter-based random stream: the i-th output is mix64(key + (i+1)*golden),
// i.e. SplitMix64 seeded with `key`. Streams are value types; copying a
// stream replays it. Every stream in the project derives from one root seed:
//
//   stream(root, label, index) -> key = mix64(mix64(root ^ fnv1a64(label)) + index*golden)
//   child = parent.spawn(i)    -> key = mix64(parent_key ^ ((i+1)*golden))
//
// which keeps all randomness reproducible from a single 64-bit seed.
class RngStream {
  public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    static RngStream from_root(std::uint64_t root, std::string_view label,
                               std::uint64_t index = 0) {
        using namespace rng_detail;
        return RngStream(mix64(mix64(root ^ fnv1a64(label)) + index * kGolden));
    }

    RngStream spawn(std::uint64_t index) const {
        using namespace rng_detail;
        return RngStream(mix64(key_ ^ ((index + 1) * kGolden)));
    }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() {
        ++counter_;
        return rng_detail::mix64(key_ + counter_ * rng_detail::kGolden);
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    float uniformf() { return static_cast<float>(uniform()); }

    // Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    float normalf() { return static_cast<float>(normal()); }

    void fill_normal(std::span<float> out) {
        for (float& v : out) v = normalf();
    }

    void fill_uniform(std::span<float> out) {
        for (float& v : out) v = uniformf();
    }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace lpurify
