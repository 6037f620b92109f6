#pragma once

#include <cmath>
#include <cstdint>

namespace warpkit {

// Purpose tags separating random draws that share one (global_seed, stream_id).
enum class PurposeTag : uint64_t {
    Select = 0,       // corruption choice for a mixed config
    Params = 1,       // per-corruption scalar parameter sampling
    FieldU = 2,       // horizontal displacement field
    FieldV = 3,       // vertical displacement field
    Stream = 4,       // stream function draw
    Octaves = 5,      // multi-scale noise octaves
    FogJitter = 6,    // extinction jitter
    Flare = 7,        // flare center / radius / intensity
    TpsPoints = 8,    // control point jitter and targets
};

constexpr uint64_t kPurposeTagCount = 9;

struct SeedSpec {
    uint64_t global_seed = 0;
    uint64_t stream_id = 0;
    PurposeTag purpose = PurposeTag::Select;
};

namespace detail {

// SplitMix64 finalizer.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Mixes (global_seed, stream_id, purpose_tag) into one 64-bit seed by chaining
// the SplitMix64 avalanche over the three fields. Fixed for the life of the
// UVF/KMF formats: identical inputs always produce identical draws.
inline uint64_t derive_seed(const SeedSpec& spec) {
    uint64_t h = detail::mix64(spec.global_seed);
    h = detail::mix64(h ^ spec.stream_id);
    h = detail::mix64(h ^ static_cast<uint64_t>(spec.purpose));
    return h;
}

// Deterministic SplitMix64 stream; bit-identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // standard normal via Box-Muller
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace warpkit
