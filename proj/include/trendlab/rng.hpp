#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace trendlab {

// One step of the splitmix64 sequence. Used to turn (seed, stream) pairs into
// well-separated engine seeds so parallel streams never overlap.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed + stream * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

// Deterministic N(0,1) source: mt19937_64 plus an explicit Box-Muller
// transform. std::normal_distribution is not bit-identical across standard
// libraries, which would silently invalidate frozen regression values.
class GaussRng {
public:
    explicit GaussRng(std::uint64_t seed, std::uint64_t stream = 0)
        : gen_(stream_seed(seed, stream)) {}

    // uniform in (0, 1]; never returns 0, so log() below is always finite
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline std::vector<double> gauss_vector(std::size_t n, std::uint64_t seed,
                                        std::uint64_t stream = 0) {
    GaussRng rng(seed, stream);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.gauss();
    return out;
}

} // namespace trendlab
