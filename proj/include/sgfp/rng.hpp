#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace sgfp {

// Splitting rule used everywhere a stream is derived from a (seed, substream)
// pair: two rounds of splitmix64 over seed, mixed with the substream index.
// Adding substreams (or more seeds to an experiment) never perturbs streams
// that already exist.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random stream. All sampling is implemented on top of the raw
// mt19937_64 output so that draw sequences are identical across standard
// library implementations.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : engine_(splitmix64(seed)) {}

    static RngStream derive(uint64_t seed, uint64_t substream) {
        return RngStream(splitmix64(seed) + substream);
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform_in(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Box-Muller; consumes exactly two engine outputs per draw.
    double gaussian() {
        const uint64_t a = engine_() >> 11;
        const double u1 = static_cast<double>(a + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    // Inverse-CDF draw from a probability vector. The last entry with positive
    // mass absorbs any floating-point residual.
    int categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
        const double u = uniform();
        double cum = 0.0;
        int last_positive = -1;
        for (size_t k = 0; k < probs.size(); ++k) {
            if (probs[k] > 0.0) last_positive = static_cast<int>(k);
            cum += probs[k];
            if (u < cum) return static_cast<int>(k);
        }
        if (last_positive < 0) throw std::invalid_argument("categorical: no positive mass");
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sgfp
