#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace dcsim {

// Deterministic random stream. std::mt19937_64 output is pinned by the
// standard; the distributions here are hand-rolled because the std::
// distribution objects are implementation-defined and would break
// cross-platform reproducibility of traces.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw from [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    // Inclusive integer range.
    int uniform_int(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // [0, 1) with 53 significant bits.
    double uniform_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_unit() < p; }

    // Knuth's product-of-uniforms method; fine for the small means used here.
    int poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: mean must be non-negative");
        if (mean == 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform_unit();
        } while (p > limit);
        return k - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dcsim
