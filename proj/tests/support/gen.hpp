#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "fgts/feature_store.hpp"
#include "fgts/perturb.hpp"

namespace fgts::test {

/// Seeded value generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::size_t size(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(rng_); }
    bool coin(double p = 0.5) { return uniform() < p; }
    std::uint64_t u64() { return rng_(); }
    std::mt19937_64& engine() { return rng_; }

    TokenLayout layout(std::size_t max_cls = 2, std::size_t max_reg = 4, std::size_t max_grid = 4) {
        return {size(0, max_cls), size(0, max_reg), size(1, max_grid), size(1, max_grid)};
    }

    FeatureTensor tensor(const TokenLayout& layout, std::size_t dim, double sd = 1.0) {
        FeatureTensor t(layout, dim);
        for (auto& v : t.data) v = static_cast<float>(normal(0.0, sd));
        return t;
    }

    /// Arbitrary finite float bit patterns, including subnormals and signed zeros.
    float any_finite_float() {
        for (;;) {
            const auto bits = static_cast<std::uint32_t>(rng_());
            float f;
            std::memcpy(&f, &bits, sizeof f);
            if (std::isfinite(f)) return f;
        }
    }

    ImageBuffer image(std::size_t w, std::size_t h) {
        ImageBuffer img(w, h);
        for (auto& v : img.data) v = uniform();
        return img;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace fgts::test
