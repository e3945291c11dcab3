#pragma once

#include <cstdint>
#include <random>

namespace supraflow {

/// Seeded uniform sampler. The mapping from engine output to [lo, hi) is
/// fixed here rather than left to std::uniform_real_distribution so that
/// seeded runs reproduce across standard libraries.
class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()(double lo, double hi) {
        const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

    int integer(int lo, int hi_inclusive) {
        const auto span = static_cast<std::uint64_t>(hi_inclusive - lo + 1);
        return lo + static_cast<int>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace supraflow
