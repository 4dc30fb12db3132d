#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sasc/grid.hpp"

namespace sasc {

/// Standard normal samples from mt19937_64 via the Box-Muller transform.
/// Both stages are fully specified, so a seed reproduces the same stream on
/// every platform (std::normal_distribution gives no such guarantee).
class GaussianNoise {
public:
    static constexpr const char* algorithm = "mt19937_64+box-muller";

    explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}

    double next()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// img + sigma * N(0,1) per pixel, in raster order.
    Image add_to(const Image& img, double sigma)
    {
        Image out = img;
        if (sigma == 0.0) return out;
        for (auto& v : out.pixels()) v += sigma * next();
        return out;
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sasc
