#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sasc/grid.hpp"
#include "sasc/io.hpp"

#ifndef SASC_TEST_DATA_DIR
#define SASC_TEST_DATA_DIR "tests/data"
#endif

namespace sasc::test {

inline Image random_image(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Image img(h, w);
    for (auto& v : img.pixels()) v = u(rng);
    return img;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

/// Five deterministic self-repetitive textures in [0.1, 0.9].
inline Image texture(int which, int n = 128)
{
    using std::numbers::pi;
    Image img(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double v = 0.0;
            switch (which) {
            case 0: // sinusoidal stripes, period 8
                v = 0.5 + 0.4 * std::sin(2 * pi * c / 8.0);
                break;
            case 1: // 8x8 checkerboard
                v = ((r / 8 + c / 8) % 2) ? 0.85 : 0.15;
                break;
            case 2: // crossed sinusoids
                v = 0.5 + 0.2 * std::sin(2 * pi * r / 16.0) + 0.2 * std::cos(2 * pi * c / 12.0);
                break;
            case 3: { // running-bond brick wall
                const int row = r / 8;
                const int cc = c + ((row % 2) ? 8 : 0);
                const bool mortar = (r % 8 == 0) || (cc % 16 == 0);
                v = mortar ? 0.85 : 0.3;
                break;
            }
            default: { // lattice of Gaussian dots, spacing 16
                const double dr = (r % 16) - 7.5;
                const double dc = (c % 16) - 7.5;
                v = 0.15 + 0.7 * std::exp(-(dr * dr + dc * dc) / (2 * 3.0 * 3.0));
                break;
            }
            }
            img(r, c) = v;
        }
    }
    return img;
}

inline Image cameraman()
{
    return io::read_image(std::string(SASC_TEST_DATA_DIR) + "/cameraman128.pgm");
}

} // namespace sasc::test
