#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sasc {

/// Thrown for every precondition or format violation in the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wraps an arbitrary (possibly negative) index into [0, n).
inline int wrap(int i, int n) noexcept
{
    int r = i % n;
    return r < 0 ? r + n : r;
}

struct Position {
    int row = 0;
    int col = 0;
    friend bool operator==(const Position&, const Position&) = default;
};

/// Row-major 2-D raster of real intensities (nominal range [0,1]).
class Image {
public:
    Image() = default;

    Image(int height, int width, double fill = 0.0)
        : height_(height), width_(width)
    {
        if (height < 1 || width < 1)
            throw error("image dimensions must be positive");
        data_.assign(static_cast<std::size_t>(height) * width, fill);
    }

    Image(int height, int width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data))
    {
        if (height < 1 || width < 1)
            throw error("image dimensions must be positive");
        if (data_.size() != static_cast<std::size_t>(height) * width)
            throw error("image data length does not match height*width");
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(int r, int c) noexcept { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    double operator()(int r, int c) const noexcept { return data_[static_cast<std::size_t>(r) * width_ + c]; }

    const double* row(int r) const noexcept { return data_.data() + static_cast<std::size_t>(r) * width_; }
    double* row(int r) noexcept { return data_.data() + static_cast<std::size_t>(r) * width_; }

    /// Periodic access: indices wrap around both axes.
    double at_wrapped(int r, int c) const noexcept { return (*this)(wrap(r, height_), wrap(c, width_)); }

    std::span<double> pixels() noexcept { return data_; }
    std::span<const double> pixels() const noexcept { return data_; }
    const std::vector<double>& vector() const noexcept { return data_; }

    bool same_shape(const Image& o) const noexcept { return height_ == o.height_ && width_ == o.width_; }

    bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Image& operator+=(const Image& o)
    {
        require_same_shape(o, "operator+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Image& operator-=(const Image& o)
    {
        require_same_shape(o, "operator-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Image& operator*=(double s) noexcept
    {
        for (auto& v : data_) v *= s;
        return *this;
    }

    /// this += s * o
    Image& add_scaled(const Image& o, double s)
    {
        require_same_shape(o, "add_scaled");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
        return *this;
    }

    friend Image operator+(Image a, const Image& b) { return a += b; }
    friend Image operator-(Image a, const Image& b) { return a -= b; }
    friend Image operator*(double s, Image a) { return a *= s; }

    friend bool operator==(const Image&, const Image&) = default;

    void require_same_shape(const Image& o, const char* what) const
    {
        if (!same_shape(o))
            throw error(std::string(what) + ": shape mismatch (" + std::to_string(height_) + "x" +
                        std::to_string(width_) + " vs " + std::to_string(o.height_) + "x" +
                        std::to_string(o.width_) + ")");
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Sum of elementwise products, accumulated left to right.
inline double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw error("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const Image& a, const Image& b)
{
    a.require_same_shape(b, "dot");
    return dot(a.pixels(), b.pixels());
}

inline double squared_norm(const Image& a) { return dot(a, a); }

struct Patch {
    int side = 0;
    Position anchor;
    std::vector<double> values; // side*side, row-major
};

/// Copies the side x side block whose top-left corner is `anchor`, wrapping periodically.
inline Patch extract_patch(const Image& img, Position anchor, int side)
{
    if (side < 1) throw error("extract_patch: side must be >= 1");
    if (side > std::min(img.height(), img.width()))
        throw error("extract_patch: side exceeds image dimensions");
    Patch p{side, {wrap(anchor.row, img.height()), wrap(anchor.col, img.width())}, {}};
    p.values.resize(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            p.values[static_cast<std::size_t>(r) * side + c] = img.at_wrapped(p.anchor.row + r, p.anchor.col + c);
    return p;
}

struct WeightedPatch {
    Patch patch;
    double weight = 1.0;
};

/// Weighted-average reassembly of (possibly overlapping) patches. Every pixel
/// must be covered by at least one patch with positive weight.
inline Image aggregate_patches(std::span<const WeightedPatch> patches, int height, int width)
{
    Image num(height, width);
    Image den(height, width);
    for (const auto& [p, w] : patches) {
        if (p.side < 1 || p.values.size() != static_cast<std::size_t>(p.side) * p.side)
            throw error("aggregate_patches: malformed patch");
        if (p.side > std::min(height, width)) throw error("aggregate_patches: patch larger than output");
        for (int r = 0; r < p.side; ++r) {
            const int rr = wrap(p.anchor.row + r, height);
            for (int c = 0; c < p.side; ++c) {
                const int cc = wrap(p.anchor.col + c, width);
                num(rr, cc) += w * p.values[static_cast<std::size_t>(r) * p.side + c];
                den(rr, cc) += w;
            }
        }
    }
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (den.pixels()[i] <= 0.0) throw error("aggregate_patches: uncovered pixel");
        num.pixels()[i] /= den.pixels()[i];
    }
    return num;
}

inline constexpr double psnr_cap_db = 99.0;

inline double mse(const Image& a, const Image& b)
{
    a.require_same_shape(b, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.pixels()[i] - b.pixels()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

/// Peak signal-to-noise ratio in dB, capped at 99 dB for identical images.
inline double psnr(const Image& ref, const Image& test, double peak = 1.0)
{
    if (!(peak > 0.0)) throw error("psnr: peak must be positive");
    const double m = mse(ref, test);
    if (m == 0.0) return psnr_cap_db;
    return std::min(psnr_cap_db, 10.0 * std::log10(peak * peak / m));
}

namespace detail {

inline std::vector<double> gaussian_window_1d(int size, double sigma)
{
    std::vector<double> g(static_cast<std::size_t>(size));
    const int c = size / 2;
    double s = 0.0;
    for (int i = 0; i < size; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
        s += g[static_cast<std::size_t>(i)];
    }
    for (auto& v : g) v /= s;
    return g;
}

} // namespace detail

/// Mean structural similarity over all fully-contained 11x11 windows
/// (Gaussian weights, sigma 1.5, K1 = 0.01, K2 = 0.03).
inline double ssim(const Image& ref, const Image& test, double peak = 1.0)
{
    ref.require_same_shape(test, "ssim");
    constexpr int win = 11;
    if (ref.height() < win || ref.width() < win) throw error("ssim: image smaller than the 11x11 window");
    if (!(peak > 0.0)) throw error("ssim: peak must be positive");
    if (ref == test) return 1.0;

    const auto g = detail::gaussian_window_1d(win, 1.5);
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);

    double total = 0.0;
    std::size_t count = 0;
    for (int r0 = 0; r0 + win <= ref.height(); ++r0) {
        for (int c0 = 0; c0 + win <= ref.width(); ++c0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < win; ++i) {
                for (int j = 0; j < win; ++j) {
                    const double w = g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
                    const double a = ref(r0 + i, c0 + j);
                    const double b = test(r0 + i, c0 + j);
                    mx += w * a;
                    my += w * b;
                    sxx += w * a * a;
                    syy += w * b * b;
                    sxy += w * a * b;
                }
            }
            const double vx = sxx - mx * mx;
            const double vy = syy - my * my;
            const double cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace sasc
