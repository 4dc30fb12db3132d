#pragma once

// Linear operators under periodic boundary: the analysis filter bank W_k,
// the degradation operator H and the gradient-step operator
// A = I - d*H^T H - d*eta*sum_k W_k^T W_k. Each forward map has an exact
// adjoint except the bicubic downsampler (see BicubicDownsample).

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sasc/binary.hpp"
#include "sasc/features.hpp"
#include "sasc/grid.hpp"

namespace sasc {

/// One square kernel stored row-major; tap (ctr, ctr) with ctr = (side-1)/2 is the origin.
struct Kernel {
    int side = 0;
    std::vector<double> taps;

    int center() const noexcept { return (side - 1) / 2; }
    double operator()(int r, int c) const noexcept { return taps[static_cast<std::size_t>(r) * side + c]; }

    void validate() const
    {
        if (side < 1 || taps.size() != static_cast<std::size_t>(side) * side) throw error("kernel: malformed taps");
        for (double t : taps)
            if (!std::isfinite(t)) throw error("kernel: non-finite tap");
    }
};

namespace detail {

inline std::vector<int> wrapped_offsets(int n, int lo, int hi)
{
    std::vector<int> t;
    t.reserve(static_cast<std::size_t>(n + hi - lo));
    for (int i = lo; i < n + hi; ++i) t.push_back(wrap(i, n));
    return t;
}

/// out(r,c) += sum_{a,b} k(a,b) * in(r + sign*(a-ctr), c + sign*(b-ctr)), periodic.
/// sign = -1 gives convolution, +1 gives correlation (the adjoint).
inline void accumulate_filter(const Kernel& k, const Image& in, Image& out, int sign)
{
    const int h = in.height();
    const int w = in.width();
    const int ctr = k.center();
    const int reach = std::max(ctr, k.side - 1 - ctr);
    const auto rows = wrapped_offsets(h, -reach, reach + 1);
    const auto cols = wrapped_offsets(w, -reach, reach + 1);
    for (int a = 0; a < k.side; ++a) {
        for (int b = 0; b < k.side; ++b) {
            const double t = k(a, b);
            if (t == 0.0) continue;
            const int dr = sign * (a - ctr) + reach;
            const int dc = sign * (b - ctr) + reach;
            for (int r = 0; r < h; ++r) {
                const double* src = in.row(rows[static_cast<std::size_t>(r + dr)]);
                double* dst = out.row(r);
                const int* cidx = &cols[static_cast<std::size_t>(dc)];
                for (int c = 0; c < w; ++c) dst[c] += t * src[cidx[c]];
            }
        }
    }
}

} // namespace detail

/// Periodic 2-D convolution with a single kernel.
inline Image convolve(const Kernel& k, const Image& img)
{
    Image out(img.height(), img.width());
    detail::accumulate_filter(k, img, out, -1);
    return out;
}

/// Periodic 2-D correlation with a single kernel; adjoint of `convolve`.
inline Image correlate(const Kernel& k, const Image& img)
{
    Image out(img.height(), img.width());
    detail::accumulate_filter(k, img, out, +1);
    return out;
}

/// K analysis filters of a common odd-or-even side f.
class FilterBank {
public:
    FilterBank() = default;

    FilterBank(int count, int side, std::vector<double> taps) : count_(count), side_(side)
    {
        if (count < 1) throw error("filter bank: need at least one filter");
        if (side < 1) throw error("filter bank: side must be positive");
        if (taps.size() != static_cast<std::size_t>(count) * side * side)
            throw error("filter bank: tap count does not match count*side*side");
        filters_.reserve(static_cast<std::size_t>(count));
        const std::size_t n = static_cast<std::size_t>(side) * side;
        for (int k = 0; k < count; ++k) {
            Kernel ker{side, std::vector<double>(taps.begin() + static_cast<std::ptrdiff_t>(k * n),
                                                 taps.begin() + static_cast<std::ptrdiff_t>((k + 1) * n))};
            ker.validate();
            filters_.push_back(std::move(ker));
        }
    }

    explicit FilterBank(std::vector<Kernel> filters) : filters_(std::move(filters))
    {
        if (filters_.empty()) throw error("filter bank: need at least one filter");
        side_ = filters_.front().side;
        count_ = static_cast<int>(filters_.size());
        for (const auto& f : filters_) {
            f.validate();
            if (f.side != side_) throw error("filter bank: filters must share one side");
        }
    }

    int count() const noexcept { return count_; }
    int side() const noexcept { return side_; }
    const Kernel& operator[](int k) const noexcept { return filters_[static_cast<std::size_t>(k)]; }
    auto begin() const noexcept { return filters_.begin(); }
    auto end() const noexcept { return filters_.end(); }

    std::vector<double> flat_taps() const
    {
        std::vector<double> t;
        for (const auto& f : filters_) t.insert(t.end(), f.taps.begin(), f.taps.end());
        return t;
    }

    friend bool operator==(const FilterBank& a, const FilterBank& b)
    {
        return a.count_ == b.count_ && a.side_ == b.side_ && a.flat_taps() == b.flat_taps();
    }

private:
    int count_ = 0;
    int side_ = 0;
    std::vector<Kernel> filters_;
};

/// Feature maps w_k * x for every filter in the bank.
inline FeatureMaps conv(const FilterBank& bank, const Image& img)
{
    if (img.height() < bank.side() || img.width() < bank.side())
        throw error("conv: image smaller than filter");
    std::vector<Image> maps;
    maps.reserve(static_cast<std::size_t>(bank.count()));
    for (const auto& w : bank) maps.push_back(convolve(w, img));
    return FeatureMaps(std::move(maps));
}

/// sum_k W_k^T z_k, accumulated in filter-index order.
inline Image conv_adjoint(const FilterBank& bank, const FeatureMaps& maps)
{
    if (maps.count() != bank.count()) throw error("conv_adjoint: map count does not match bank count");
    Image out(maps.height(), maps.width());
    for (int k = 0; k < bank.count(); ++k) detail::accumulate_filter(bank[k], maps[k], out, +1);
    return out;
}

/// 2-D DCT-II atoms of size f x f without the DC atom, each with unit l2 norm.
inline FilterBank make_dct_bank(int side)
{
    if (side < 2) throw error("make_dct_bank: side must be >= 2");
    std::vector<Kernel> filters;
    for (int u = 0; u < side; ++u) {
        for (int v = 0; v < side; ++v) {
            if (u == 0 && v == 0) continue;
            Kernel k{side, std::vector<double>(static_cast<std::size_t>(side) * side)};
            double norm = 0.0;
            for (int a = 0; a < side; ++a) {
                for (int b = 0; b < side; ++b) {
                    const double t = std::cos(std::numbers::pi * (2 * a + 1) * u / (2.0 * side)) *
                                     std::cos(std::numbers::pi * (2 * b + 1) * v / (2.0 * side));
                    k.taps[static_cast<std::size_t>(a) * side + b] = t;
                    norm += t * t;
                }
            }
            norm = std::sqrt(norm);
            for (auto& t : k.taps) t /= norm;
            filters.push_back(std::move(k));
        }
    }
    return FilterBank(std::move(filters));
}

/// Gaussian kernel truncated at +-3 sigma, normalized to unit sum.
inline Kernel make_gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0)) throw error("gaussian kernel: sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * radius + 1;
    Kernel k{side, std::vector<double>(static_cast<std::size_t>(side) * side)};
    double s = 0.0;
    for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) {
            const double d2 = (a - radius) * (a - radius) + (b - radius) * (b - radius);
            const double t = std::exp(-0.5 * d2 / (sigma * sigma));
            k.taps[static_cast<std::size_t>(a) * side + b] = t;
            s += t;
        }
    for (auto& t : k.taps) t /= s;
    return k;
}

/// Centered delta of the given side.
inline Kernel make_delta_kernel(int side = 1)
{
    Kernel k{side, std::vector<double>(static_cast<std::size_t>(side) * side, 0.0)};
    k.taps[static_cast<std::size_t>(k.center()) * side + k.center()] = 1.0;
    return k;
}

// Filter bank file: "SASCFBK1", u32 K, u32 f, K*f*f f32 taps (filter-major, row-major).
inline constexpr std::string_view filter_bank_magic = "SASCFBK1";

inline binary::Bytes encode_filter_bank(const FilterBank& bank)
{
    binary::Writer w;
    w.magic(filter_bank_magic);
    w.u32(static_cast<std::uint32_t>(bank.count()));
    w.u32(static_cast<std::uint32_t>(bank.side()));
    for (double t : bank.flat_taps()) w.f32(t);
    return std::move(w).bytes();
}

inline FilterBank decode_filter_bank(std::span<const std::uint8_t> bytes)
{
    binary::Reader r(bytes);
    r.expect_magic(filter_bank_magic);
    const auto count = r.u32();
    const auto side = r.u32();
    if (count == 0 || side == 0 || count > (1u << 16) || side > 1024) throw error("filter bank: bad header");
    const std::size_t n = static_cast<std::size_t>(count) * side * side;
    if (r.remaining() / 4 < n) throw binary::Reader::truncated_error("truncated payload");
    std::vector<double> taps(n);
    for (auto& t : taps) t = r.f32();
    return FilterBank(static_cast<int>(count), static_cast<int>(side), std::move(taps));
}

inline Kernel decode_kernel(std::span<const std::uint8_t> bytes)
{
    auto bank = decode_filter_bank(bytes);
    if (bank.count() != 1) throw error("kernel file must contain exactly one filter");
    return bank[0];
}

// ---------------------------------------------------------------------------
// Degradation operator H

namespace detail {

/// Catmull-Rom style cubic convolution kernel, a = -0.5.
inline double cubic(double x) noexcept
{
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

struct ResampleTap {
    int index;
    double weight;
};

/// Per-output-sample taps for resizing a periodic 1-D signal of length n_in to n_out.
/// Downscaling widens the kernel by the scale factor (antialiasing).
inline std::vector<std::vector<ResampleTap>> bicubic_taps(int n_in, int n_out)
{
    const double scale = static_cast<double>(n_in) / n_out; // input samples per output sample
    const double widen = std::max(1.0, scale);
    const double support = 2.0 * widen;
    std::vector<std::vector<ResampleTap>> taps(static_cast<std::size_t>(n_out));
    for (int u = 0; u < n_out; ++u) {
        const double x = (u + 0.5) * scale - 0.5;
        const int lo = static_cast<int>(std::floor(x - support));
        const int hi = static_cast<int>(std::ceil(x + support));
        double sum = 0.0;
        auto& row = taps[static_cast<std::size_t>(u)];
        for (int i = lo; i <= hi; ++i) {
            const double wgt = cubic((x - i) / widen);
            if (wgt == 0.0) continue;
            row.push_back({wrap(i, n_in), wgt});
            sum += wgt;
        }
        for (auto& t : row) t.weight /= sum;
    }
    return taps;
}

} // namespace detail

/// Separable bicubic resize with periodic boundary.
inline Image bicubic_resize(const Image& img, int out_h, int out_w)
{
    const auto rt = detail::bicubic_taps(img.height(), out_h);
    const auto ct = detail::bicubic_taps(img.width(), out_w);
    Image tmp(img.height(), out_w);
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < out_w; ++c) {
            double s = 0.0;
            for (const auto& t : ct[static_cast<std::size_t>(c)]) s += t.weight * img(r, t.index);
            tmp(r, c) = s;
        }
    Image out(out_h, out_w);
    for (int r = 0; r < out_h; ++r)
        for (const auto& t : rt[static_cast<std::size_t>(r)])
            for (int c = 0; c < out_w; ++c) out(r, c) += t.weight * tmp(t.index, c);
    return out;
}

struct Shape {
    int height = 0;
    int width = 0;
    friend bool operator==(const Shape&, const Shape&) = default;
};

struct IdentityOp {
    double sigma = 0.0; // noise level, informational
};
struct BlurOp {
    Kernel kernel;
};
struct GaussianDownsampleOp {
    Kernel kernel;
    int scale = 2;
};
/// H = bicubic resize by 1/s, H^T approximated by bicubic resize by s divided
/// by s^2 (so that <Hx, y> = <x, H^T y> holds for constant x, y). Not an exact adjoint.
struct BicubicDownsampleOp {
    int scale = 2;
};

/// Observation operator H with its adjoint, bound to a fixed input shape.
class DegradationOp {
public:
    using Kind = std::variant<IdentityOp, BlurOp, GaussianDownsampleOp, BicubicDownsampleOp>;

    DegradationOp(Kind kind, Shape input) : kind_(std::move(kind)), input_(input)
    {
        if (input.height < 1 || input.width < 1) throw error("degradation: input shape must be positive");
        std::visit([this](const auto& k) { validate(k); }, kind_);
    }

    static DegradationOp identity(Shape s, double sigma = 0.0) { return {IdentityOp{sigma}, s}; }
    static DegradationOp blur(Kernel k, Shape s) { return {BlurOp{std::move(k)}, s}; }
    static DegradationOp gaussian_downsample(Kernel k, int scale, Shape s)
    {
        return {GaussianDownsampleOp{std::move(k), scale}, s};
    }
    static DegradationOp bicubic_downsample(int scale, Shape s) { return {BicubicDownsampleOp{scale}, s}; }

    const Kind& kind() const noexcept { return kind_; }
    Shape input_shape() const noexcept { return input_; }
    Shape output_shape() const noexcept { return {input_.height / scale(), input_.width / scale()}; }
    int scale() const noexcept
    {
        if (auto* g = std::get_if<GaussianDownsampleOp>(&kind_)) return g->scale;
        if (auto* b = std::get_if<BicubicDownsampleOp>(&kind_)) return b->scale;
        return 1;
    }
    bool downsamples() const noexcept { return is<GaussianDownsampleOp>() || is<BicubicDownsampleOp>(); }
    bool has_exact_adjoint() const noexcept { return !is<BicubicDownsampleOp>(); }

    template <class T>
    bool is() const noexcept
    {
        return std::holds_alternative<T>(kind_);
    }

    std::string name() const
    {
        struct {
            std::string operator()(const IdentityOp&) const { return "identity"; }
            std::string operator()(const BlurOp&) const { return "blur"; }
            std::string operator()(const GaussianDownsampleOp&) const { return "gauss-down"; }
            std::string operator()(const BicubicDownsampleOp&) const { return "bicubic-down"; }
        } v;
        return std::visit(v, kind_);
    }

private:
    void validate(const IdentityOp& k) const
    {
        if (!(k.sigma >= 0.0)) throw error("identity: sigma must be >= 0");
    }
    void validate(const BlurOp& k) const { validate_kernel(k.kernel); }
    void validate(const GaussianDownsampleOp& k) const
    {
        validate_kernel(k.kernel);
        validate_scale(k.scale);
    }
    void validate(const BicubicDownsampleOp& k) const { validate_scale(k.scale); }

    void validate_kernel(const Kernel& k) const
    {
        k.validate();
        if (std::all_of(k.taps.begin(), k.taps.end(), [](double t) { return t == 0.0; }))
            throw error("degradation: kernel is all zero");
        if (k.side > std::min(input_.height, input_.width)) throw error("degradation: kernel larger than image");
    }
    void validate_scale(int s) const
    {
        if (s < 1) throw error("degradation: scale must be >= 1");
        if (input_.height % s != 0 || input_.width % s != 0)
            throw error("degradation: input dimensions must be multiples of the scale");
    }

    Kind kind_;
    Shape input_;
};

inline Image apply_h(const DegradationOp& op, const Image& img)
{
    if (Shape{img.height(), img.width()} != op.input_shape()) throw error("apply_h: image shape does not match operator input");
    const auto out = op.output_shape();
    struct {
        const Image& x;
        Shape out;
        Image operator()(const IdentityOp&) const { return x; }
        Image operator()(const BlurOp& b) const { return convolve(b.kernel, x); }
        Image operator()(const GaussianDownsampleOp& g) const
        {
            const Image blurred = convolve(g.kernel, x);
            Image y(out.height, out.width);
            for (int r = 0; r < out.height; ++r)
                for (int c = 0; c < out.width; ++c) y(r, c) = blurred(r * g.scale, c * g.scale);
            return y;
        }
        Image operator()(const BicubicDownsampleOp&) const { return bicubic_resize(x, out.height, out.width); }
    } v{img, out};
    return std::visit(v, op.kind());
}

inline Image apply_h_adjoint(const DegradationOp& op, const Image& img)
{
    if (Shape{img.height(), img.width()} != op.output_shape())
        throw error("apply_h_adjoint: image shape does not match operator output");
    const auto in = op.input_shape();
    struct {
        const Image& y;
        Shape in;
        Image operator()(const IdentityOp&) const { return y; }
        Image operator()(const BlurOp& b) const { return correlate(b.kernel, y); }
        Image operator()(const GaussianDownsampleOp& g) const
        {
            Image up(in.height, in.width);
            for (int r = 0; r < y.height(); ++r)
                for (int c = 0; c < y.width(); ++c) up(r * g.scale, c * g.scale) = y(r, c);
            return correlate(g.kernel, up);
        }
        Image operator()(const BicubicDownsampleOp& b) const
        {
            Image x = bicubic_resize(y, in.height, in.width);
            x *= 1.0 / (static_cast<double>(b.scale) * b.scale);
            return x;
        }
    } v{img, in};
    return std::visit(v, op.kind());
}

/// (H^T H + eta * sum_k W_k^T W_k) x, the normal-equation operator.
inline Image apply_normal(const DegradationOp& op, const FilterBank& bank, const Image& x, double eta)
{
    Image out = apply_h_adjoint(op, apply_h(op, x));
    if (eta != 0.0) out.add_scaled(conv_adjoint(bank, conv(bank, x)), eta);
    return out;
}

/// A x = x - step*H^T H x - step*eta*sum_k W_k^T W_k x, applied without forming A.
inline Image apply_a(const DegradationOp& op, const FilterBank& bank, const Image& x, double step, double eta)
{
    Image out = x;
    if (step == 0.0) return out;
    out.add_scaled(apply_h_adjoint(op, apply_h(op, x)), -step);
    out.add_scaled(conv_adjoint(bank, conv(bank, x)), -step * eta);
    return out;
}

/// Largest eigenvalue estimate of H^T H + eta * sum_k W_k^T W_k (Rayleigh quotient
/// of the power iterate, from a fixed-seed random start).
inline double power_iteration_lmax(const DegradationOp& op, const FilterBank& bank, double eta, int iters,
                                   std::uint64_t seed = 0x5a5cULL)
{
    if (iters < 1) throw error("power_iteration_lmax: iters must be >= 1");
    const auto s = op.input_shape();
    std::mt19937_64 rng(seed);
    Image v(s.height, s.width);
    for (auto& p : v.pixels()) p = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    double estimate = 0.0;
    for (int i = 0; i < iters; ++i) {
        v *= 1.0 / std::sqrt(squared_norm(v));
        Image mv = apply_normal(op, bank, v, eta);
        estimate = dot(v, mv);
        v = std::move(mv);
    }
    return estimate;
}

} // namespace sasc
