#pragma once

// Inference for the external-prior CNN: a stack of periodic-padded
// convolution layers (linear or rectifier) with an optional global residual
// skip from input to output.
//
// Weight file layout (little endian):
//   "SASCPRN1" | u8 residual_skip | u32 layer_count
//   per layer: u32 out, u32 in, u32 kh, u32 kw, u8 activation (0 linear, 1 rectifier),
//              f32 taps[out][in][kh][kw], f32 biases[out]
// Layers apply cross-correlation (the usual CNN convention) with the kernel
// origin at ((kh-1)/2, (kw-1)/2).

#include <cstdint>
#include <string_view>
#include <vector>

#include "sasc/binary.hpp"
#include "sasc/features.hpp"
#include "sasc/grid.hpp"
#include "sasc/ops.hpp"

namespace sasc {

enum class Activation : std::uint8_t { linear = 0, rectifier = 1 };

struct ConvLayer {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    Activation activation = Activation::linear;
    std::vector<double> taps;   // [out][in][kh][kw]
    std::vector<double> biases; // [out]

    double tap(int o, int i, int a, int b) const noexcept
    {
        return taps[((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + a) * kernel_w + b];
    }
    std::size_t tap_count() const noexcept
    {
        return static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w;
    }
};

struct PriorNetWeights {
    bool residual_skip = false;
    std::vector<ConvLayer> layers;

    std::size_t weight_count() const noexcept
    {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.tap_count();
        return n;
    }
    std::size_t bias_count() const noexcept
    {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.biases.size();
        return n;
    }
    int max_kernel_extent() const noexcept
    {
        int m = 1;
        for (const auto& l : layers) m = std::max({m, l.kernel_h, l.kernel_w});
        return m;
    }
};

class weights_error : public error {
public:
    enum class Kind { bad_magic, truncated_payload, incompatible_channels, malformed };
    weights_error(Kind kind, const std::string& what) : error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

inline void validate(const PriorNetWeights& w)
{
    using K = weights_error::Kind;
    if (w.layers.empty()) throw weights_error(K::malformed, "prior net: no layers");
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        const auto& l = w.layers[i];
        if (l.out_channels < 1 || l.in_channels < 1 || l.kernel_h < 1 || l.kernel_w < 1)
            throw weights_error(K::malformed, "prior net: layer " + std::to_string(i) + " has a zero dimension");
        if (l.taps.size() != l.tap_count() || l.biases.size() != static_cast<std::size_t>(l.out_channels))
            throw weights_error(K::malformed, "prior net: layer " + std::to_string(i) + " has wrong tap/bias count");
        if (l.activation != Activation::linear && l.activation != Activation::rectifier)
            throw weights_error(K::malformed, "prior net: unknown activation");
        for (double t : l.taps)
            if (!std::isfinite(t)) throw weights_error(K::malformed, "prior net: non-finite tap");
        for (double b : l.biases)
            if (!std::isfinite(b)) throw weights_error(K::malformed, "prior net: non-finite bias");
    }
    if (w.layers.front().in_channels != 1)
        throw weights_error(K::incompatible_channels, "incompatible channels: first layer must take 1 input channel");
    if (w.layers.back().out_channels != 1)
        throw weights_error(K::incompatible_channels, "incompatible channels: last layer must emit 1 channel");
    for (std::size_t i = 0; i + 1 < w.layers.size(); ++i)
        if (w.layers[i].out_channels != w.layers[i + 1].in_channels)
            throw weights_error(K::incompatible_channels,
                                "incompatible channels: layer " + std::to_string(i) + " emits " +
                                    std::to_string(w.layers[i].out_channels) + " channels, layer " +
                                    std::to_string(i + 1) + " expects " + std::to_string(w.layers[i + 1].in_channels));
}

inline constexpr std::string_view prior_net_magic = "SASCPRN1";

inline binary::Bytes encode_weights(const PriorNetWeights& w)
{
    validate(w);
    binary::Writer out;
    out.magic(prior_net_magic);
    out.u8(w.residual_skip ? 1 : 0);
    out.u32(static_cast<std::uint32_t>(w.layers.size()));
    for (const auto& l : w.layers) {
        out.u32(static_cast<std::uint32_t>(l.out_channels));
        out.u32(static_cast<std::uint32_t>(l.in_channels));
        out.u32(static_cast<std::uint32_t>(l.kernel_h));
        out.u32(static_cast<std::uint32_t>(l.kernel_w));
        out.u8(static_cast<std::uint8_t>(l.activation));
        for (double t : l.taps) out.f32(t);
        for (double b : l.biases) out.f32(b);
    }
    return std::move(out).bytes();
}

inline PriorNetWeights load_weights(std::span<const std::uint8_t> bytes)
{
    using K = weights_error::Kind;
    binary::Reader in(bytes);
    try {
        in.expect_magic(prior_net_magic);
    } catch (const binary::Reader::truncated_error&) {
        throw weights_error(K::bad_magic, "bad magic: not a SASCPRN1 weight file");
    } catch (const binary::Reader::magic_error&) {
        throw weights_error(K::bad_magic, "bad magic: not a SASCPRN1 weight file");
    }
    try {
        PriorNetWeights w;
        const auto skip = in.u8();
        if (skip > 1) throw weights_error(K::malformed, "prior net: residual flag must be 0 or 1");
        w.residual_skip = skip == 1;
        const auto count = in.u32();
        if (count == 0 || count > 4096) throw weights_error(K::malformed, "prior net: implausible layer count");
        for (std::uint32_t i = 0; i < count; ++i) {
            ConvLayer l;
            const auto o = in.u32(), c = in.u32(), kh = in.u32(), kw = in.u32();
            if (o == 0 || c == 0 || kh == 0 || kw == 0 || o > 65536 || c > 65536 || kh > 1024 || kw > 1024)
                throw weights_error(K::malformed, "prior net: implausible layer dimensions");
            l.out_channels = static_cast<int>(o);
            l.in_channels = static_cast<int>(c);
            l.kernel_h = static_cast<int>(kh);
            l.kernel_w = static_cast<int>(kw);
            const auto act = in.u8();
            if (act > 1) throw weights_error(K::malformed, "prior net: unknown activation code");
            l.activation = static_cast<Activation>(act);
            if (in.remaining() / 4 < l.tap_count() + o) throw binary::Reader::truncated_error("truncated payload");
            l.taps.resize(l.tap_count());
            for (auto& t : l.taps) t = in.f32();
            l.biases.resize(o);
            for (auto& b : l.biases) b = in.f32();
            w.layers.push_back(std::move(l));
        }
        if (!in.at_end()) throw weights_error(K::malformed, "prior net: trailing bytes after last layer");
        validate(w);
        return w;
    } catch (const binary::Reader::truncated_error&) {
        throw weights_error(K::truncated_payload, "truncated payload");
    }
}

namespace detail {

/// out += correlate(in, kernel) with a kh x kw kernel, periodic boundary.
inline void correlate_accumulate(const ConvLayer& l, int o, int i, const Image& in, Image& out)
{
    const int h = in.height(), w = in.width();
    const int cr = (l.kernel_h - 1) / 2, cc = (l.kernel_w - 1) / 2;
    std::vector<int> cols(static_cast<std::size_t>(w));
    for (int a = 0; a < l.kernel_h; ++a) {
        for (int b = 0; b < l.kernel_w; ++b) {
            const double t = l.tap(o, i, a, b);
            if (t == 0.0) continue;
            for (int c = 0; c < w; ++c) cols[static_cast<std::size_t>(c)] = wrap(c + b - cc, w);
            for (int r = 0; r < h; ++r) {
                const double* src = in.row(wrap(r + a - cr, h));
                double* dst = out.row(r);
                for (int c = 0; c < w; ++c) dst[c] += t * src[cols[static_cast<std::size_t>(c)]];
            }
        }
    }
}

} // namespace detail

/// Forward pass; output has the input's shape.
inline Image infer(const PriorNetWeights& w, const Image& y)
{
    validate(w);
    if (y.height() < w.max_kernel_extent() || y.width() < w.max_kernel_extent())
        throw error("prior net: image smaller than the largest kernel");
    std::vector<Image> act{y};
    for (const auto& l : w.layers) {
        std::vector<Image> next;
        next.reserve(static_cast<std::size_t>(l.out_channels));
        for (int o = 0; o < l.out_channels; ++o) {
            Image acc(y.height(), y.width(), l.biases[static_cast<std::size_t>(o)]);
            for (int i = 0; i < l.in_channels; ++i) detail::correlate_accumulate(l, o, i, act[static_cast<std::size_t>(i)], acc);
            if (l.activation == Activation::rectifier)
                for (auto& v : acc.pixels()) v = std::max(v, 0.0);
            next.push_back(std::move(acc));
        }
        act = std::move(next);
    }
    Image out = std::move(act.front());
    if (w.residual_skip) out += y;
    return out;
}

struct ExternalPrior {
    Image estimate;       // x^
    FeatureMaps features; // z^_k = w_k * x^
};

inline ExternalPrior external_features(const PriorNetWeights& w, const Image& y, const FilterBank& bank)
{
    Image est = infer(w, y);
    FeatureMaps z = conv(bank, est);
    return {std::move(est), std::move(z)};
}

} // namespace sasc
