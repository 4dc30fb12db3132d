#pragma once

// Image file formats: binary PGM (P5, maxval 255) and the raw float
// container "SASCF32\n" + u32 height + u32 width + f32 pixels (all LE).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "sasc/binary.hpp"
#include "sasc/grid.hpp"

namespace sasc::io {

inline constexpr std::string_view float_magic = "SASCF32\n";

inline binary::Bytes encode_float(const Image& img)
{
    binary::Writer w;
    w.magic(float_magic);
    w.u32(static_cast<std::uint32_t>(img.height()));
    w.u32(static_cast<std::uint32_t>(img.width()));
    for (double v : img.pixels()) w.f32(v);
    return std::move(w).bytes();
}

inline Image decode_float(std::span<const std::uint8_t> bytes)
{
    binary::Reader r(bytes);
    r.expect_magic(float_magic);
    const auto h = r.u32();
    const auto wd = r.u32();
    if (h == 0 || wd == 0) throw error("float image: zero dimension");
    if (r.remaining() / 4 < static_cast<std::size_t>(h) * wd) throw binary::Reader::truncated_error("truncated payload");
    std::vector<double> data(static_cast<std::size_t>(h) * wd);
    for (auto& v : data) {
        v = r.f32();
        if (!std::isfinite(v)) throw error("float image: non-finite pixel");
    }
    return Image(static_cast<int>(h), static_cast<int>(wd), std::move(data));
}

/// 8-bit PGM: pixel values are divided by 255 on read; on write they are
/// scaled by 255, rounded and clamped to [0,255].
inline binary::Bytes encode_pgm(const Image& img)
{
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    binary::Bytes out(header.begin(), header.end());
    out.reserve(out.size() + img.size());
    for (double v : img.pixels())
        out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
    return out;
}

inline Image decode_pgm(std::span<const std::uint8_t> bytes)
{
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_space_and_comments();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw error("pgm: malformed header");
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > (1L << 24)) throw error("pgm: header value out of range");
        }
        return static_cast<int>(v);
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw error("pgm: expected binary P5 magic");
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (maxval != 255) throw error("pgm: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw error("pgm: malformed header");
    ++pos;
    if (w < 1 || h < 1) throw error("pgm: zero dimension");
    if (bytes.size() - pos < static_cast<std::size_t>(w) * h) throw error("pgm: truncated payload");
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[pos + i] / 255.0;
    return Image(h, w, std::move(data));
}

inline bool has_pgm_extension(const std::string& path)
{
    auto ends_with = [&](std::string_view s) {
        return path.size() >= s.size() && std::equal(s.rbegin(), s.rend(), path.rbegin(),
                                                     [](char a, char b) { return a == std::tolower(b); });
    };
    return ends_with(".pgm") || ends_with(".pnm");
}

/// Dispatches on content: files starting with "P5" are PGM, otherwise the float format.
inline Image read_image(const std::string& path)
{
    const auto bytes = binary::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    return decode_float(bytes);
}

/// Writes PGM for *.pgm / *.pnm paths, the float format otherwise.
inline void write_image(const std::string& path, const Image& img)
{
    binary::write_file(path, has_pgm_extension(path) ? encode_pgm(img) : encode_float(img));
}

} // namespace sasc::io
