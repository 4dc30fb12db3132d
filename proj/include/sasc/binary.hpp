#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sasc/grid.hpp"

namespace sasc::binary {

using Bytes = std::vector<std::uint8_t>;

/// Little-endian append-only encoder.
class Writer {
public:
    void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f32(double v) { f32(static_cast<float>(v)); }

    const Bytes& bytes() const& noexcept { return out_; }
    Bytes bytes() && noexcept { return std::move(out_); }

private:
    Bytes out_;
};

/// Little-endian decoder over a byte span. Reading past the end throws
/// `truncated_error`; a magic mismatch throws `magic_error`.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    void expect_magic(std::string_view m)
    {
        need(m.size());
        if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0)
            throw magic_error("bad magic: expected \"" + printable(m) + "\"");
        pos_ += m.size();
    }
    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }

    std::size_t remaining() const noexcept { return in_.size() - pos_; }
    bool at_end() const noexcept { return pos_ == in_.size(); }

    class truncated_error : public error {
    public:
        using error::error;
    };
    class magic_error : public error {
    public:
        using error::error;
    };

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n) throw truncated_error("truncated payload");
    }
    static std::string printable(std::string_view m)
    {
        std::string s;
        for (char c : m) s += (c == '\n') ? std::string("\\n") : std::string(1, c);
        return s;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

inline Bytes read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open '" + path + "' for reading");
    return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw error("write failed for '" + path + "'");
}

} // namespace sasc::binary
