#pragma once

#include <vector>

#include "sasc/grid.hpp"

namespace sasc {

/// K same-shaped coefficient rasters, one per analysis filter.
class FeatureMaps {
public:
    FeatureMaps() = default;

    FeatureMaps(int count, int height, int width) : height_(height), width_(width)
    {
        if (count < 1) throw error("feature map set needs at least one map");
        maps_.assign(static_cast<std::size_t>(count), Image(height, width));
    }

    explicit FeatureMaps(std::vector<Image> maps) : maps_(std::move(maps))
    {
        if (maps_.empty()) throw error("feature map set needs at least one map");
        height_ = maps_.front().height();
        width_ = maps_.front().width();
        for (const auto& m : maps_)
            if (m.height() != height_ || m.width() != width_) throw error("feature maps must share one shape");
    }

    int count() const noexcept { return static_cast<int>(maps_.size()); }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    Image& operator[](int k) noexcept { return maps_[static_cast<std::size_t>(k)]; }
    const Image& operator[](int k) const noexcept { return maps_[static_cast<std::size_t>(k)]; }

    auto begin() noexcept { return maps_.begin(); }
    auto end() noexcept { return maps_.end(); }
    auto begin() const noexcept { return maps_.begin(); }
    auto end() const noexcept { return maps_.end(); }

    bool same_layout(const FeatureMaps& o) const noexcept
    {
        return count() == o.count() && height_ == o.height_ && width_ == o.width_;
    }

    void require_same_layout(const FeatureMaps& o, const char* what) const
    {
        if (!same_layout(o)) throw error(std::string(what) + ": feature map count/shape mismatch");
    }

    friend bool operator==(const FeatureMaps&, const FeatureMaps&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<Image> maps_;
};

inline double dot(const FeatureMaps& a, const FeatureMaps& b)
{
    a.require_same_layout(b, "dot");
    double s = 0.0;
    for (int k = 0; k < a.count(); ++k) s += dot(a[k], b[k]);
    return s;
}

} // namespace sasc
