#pragma once

// Internal (self-similarity) prior: block matching over a search window,
// exponential patch weights and the aggregated nonlocal image estimate.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sasc/features.hpp"
#include "sasc/grid.hpp"
#include "sasc/ops.hpp"

namespace sasc {

struct NonlocalParams {
    int patch_side = 6;
    int stride = 4;
    int group_size = 10; // L
    int window = 31;     // candidate anchors lie within +-(window-1)/2 of the exemplar
    double bandwidth = 0.0; // h; must be set (> 0) before use
};

struct PatchGroup {
    Position exemplar;
    std::vector<Position> members;   // members[0] == exemplar
    std::vector<double> distances;   // l2 patch distance to the exemplar
    std::vector<double> weights;     // exp(-d/h) normalized to unit sum
};

struct PatchGroupIndex {
    NonlocalParams params;
    Shape shape;
    std::vector<PatchGroup> groups;
};

namespace detail {

inline double patch_distance(const Image& img, Position a, Position b, int side)
{
    double s = 0.0;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const double d = img.at_wrapped(a.row + r, a.col + c) - img.at_wrapped(b.row + r, b.col + c);
            s += d * d;
        }
    return std::sqrt(s);
}

/// 0, stride, 2*stride, ... plus a final anchor at n - side so the lattice reaches the border.
inline std::vector<int> lattice(int n, int side, int stride)
{
    std::vector<int> a;
    for (int i = 0; i + side < n; i += stride) a.push_back(i);
    if (a.empty() || a.back() != n - side) a.push_back(n - side);
    return a;
}

inline void assign_weights(PatchGroup& g, double h)
{
    g.weights.resize(g.distances.size());
    double c = 0.0;
    for (std::size_t l = 0; l < g.distances.size(); ++l) {
        g.weights[l] = std::exp(-g.distances[l] / h);
        c += g.weights[l];
    }
    for (auto& w : g.weights) w /= c;
}

inline void validate(const NonlocalParams& p, Shape s)
{
    if (p.patch_side < 1 || p.patch_side > std::min(s.height, s.width))
        throw error("nonlocal: patch side must lie in [1, min(height,width)]");
    if (p.stride < 1 || p.stride > p.patch_side) throw error("nonlocal: stride must lie in [1, patch side]");
    if (p.group_size < 1) throw error("nonlocal: group size must be >= 1");
    if (p.window < p.patch_side) throw error("nonlocal: search window must be >= patch side");
    if (!(p.bandwidth > 0.0) || !std::isfinite(p.bandwidth)) throw error("nonlocal: bandwidth h must be positive");
}

} // namespace detail

/// For each exemplar on the stride lattice, keeps the L candidates with the
/// smallest patch distance inside the search window. The exemplar is always
/// the first member; remaining ties are broken by raster order of the anchor.
inline PatchGroupIndex build_group_index(const Image& guide, const NonlocalParams& params)
{
    const Shape shape{guide.height(), guide.width()};
    detail::validate(params, shape);
    const int radius = (params.window - 1) / 2;
    const int side = params.patch_side;

    PatchGroupIndex index{params, shape, {}};
    const auto rows = detail::lattice(shape.height, side, params.stride);
    const auto cols = detail::lattice(shape.width, side, params.stride);
    index.groups.reserve(rows.size() * cols.size());

    struct Candidate {
        double distance;
        int raster;
    };
    std::vector<int> stamp(static_cast<std::size_t>(shape.height) * shape.width, -1);
    std::vector<Candidate> cand;
    int group_id = 0;
    for (int r0 : rows) {
        for (int c0 : cols) {
            const Position ex{r0, c0};
            const int ex_raster = r0 * shape.width + c0;
            cand.clear();
            stamp[static_cast<std::size_t>(ex_raster)] = group_id;
            for (int dr = -radius; dr <= radius; ++dr) {
                for (int dc = -radius; dc <= radius; ++dc) {
                    const Position p{wrap(r0 + dr, shape.height), wrap(c0 + dc, shape.width)};
                    const int raster = p.row * shape.width + p.col;
                    if (stamp[static_cast<std::size_t>(raster)] == group_id) continue;
                    stamp[static_cast<std::size_t>(raster)] = group_id;
                    cand.push_back({detail::patch_distance(guide, ex, p, side), raster});
                }
            }
            const auto need = static_cast<std::size_t>(params.group_size - 1);
            if (cand.size() < need) throw error("nonlocal: search window holds fewer than L distinct patches");
            auto less = [](const Candidate& a, const Candidate& b) {
                return a.distance < b.distance || (a.distance == b.distance && a.raster < b.raster);
            };
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(need), cand.end(), less);

            PatchGroup g;
            g.exemplar = ex;
            g.members.push_back(ex);
            g.distances.push_back(0.0);
            for (std::size_t l = 0; l < need; ++l) {
                g.members.push_back({cand[l].raster / shape.width, cand[l].raster % shape.width});
                g.distances.push_back(cand[l].distance);
            }
            detail::assign_weights(g, params.bandwidth);
            index.groups.push_back(std::move(g));
            ++group_id;
        }
    }
    return index;
}

/// Same memberships, distances and weights recomputed on a new guide image.
inline PatchGroupIndex reweight_group_index(const PatchGroupIndex& index, const Image& guide)
{
    if (Shape{guide.height(), guide.width()} != index.shape) throw error("reweight: guide shape does not match index");
    PatchGroupIndex out = index;
    for (auto& g : out.groups) {
        for (std::size_t l = 0; l < g.members.size(); ++l)
            g.distances[l] = detail::patch_distance(guide, g.exemplar, g.members[l], index.params.patch_side);
        detail::assign_weights(g, index.params.bandwidth);
    }
    return out;
}

/// Per exemplar, the weighted average of its group's patches taken from
/// `guide`; overlapping exemplar estimates are averaged with unit weights.
inline Image nonlocal_image(const Image& guide, const PatchGroupIndex& index)
{
    if (Shape{guide.height(), guide.width()} != index.shape) throw error("nonlocal_image: guide shape does not match index");
    const int side = index.params.patch_side;
    const std::size_t n = static_cast<std::size_t>(side) * side;
    std::vector<WeightedPatch> estimates;
    estimates.reserve(index.groups.size());
    for (const auto& g : index.groups) {
        Patch est{side, g.exemplar, std::vector<double>(n, 0.0)};
        for (std::size_t l = 0; l < g.members.size(); ++l) {
            const double w = g.weights[l];
            const Position m = g.members[l];
            for (int r = 0; r < side; ++r)
                for (int c = 0; c < side; ++c)
                    est.values[static_cast<std::size_t>(r) * side + c] += w * guide.at_wrapped(m.row + r, m.col + c);
        }
        estimates.push_back({std::move(est), 1.0});
    }
    return aggregate_patches(estimates, guide.height(), guide.width());
}

/// z~_k = w_k * nonlocal_image(guide, index)
inline FeatureMaps nonlocal_features(const Image& guide, const PatchGroupIndex& index, const FilterBank& bank)
{
    return conv(bank, nonlocal_image(guide, index));
}

} // namespace sasc
