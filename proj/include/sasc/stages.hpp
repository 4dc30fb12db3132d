#pragma once

// Per-stage parameters of the unrolled solver and their file format:
//   "SASCSTG1" | u32 stage_count
//   per stage: u32 K, u32 f, f32 analysis[K][f][f], f32 reconstruction[K][f][f],
//              f32 thresholds[K], f32 step, f32 eta

#include <string_view>
#include <vector>

#include "sasc/binary.hpp"
#include "sasc/ops.hpp"
#include "sasc/sparsity.hpp"

namespace sasc {

struct Stage {
    FilterBank analysis;
    FilterBank reconstruction;
    ThresholdVector thresholds;
    double step = 0.0;
    double eta = 0.0;
};

struct StageParams {
    std::vector<Stage> stages;

    int size() const noexcept { return static_cast<int>(stages.size()); }

    void validate() const
    {
        if (stages.empty()) throw error("stage params: need at least one stage");
        for (std::size_t i = 0; i < stages.size(); ++i) {
            const auto& s = stages[i];
            const auto where = "stage " + std::to_string(i) + ": ";
            if (s.analysis.count() < 1) throw error(where + "empty analysis bank");
            if (s.analysis.count() != s.reconstruction.count() || s.analysis.side() != s.reconstruction.side())
                throw error(where + "analysis and reconstruction banks differ in shape");
            if (s.thresholds.size() != s.analysis.count()) throw error(where + "threshold count does not match filter count");
            if (!(s.step >= 0.0) || !std::isfinite(s.step)) throw error(where + "step must be finite and >= 0");
            if (!(s.eta >= 0.0) || !std::isfinite(s.eta)) throw error(where + "eta must be finite and >= 0");
        }
    }

    /// K copies of one shared parameter set (the unrolled form of the plain iteration).
    static StageParams replicate(const FilterBank& bank, double lambda, double step, double eta, int count)
    {
        StageParams p;
        for (int i = 0; i < count; ++i)
            p.stages.push_back({bank, bank, ThresholdVector::broadcast(bank.count(), lambda / 2.0), step, eta});
        return p;
    }
};

inline constexpr std::string_view stage_magic = "SASCSTG1";

inline binary::Bytes encode_stages(const StageParams& p)
{
    p.validate();
    binary::Writer w;
    w.magic(stage_magic);
    w.u32(static_cast<std::uint32_t>(p.stages.size()));
    for (const auto& s : p.stages) {
        w.u32(static_cast<std::uint32_t>(s.analysis.count()));
        w.u32(static_cast<std::uint32_t>(s.analysis.side()));
        for (double t : s.analysis.flat_taps()) w.f32(t);
        for (double t : s.reconstruction.flat_taps()) w.f32(t);
        for (double t : s.thresholds.values()) w.f32(t);
        w.f32(s.step);
        w.f32(s.eta);
    }
    return std::move(w).bytes();
}

inline StageParams decode_stages(std::span<const std::uint8_t> bytes)
{
    binary::Reader r(bytes);
    r.expect_magic(stage_magic);
    const auto count = r.u32();
    if (count == 0 || count > 4096) throw error("stage params: implausible stage count");
    StageParams p;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto k = r.u32();
        const auto f = r.u32();
        if (k == 0 || f == 0 || k > 65536 || f > 1024) throw error("stage params: implausible bank shape");
        const std::size_t n = static_cast<std::size_t>(k) * f * f;
        if (r.remaining() / 4 < 2 * n + k + 2) throw binary::Reader::truncated_error("truncated payload");
        auto read = [&](std::size_t m) {
            std::vector<double> v(m);
            for (auto& x : v) x = r.f32();
            return v;
        };
        Stage s;
        s.analysis = FilterBank(static_cast<int>(k), static_cast<int>(f), read(n));
        s.reconstruction = FilterBank(static_cast<int>(k), static_cast<int>(f), read(n));
        s.thresholds = ThresholdVector(read(k));
        s.step = r.f32();
        s.eta = r.f32();
        p.stages.push_back(std::move(s));
    }
    if (!r.at_end()) throw error("stage params: trailing bytes");
    p.validate();
    return p;
}

} // namespace sasc
