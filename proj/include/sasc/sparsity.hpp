#pragma once

#include <cmath>
#include <vector>

#include "sasc/features.hpp"
#include "sasc/ops.hpp"

namespace sasc {

/// Per-filter nonnegative thresholds tau_k.
class ThresholdVector {
public:
    ThresholdVector() = default;
    explicit ThresholdVector(std::vector<double> values) : values_(std::move(values))
    {
        for (double v : values_)
            if (!(v >= 0.0) || !std::isfinite(v)) throw error("threshold must be finite and >= 0");
    }
    static ThresholdVector broadcast(int count, double tau) { return ThresholdVector(std::vector<double>(static_cast<std::size_t>(count), tau)); }

    int size() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int k) const noexcept { return values_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// sign(v) * max(|v| - tau, 0)
inline double soft_threshold(double v, double tau) noexcept
{
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

/// z_k = mu_k + S_{tau_k}(wx_k - mu_k)
inline FeatureMaps shrink_toward(const FeatureMaps& wx, const FeatureMaps& mu, const ThresholdVector& tau)
{
    wx.require_same_layout(mu, "shrink_toward");
    if (tau.size() != wx.count()) throw error("shrink_toward: threshold count does not match map count");
    FeatureMaps z = mu;
    for (int k = 0; k < wx.count(); ++k) {
        const auto src = wx[k].pixels();
        auto dst = z[k].pixels();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += soft_threshold(src[i] - dst[i], tau[k]);
    }
    return z;
}

/// Structured feature update: each coefficient minimizes (c - z)^2 + lambda*|z - mu|,
/// i.e. z = mu + S_{lambda/2}(c - mu).
inline FeatureMaps update_features(const FeatureMaps& wx, const FeatureMaps& mu, double lambda)
{
    if (!(lambda >= 0.0)) throw error("update_features: lambda must be >= 0");
    return shrink_toward(wx, mu, ThresholdVector::broadcast(wx.count(), lambda / 2.0));
}

/// mu_k = mix * ext_k + (1 - mix) * internal_k
inline FeatureMaps mix_prior(const FeatureMaps& external, const FeatureMaps& internal, double mix)
{
    if (!(mix >= 0.0 && mix <= 1.0)) throw error("mix_prior: mix weight must lie in [0,1]");
    external.require_same_layout(internal, "mix_prior");
    if (mix == 1.0) return external;
    if (mix == 0.0) return internal;
    FeatureMaps mu = external;
    for (int k = 0; k < mu.count(); ++k) {
        auto dst = mu[k].pixels();
        const auto in = internal[k].pixels();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = mix * dst[i] + (1.0 - mix) * in[i];
    }
    return mu;
}

/// ||y - Hx||^2 + eta * sum_k ( ||w_k * x - z_k||^2 + lambda * ||z_k - mu_k||_1 )
inline double objective(const Image& y, const Image& x, const DegradationOp& op, const FilterBank& bank,
                        const FeatureMaps& z, const FeatureMaps& mu, double eta, double lambda)
{
    const Image residual = y - apply_h(op, x);
    const FeatureMaps wx = conv(bank, x);
    wx.require_same_layout(z, "objective");
    z.require_same_layout(mu, "objective");
    double fit = 0.0;
    double l1 = 0.0;
    for (int k = 0; k < z.count(); ++k) {
        const auto a = wx[k].pixels();
        const auto b = z[k].pixels();
        const auto m = mu[k].pixels();
        for (std::size_t i = 0; i < a.size(); ++i) {
            fit += (a[i] - b[i]) * (a[i] - b[i]);
            l1 += std::abs(b[i] - m[i]);
        }
    }
    return squared_norm(residual) + eta * (fit + lambda * l1);
}

} // namespace sasc
