#pragma once

// Structured analysis sparse coding restoration.
//
//   min_{x,z} ||y - Hx||^2 + eta * sum_k ( ||w_k * x - z_k||^2 + lambda ||z_k - mu_k||_1 )
//
// solved by alternating an exact z-update (shrinkage toward the prior mu)
// with a single gradient step on x. The prior mu blends an external CNN
// estimate with an internal nonlocal estimate.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "sasc/features.hpp"
#include "sasc/grid.hpp"
#include "sasc/nonlocal.hpp"
#include "sasc/ops.hpp"
#include "sasc/priornet.hpp"
#include "sasc/sparsity.hpp"
#include "sasc/stages.hpp"

namespace sasc {

enum class PriorMode { none, internal, external, hybrid };

inline std::string to_string(PriorMode m)
{
    switch (m) {
    case PriorMode::none: return "none";
    case PriorMode::internal: return "internal";
    case PriorMode::external: return "external";
    case PriorMode::hybrid: return "hybrid";
    }
    return "?";
}

inline PriorMode parse_prior_mode(const std::string& s)
{
    if (s == "none") return PriorMode::none;
    if (s == "internal") return PriorMode::internal;
    if (s == "external") return PriorMode::external;
    if (s == "hybrid") return PriorMode::hybrid;
    throw error("unknown prior mode '" + s + "' (expected none|internal|external|hybrid)");
}

inline bool uses_external(PriorMode m) noexcept { return m == PriorMode::external || m == PriorMode::hybrid; }
inline bool uses_internal(PriorMode m) noexcept { return m == PriorMode::internal || m == PriorMode::hybrid; }

struct SolverConfig {
    double eta = 0.2;
    double lambda = 0.0;
    double step = 0.0;    // 0 selects 0.9 / lambda_max by power iteration
    double mix = 0.5;     // weight of the external prior in mu
    int iterations = 30;
    NonlocalParams nonlocal;
    PriorMode prior = PriorMode::none;
    bool freeze_prior = false;    // keep mu from the initial estimate
    bool reweight_groups = true;  // recompute group weights from the current iterate on refresh
    int power_iterations = 50;

    void validate() const
    {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw error("config: eta must be > 0");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw error("config: lambda must be >= 0");
        if (!(step >= 0.0) || !std::isfinite(step)) throw error("config: step must be >= 0 (0 = automatic)");
        if (!(mix >= 0.0 && mix <= 1.0)) throw error("config: mix must lie in [0,1]");
        if (iterations < 1) throw error("config: iterations must be >= 1");
        if (power_iterations < 1) throw error("config: power_iterations must be >= 1");
    }
};

/// Denoising defaults for noise level sigma on the [0,1] scale: shrinkage
/// threshold lambda/2 = 1.2 sigma (filters are unit-norm, so noise responses
/// have std sigma) and h = 12 sigma.
inline SolverConfig default_config(double sigma)
{
    SolverConfig cfg;
    cfg.lambda = 2.4 * sigma;
    cfg.nonlocal.bandwidth = 12.0 * std::max(sigma, 1.0 / 255.0);
    return cfg;
}

/// One gradient step on x for fixed z:
/// x - step*[H^T(Hx - y) + eta*sum_k W_k^T(W_k x - z_k)]  ==  A x + step*H^T y + step*eta*sum_k W_k^T z_k
inline Image update_x(const Image& x, const Image& y, const DegradationOp& op, const FilterBank& bank,
                      const FeatureMaps& z, double step, double eta)
{
    Image out = apply_a(op, bank, x, step, eta);
    out.add_scaled(apply_h_adjoint(op, y), step);
    out.add_scaled(conv_adjoint(bank, z), step * eta);
    return out;
}

struct CgResult {
    Image x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Conjugate-gradient solve of (H^T H + eta sum_k W_k^T W_k) x = H^T y + eta sum_k W_k^T z_k from x = 0.
inline CgResult solve_x_exact(const Image& y, const DegradationOp& op, const FilterBank& bank, const FeatureMaps& z,
                              double eta, double tol, int max_iter)
{
    if (!(eta > 0.0)) throw error("solve_x_exact: eta must be > 0");
    if (!op.has_exact_adjoint()) throw error("solve_x_exact: operator has no exact adjoint; CG needs a symmetric system");
    if (max_iter < 1) throw error("solve_x_exact: max_iter must be >= 1");
    Image b = apply_h_adjoint(op, y);
    b.add_scaled(conv_adjoint(bank, z), eta);
    const double bnorm = std::sqrt(squared_norm(b));

    CgResult res{Image(b.height(), b.width()), 0, 0.0, false};
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    Image r = b;
    Image p = r;
    double rr = squared_norm(r);
    for (int it = 1; it <= max_iter; ++it) {
        const Image q = apply_normal(op, bank, p, eta);
        const double pq = dot(p, q);
        if (!std::isfinite(pq) || !std::isfinite(rr)) throw error("solve_x_exact: non-finite intermediate");
        if (pq <= 0.0) throw error("solve_x_exact: system is not positive definite");
        const double alpha = rr / pq;
        res.x.add_scaled(p, alpha);
        r.add_scaled(q, -alpha);
        const double rr_new = squared_norm(r);
        res.iterations = it;
        res.relative_residual = std::sqrt(rr_new) / bnorm;
        if (!std::isfinite(res.relative_residual)) throw error("solve_x_exact: non-finite intermediate");
        if (res.relative_residual < tol) {
            res.converged = true;
            break;
        }
        p *= rr_new / rr;
        p += r;
        rr = rr_new;
    }
    return res;
}

/// Initial estimate: the observation itself (bicubic-upscaled when H
/// downsamples), passed through the prior network when one is used.
inline Image initial_estimate(const Image& y, const DegradationOp& op, const PriorNetWeights* prior, PriorMode mode)
{
    const auto in = op.input_shape();
    Image base = op.downsamples() ? bicubic_resize(y, in.height, in.width) : y;
    if (uses_external(mode)) {
        if (prior == nullptr) throw error("prior mode " + to_string(mode) + " needs prior network weights");
        return infer(*prior, base);
    }
    return base;
}

/// Holds the image-domain priors (external CNN estimate, internal nonlocal
/// estimate) and turns them into feature-domain mu for a given bank.
class HybridPrior {
public:
    HybridPrior(PriorMode mode, double mix, const Image& initial, const NonlocalParams& nl, bool reweight,
                const std::optional<PatchGroupIndex>& index = std::nullopt)
        : mode_(mode), mix_(mix), reweight_(reweight)
    {
        if (uses_external(mode_)) external_ = initial;
        if (uses_internal(mode_)) {
            index_ = index ? *index : build_group_index(initial, nl);
            internal_ = nonlocal_image(initial, *index_);
        }
        shape_ = {initial.height(), initial.width()};
    }

    /// Recompute the internal estimate from the current iterate (memberships stay fixed).
    void refresh(const Image& x)
    {
        if (!uses_internal(mode_)) return;
        if (reweight_) *index_ = reweight_group_index(*index_, x);
        internal_ = nonlocal_image(x, *index_);
    }

    FeatureMaps features(const FilterBank& bank) const
    {
        switch (mode_) {
        case PriorMode::none: return FeatureMaps(bank.count(), shape_.height, shape_.width);
        case PriorMode::internal: return conv(bank, *internal_);
        case PriorMode::external: return conv(bank, *external_);
        case PriorMode::hybrid: return mix_prior(conv(bank, *external_), conv(bank, *internal_), mix_);
        }
        throw error("unreachable prior mode");
    }

    const std::optional<PatchGroupIndex>& index() const noexcept { return index_; }
    const std::optional<Image>& internal_estimate() const noexcept { return internal_; }

private:
    PriorMode mode_;
    double mix_;
    bool reweight_;
    Shape shape_;
    std::optional<Image> external_;
    std::optional<Image> internal_;
    std::optional<PatchGroupIndex> index_;
};

struct IterationState {
    int iteration = 0; // 1-based
    const Image& x;
    const FeatureMaps& z;
    const FeatureMaps& mu; // prior used for this iteration's z-update
};

using IterationObserver = std::function<void(const IterationState&)>;

inline double auto_step(const DegradationOp& op, const FilterBank& bank, double eta, int power_iterations)
{
    return 0.9 / power_iteration_lmax(op, bank, eta, power_iterations);
}

namespace detail {

inline void check_observation(const Image& y, const DegradationOp& op)
{
    if (Shape{y.height(), y.width()} != op.output_shape()) throw error("restore: observation shape does not match operator output");
    if (!y.all_finite()) throw error("restore: observation has non-finite pixels");
}

} // namespace detail

/// Alternating minimization with a hybrid structured prior.
inline Image restore(const Image& y, const DegradationOp& op, const FilterBank& bank, const SolverConfig& cfg,
                     const PriorNetWeights* prior = nullptr, const IterationObserver& observer = {})
{
    cfg.validate();
    detail::check_observation(y, op);
    if (uses_external(cfg.prior) && prior == nullptr) throw error("restore: prior network weights required for mode " + to_string(cfg.prior));
    if (uses_internal(cfg.prior)) detail::validate(cfg.nonlocal, op.input_shape());

    const double step = cfg.step > 0.0 ? cfg.step : auto_step(op, bank, cfg.eta, cfg.power_iterations);
    Image x = initial_estimate(y, op, prior, cfg.prior);
    HybridPrior hp(cfg.prior, cfg.mix, x, cfg.nonlocal, cfg.reweight_groups);
    FeatureMaps mu = hp.features(bank);
    const Image hty = apply_h_adjoint(op, y);

    for (int t = 1; t <= cfg.iterations; ++t) {
        const FeatureMaps z = update_features(conv(bank, x), mu, cfg.lambda);
        Image next = apply_a(op, bank, x, step, cfg.eta);
        next.add_scaled(hty, step);
        next.add_scaled(conv_adjoint(bank, z), step * cfg.eta);
        x = std::move(next);
        if (!x.all_finite()) throw error("restore: iterate diverged (non-finite values); reduce the step size");
        if (observer) observer({t, x, z, mu});
        if (!cfg.freeze_prior) {
            hp.refresh(x);
            mu = hp.features(bank);
        }
    }
    return x;
}

struct StagedOptions {
    PriorMode prior = PriorMode::none;
    double mix = 0.5;
    NonlocalParams nonlocal;
    bool freeze_prior = false;
    bool reweight_groups = true;
    std::optional<PatchGroupIndex> index; // reuse a prebuilt group index instead of building one
};

/// Unrolled execution: each stage applies
///   z = mu + S_tau(W x - mu);   x = A x + step H^T y + step eta sum_k R_k^T z_k
/// with its own analysis bank W, reconstruction bank R, thresholds, step and eta.
inline Image restore_staged(const Image& y, const DegradationOp& op, const StageParams& stages,
                            const PriorNetWeights* prior = nullptr, const StagedOptions& opt = {},
                            const IterationObserver& observer = {})
{
    stages.validate();
    detail::check_observation(y, op);
    if (!(opt.mix >= 0.0 && opt.mix <= 1.0)) throw error("restore_staged: mix must lie in [0,1]");
    if (uses_external(opt.prior) && prior == nullptr) throw error("restore_staged: prior network weights required for mode " + to_string(opt.prior));
    if (uses_internal(opt.prior) && !opt.index) detail::validate(opt.nonlocal, op.input_shape());

    Image x = initial_estimate(y, op, prior, opt.prior);
    HybridPrior hp(opt.prior, opt.mix, x, opt.nonlocal, opt.reweight_groups, opt.index);
    const Image hty = apply_h_adjoint(op, y);

    int t = 0;
    for (const auto& s : stages.stages) {
        const FeatureMaps mu = hp.features(s.analysis);
        const FeatureMaps z = shrink_toward(conv(s.analysis, x), mu, s.thresholds);
        Image next = apply_a(op, s.analysis, x, s.step, s.eta);
        next.add_scaled(hty, s.step);
        next.add_scaled(conv_adjoint(s.reconstruction, z), s.step * s.eta);
        x = std::move(next);
        if (!x.all_finite()) throw error("restore_staged: iterate diverged (non-finite values)");
        if (observer) observer({++t, x, z, mu});
        if (!opt.freeze_prior) hp.refresh(x);
    }
    return x;
}

} // namespace sasc
