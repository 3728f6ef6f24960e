#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "varprop/errors.hpp"
#include "varprop/network.hpp"
#include "varprop/rng.hpp"

namespace varprop {

// Empirical estimators for the per-layer sample statistics and the
// mean-to-standard-deviation ratio. Population (divide-by-T) variance
// throughout: only then does mhat_sq + vhat_sq = pooled_sq hold exactly.

struct LayerStatsRecord {
    std::vector<double> mhat_sq;      // feature-averaged squared sample mean
    std::vector<double> vhat_sq;      // feature-averaged sample variance
    std::vector<double> pooled_sq;    // pooled second moment
    std::vector<double> r;            // sqrt(mhat_sq / vhat_sq); +inf when degenerate
    std::vector<std::uint8_t> degenerate; // 1 where vhat_sq == 0

    int depth() const { return static_cast<int>(r.size()); }
};

struct EnsembleSummary {
    std::vector<double> r_mean;            // over non-degenerate networks
    std::vector<double> r_std;             // population convention
    std::vector<int> degenerate_count;     // excluded networks per layer
    int networks = 0;
    std::vector<int> widths;
    int depth = 0;
};

/// Per-layer statistics of a forward record. With batchnorm on, statistics
/// are computed on the normalized pre-activations by default; use_raw_u
/// switches to the raw u^l.
inline LayerStatsRecord layer_stats(const ForwardRecord& rec, bool use_raw_u = false) {
    const Eigen::Index t_count = rec.samples();
    if (t_count < 2) throw insufficient_batch_error("layer_stats: need at least 2 samples");
    LayerStatsRecord out;
    const int depth = rec.depth();
    out.mhat_sq.reserve(static_cast<std::size_t>(depth));
    for (int l = 1; l <= depth; ++l) {
        const Eigen::MatrixXd& a = use_raw_u ? rec.u[static_cast<std::size_t>(l - 1)] : rec.normalized(l);
        const double n = static_cast<double>(a.rows());
        const double t = static_cast<double>(t_count);
        const Eigen::VectorXd mean = a.rowwise().mean();
        const double pooled = a.squaredNorm() / (n * t);
        const double mhat = mean.squaredNorm() / n;
        const double vhat = (a.colwise() - mean).squaredNorm() / (n * t);
        if (std::abs(mhat + vhat - pooled) > 1e-10 * std::max(1.0, pooled))
            throw consistency_error("layer_stats: decomposition identity violated at layer " + std::to_string(l));
        out.mhat_sq.push_back(mhat);
        out.vhat_sq.push_back(vhat);
        out.pooled_sq.push_back(pooled);
        // relative threshold absorbs the ulp-level residue a constant batch
        // leaves in the centered sum
        if (vhat > 1e-12 * pooled) {
            out.r.push_back(std::sqrt(mhat / vhat));
            out.degenerate.push_back(0);
        } else {
            out.r.push_back(std::numeric_limits<double>::infinity());
            out.degenerate.push_back(1);
        }
    }
    return out;
}

/// Per-layer mean and standard deviation of r over networks, in input order;
/// degenerate ratios are excluded and counted.
inline EnsembleSummary aggregate(std::span<const LayerStatsRecord> records) {
    if (records.size() < 2) throw consistency_error("aggregate: need at least 2 records");
    const int depth = records[0].depth();
    for (const auto& rec : records)
        if (rec.depth() != depth) throw consistency_error("aggregate: records have mismatched depth");

    EnsembleSummary s;
    s.networks = static_cast<int>(records.size());
    s.depth = depth;
    s.r_mean.resize(static_cast<std::size_t>(depth), 0.0);
    s.r_std.resize(static_cast<std::size_t>(depth), 0.0);
    s.degenerate_count.resize(static_cast<std::size_t>(depth), 0);
    for (int l = 0; l < depth; ++l) {
        double sum = 0.0, sumsq = 0.0;
        int n = 0;
        for (const auto& rec : records) {
            if (rec.degenerate[static_cast<std::size_t>(l)]) {
                ++s.degenerate_count[static_cast<std::size_t>(l)];
                continue;
            }
            const double v = rec.r[static_cast<std::size_t>(l)];
            sum += v;
            sumsq += v * v;
            ++n;
        }
        if (n > 0) {
            const double mean = sum / n;
            s.r_mean[static_cast<std::size_t>(l)] = mean;
            s.r_std[static_cast<std::size_t>(l)] = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
        } else {
            s.r_mean[static_cast<std::size_t>(l)] = std::numeric_limits<double>::infinity();
            s.r_std[static_cast<std::size_t>(l)] = 0.0;
        }
    }
    return s;
}

struct MomentShift {
    double mean_shift = 0.0;          // mean(relu(x)) - mean(x), always >= 0
    double second_moment_shift = 0.0; // meansq(relu(x)) - meansq(x), always <= 0
};

inline MomentShift relu_moment_shift(std::span<const double> samples) {
    if (samples.empty()) throw config_error("relu_moment_shift: need at least one sample");
    double sum = 0.0, sumsq = 0.0, rsum = 0.0, rsumsq = 0.0;
    for (double x : samples) {
        const double r = x > 0.0 ? x : 0.0;
        sum += x;
        sumsq += x * x;
        rsum += r;
        rsumsq += r * r;
    }
    const double n = static_cast<double>(samples.size());
    return {(rsum - sum) / n, (rsumsq - sumsq) / n};
}

struct RatioPreservation {
    double lhs = 0.0;    // Monte Carlo: mean numerator / mean denominator over random W
    double rhs = 0.0;    // the batch's own squared-mean to variance ratio
    double lhs_se = 0.0; // delta-method standard error of lhs
    int trials = 0;
};

/// Monte Carlo check that multiplication by a square IID unit-normal matrix
/// preserves the batch ratio on average: numerator and denominator are each
/// averaged over `trials` random matrices before taking the quotient.
inline RatioPreservation ratio_preservation_check(const SampleBatch& batch, int trials, std::uint64_t seed) {
    if (batch.samples() < 2) throw config_error("ratio_preservation_check: need at least 2 samples");
    if (trials < 1) throw config_error("ratio_preservation_check: trials must be >= 1");

    const Eigen::MatrixXd& x = batch.features_by_samples(); // n x T
    const Eigen::Index n = x.rows();
    const double t = static_cast<double>(batch.samples());

    const Eigen::VectorXd xbar = x.rowwise().mean();
    const double num_rhs = xbar.squaredNorm();
    const double den_rhs = x.squaredNorm() / t - num_rhs;
    if (!(den_rhs > 0.0)) throw degeneracy_error("ratio_preservation_check: batch has zero sample variance");

    RatioPreservation out;
    out.trials = trials;
    out.rhs = num_rhs / den_rhs;

    double num_sum = 0.0, den_sum = 0.0;
    double num_sumsq = 0.0, den_sumsq = 0.0, cross_sum = 0.0;
    for (int k = 0; k < trials; ++k) {
        const Eigen::MatrixXd w =
            standard_normal_matrix(n, n, derive_seed(seed, {fnv1a("ratio-w"), static_cast<std::uint64_t>(k)}));
        const double num = (w * xbar).squaredNorm();
        const double den = (w * x).squaredNorm() / t - num;
        num_sum += num;
        den_sum += den;
        num_sumsq += num * num;
        den_sumsq += den * den;
        cross_sum += num * den;
    }
    const double kk = static_cast<double>(trials);
    const double num_mean = num_sum / kk;
    const double den_mean = den_sum / kk;
    if (!(den_mean > 0.0)) throw degeneracy_error("ratio_preservation_check: zero Monte Carlo denominator");
    out.lhs = num_mean / den_mean;

    // delta method for the ratio of means
    const double var_num = std::max(0.0, num_sumsq / kk - num_mean * num_mean);
    const double var_den = std::max(0.0, den_sumsq / kk - den_mean * den_mean);
    const double cov = cross_sum / kk - num_mean * den_mean;
    const double v =
        (var_num - 2.0 * out.lhs * cov + out.lhs * out.lhs * var_den) / (den_mean * den_mean);
    out.lhs_se = std::sqrt(std::max(0.0, v) / kk);
    return out;
}

} // namespace varprop
