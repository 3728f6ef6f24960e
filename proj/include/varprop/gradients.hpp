#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "varprop/errors.hpp"
#include "varprop/network.hpp"
#include "varprop/rng.hpp"

namespace varprop {

// Reverse-mode differentiation through the relu MLP under a random linear
// loss, producing per-layer mean squared activation gradients.

struct GradientTrace {
    NetworkSpec spec;
    std::uint64_t loss_seed = 0;
    std::vector<double> g2; // g2[l] = mean over samples and features of (dL/dx^l)^2, l = 0..L
};

enum class BnBackward {
    full,        // backpropagate through the batch mean and variance
    frozen_stats // treat mu_s, sigma_s as constants
};

/// Gradient of the loss L = w . x^L at the output activations: w drawn IID
/// standard normal from w_seed, identical for every sample row.
inline Eigen::MatrixXd random_linear_loss_grad(const Eigen::MatrixXd& x_out, std::uint64_t w_seed) {
    const Eigen::VectorXd w = standard_normal_vector(x_out.rows(), derive_seed(w_seed, {fnv1a("loss-w")}));
    return w.replicate(1, x_out.cols());
}

/// Backpropagate out_grad (n^L x T, = dL/dx^L) through the recorded forward
/// pass. Relu uses the mask u_hat > 0 (subgradient 0 at exactly 0); with
/// batchnorm the full backward pass through the batch statistics is the
/// default.
inline GradientTrace backward(const DenseNet& net, const ForwardRecord& rec, const Eigen::MatrixXd& out_grad,
                              BnBackward mode = BnBackward::full, std::uint64_t loss_seed = 0) {
    const NetworkSpec& spec = net.spec();
    if (rec.spec.widths != spec.widths || rec.spec.batchnorm != spec.batchnorm)
        throw consistency_error("backward: forward record does not match the network");
    const int depth = spec.depth();
    if (rec.depth() != depth) throw consistency_error("backward: record depth mismatch");
    const Eigen::Index t_count = rec.samples();
    if (out_grad.rows() != spec.widths[static_cast<std::size_t>(depth)] || out_grad.cols() != t_count)
        throw dimension_error("backward: out_grad must be n^L x T");

    GradientTrace trace;
    trace.spec = spec;
    trace.loss_seed = loss_seed;
    trace.g2.assign(static_cast<std::size_t>(depth) + 1, 0.0);

    Eigen::MatrixXd g = out_grad;
    trace.g2[static_cast<std::size_t>(depth)] = g.squaredNorm() / static_cast<double>(g.size());

    for (int l = depth; l >= 1; --l) {
        const Eigen::MatrixXd& uh = rec.normalized(l);
        g = (uh.array() > 0.0).select(g, 0.0);
        if (spec.batchnorm) {
            const Eigen::VectorXd& sigma = rec.bn_std[static_cast<std::size_t>(l - 1)];
            const Eigen::VectorXd denom = (sigma.array().square() + spec.bn_epsilon).sqrt().matrix();
            if (mode == BnBackward::full) {
                const double inv_t = 1.0 / static_cast<double>(t_count);
                const Eigen::VectorXd g_mean = g.rowwise().sum() * inv_t;
                const Eigen::VectorXd gu_mean = ((g.array() * uh.array()).rowwise().sum() * inv_t).matrix();
                g = denom.cwiseInverse().asDiagonal() *
                    ((g.colwise() - g_mean) - gu_mean.asDiagonal() * uh);
            } else {
                g = denom.cwiseInverse().asDiagonal() * g;
            }
        }
        g = net.weight(l).transpose() * g;
        trace.g2[static_cast<std::size_t>(l - 1)] = g.squaredNorm() / static_cast<double>(g.size());
    }
    return trace;
}

/// Ordinary least-squares slope of log g2[l] against l over [l_min, l_max].
inline double gradient_slope(const GradientTrace& trace, int l_min, int l_max) {
    const int depth = static_cast<int>(trace.g2.size()) - 1;
    if (!(0 <= l_min && l_min < l_max && l_max <= depth))
        throw domain_error("gradient_slope: need 0 <= l_min < l_max <= depth");
    const int n = l_max - l_min + 1;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int l = l_min; l <= l_max; ++l) {
        const double v = trace.g2[static_cast<std::size_t>(l)];
        if (!(v > 0.0)) throw degeneracy_error("gradient_slope: g2 is zero at layer " + std::to_string(l));
        const double x = static_cast<double>(l);
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// Default fit window for depth-L traces: boundary layers are excluded, and
/// for deep networks the last 15 hidden layers as well; the backward pass
/// needs that long to equilibrate at finite width, and including the
/// transient biases the slope toward zero.
inline std::pair<int, int> default_slope_fit_range(int depth) {
    if (depth <= 3) return {0, depth};
    const int l_max = depth > 30 ? depth - 15 : depth - 1;
    return {1, l_max};
}

} // namespace varprop
