#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "varprop/errors.hpp"
#include "varprop/quadrature.hpp"

namespace varprop {

// Wide-network correlation map and the per-layer statistics it predicts.
//
// The map is
//     K(c) = 2 E[ relu(z1) * relu(c z1 + sqrt(1-c^2) z2) ],  z1, z2 ~ N(0,1),
// evaluated by a tensor-product quadrature over the two-dimensional standard
// normal measure written in polar coordinates:
//
//     K(c) = (1/pi) int_0^{2pi} da int_0^inf relu(r cos a) relu(r cos(a-theta))
//                                  e^{-r^2/2} r dr,       theta = acos(c).
//
// The substitution t = r^2/2 turns the radial factor into a Gauss-Laguerre
// integral; the angular integral splits the circle at the four angles where
// either relu argument changes sign (independent of r, since both arguments
// are linear in r), so each arc carries a smooth integrand for the
// Gauss-Legendre rule. The kinks of relu are therefore resolved exactly and
// the rule converges at machine precision for moderate node counts.

struct MeanFieldTrajectory {
    int depth = 0;              // L
    std::vector<double> c;      // size depth+1, c[0] = starting correlation
    std::vector<double> m_sq;   // size depth; m_sq[l] = 2 c[l+1]
    std::vector<double> v_sq;   // size depth; v_sq[l] = 2 (1 - c[l+1])
    double sigma_sq = 2.0;      // total second moment for unit-variance inputs
};

struct BnPredictions {
    double sigma_s = 0.0; // predicted batch-norm divisor sqrt(1 - K(0))
    double slope = 0.0;   // predicted slope of log mean-squared gradient vs layer
};

namespace detail {

inline constexpr double kPi = std::numbers::pi_v<double>;
// Interior clamp keeps theta = acos(c) well defined and the fixed point c = 1
// representable as a limit.
inline constexpr double kInteriorClamp = 1.0 - 1e-12;

inline double k_map_clamped(double c, const GaussRule& radial, const GaussRule& angular) {
    const double theta = std::acos(c);

    // sum_i w_i * (sqrt(2 t_i))^2 = 2 sum_i w_i t_i; both relu arguments are
    // linear in r, so the radial sum factors out of the angular loop.
    double radial_moment = 0.0;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i)
        radial_moment += radial.weights[i] * 2.0 * radial.nodes[i];

    // Kink angles of relu(r cos a) * relu(r cos(a - theta)), folded into
    // [0, 2pi) and sorted; integrate each arc separately.
    std::array<double, 4> kinks = {-kPi / 2.0, kPi / 2.0, theta - kPi / 2.0, theta + kPi / 2.0};
    for (double& a : kinks) {
        a = std::fmod(a, 2.0 * kPi);
        if (a < 0.0) a += 2.0 * kPi;
    }
    std::sort(kinks.begin(), kinks.end());

    double total = 0.0;
    for (std::size_t arc = 0; arc < kinks.size(); ++arc) {
        const double a0 = kinks[arc];
        const double a1 = (arc + 1 < kinks.size()) ? kinks[arc + 1] : kinks[0] + 2.0 * kPi;
        const double half = 0.5 * (a1 - a0);
        const double mid = 0.5 * (a0 + a1);
        if (!(half > 0.0)) continue;
        double arc_sum = 0.0;
        for (std::size_t j = 0; j < angular.nodes.size(); ++j) {
            const double alpha = mid + half * angular.nodes[j];
            const double ca = std::cos(alpha);
            const double cb = std::cos(alpha - theta);
            if (ca > 0.0 && cb > 0.0) arc_sum += angular.weights[j] * ca * cb;
        }
        total += half * arc_sum;
    }
    return total * radial_moment / kPi;
}

inline double clamp_correlation(double c, const QuadratureConfig& q) {
    if (std::abs(c) > 1.0 + q.clamp_tolerance)
        throw domain_error("correlation " + std::to_string(c) + " outside [-1,1] beyond tolerance");
    c = std::clamp(c, -1.0, 1.0);
    return std::clamp(c, -kInteriorClamp, kInteriorClamp);
}

} // namespace detail

/// One application of the correlation map K. Deterministic given (c, q);
/// maps [-1,1] into [0,1].
inline double k_map(double c, const QuadratureConfig& q = {}) {
    q.validate();
    const double cc = detail::clamp_correlation(c, q);
    const auto radial = detail::cached_laguerre(q.node_count);
    const auto angular = detail::cached_legendre(q.node_count);
    return detail::k_map_clamped(cc, *radial, *angular);
}

/// c0, K(c0), K(K(c0)), ... up to depth applications.
inline std::vector<double> iterate_k(double c0, int depth, const QuadratureConfig& q = {}) {
    q.validate();
    if (depth < 1) throw config_error("iterate_k: depth must be >= 1");
    if (std::abs(c0) > 1.0 + q.clamp_tolerance)
        throw domain_error("iterate_k: starting correlation outside [-1,1]");
    const auto radial = detail::cached_laguerre(q.node_count);
    const auto angular = detail::cached_legendre(q.node_count);
    std::vector<double> c(static_cast<std::size_t>(depth) + 1);
    c[0] = std::clamp(c0, -1.0, 1.0);
    double cur = c[0];
    for (int l = 0; l < depth; ++l) {
        const double clamped = std::clamp(cur, -detail::kInteriorClamp, detail::kInteriorClamp);
        cur = detail::k_map_clamped(clamped, *radial, *angular);
        c[static_cast<std::size_t>(l) + 1] = cur;
    }
    return c;
}

/// Theoretical per-layer sample statistics for IID unit-variance inputs
/// (starting correlation 0, total second moment 2).
inline MeanFieldTrajectory trajectory(int depth, const QuadratureConfig& q = {}) {
    MeanFieldTrajectory t;
    t.depth = depth;
    t.c = iterate_k(0.0, depth, q);
    t.sigma_sq = 2.0;
    t.m_sq.resize(static_cast<std::size_t>(depth));
    t.v_sq.resize(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
        const double cl = t.c[static_cast<std::size_t>(l) + 1];
        t.m_sq[static_cast<std::size_t>(l)] = 2.0 * cl;
        t.v_sq[static_cast<std::size_t>(l)] = 2.0 * (1.0 - cl);
    }
    return t;
}

/// dK/dc at c strictly inside (-1,1), by central finite differences
/// (one-sided second-order near the endpoints so no evaluation leaves the
/// domain).
inline double k_derivative(double c, const QuadratureConfig& q = {}) {
    q.validate();
    if (!(std::abs(c) < 1.0))
        throw domain_error("k_derivative: |c| must be < 1 (endpoint derivative is a limit)");
    const double h = 1e-6;
    const auto radial = detail::cached_laguerre(q.node_count);
    const auto angular = detail::cached_legendre(q.node_count);
    auto k = [&](double x) {
        return detail::k_map_clamped(std::clamp(x, -detail::kInteriorClamp, detail::kInteriorClamp), *radial,
                                     *angular);
    };
    if (c + h <= 1.0 && c - h >= -1.0)
        return (k(c + h) - k(c - h)) / (2.0 * h);
    if (c > 0.0) // near +1: backward one-sided
        return (3.0 * k(c) - 4.0 * k(c - h) + k(c - 2.0 * h)) / (2.0 * h);
    return (-3.0 * k(c) + 4.0 * k(c + h) - k(c + 2.0 * h)) / (2.0 * h);
}

/// sqrt(m_sq[l] / v_sq[l]); strictly increasing in l.
inline double theoretical_ratio(const MeanFieldTrajectory& traj, int l) {
    if (l < 0 || l >= traj.depth)
        throw domain_error("theoretical_ratio: layer index out of range");
    const double v = traj.v_sq[static_cast<std::size_t>(l)];
    if (!(v > 0.0)) throw degeneracy_error("theoretical_ratio: v_sq is zero at layer " + std::to_string(l));
    return std::sqrt(traj.m_sq[static_cast<std::size_t>(l)] / v);
}

/// Batch-norm predictions: the divisor sigma_s = sqrt(1 - K(0)) and the slope
/// log(sigma_s^2) of log mean-squared activation gradients vs layer index
/// (negative: gradients grow toward the input).
inline BnPredictions bn_predictions(const QuadratureConfig& q = {}) {
    const double k0 = k_map(0.0, q);
    BnPredictions p;
    p.sigma_s = std::sqrt(1.0 - k0);
    p.slope = -std::log(1.0 / (1.0 - k0));
    return p;
}

} // namespace varprop
