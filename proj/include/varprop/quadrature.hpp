#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "varprop/errors.hpp"

namespace varprop {

struct QuadratureConfig {
    int node_count = 64;           // nodes per quadrature axis
    double clamp_tolerance = 1e-9; // how far outside [-1,1] a correlation may stray

    void validate() const {
        if (node_count < 16)
            throw config_error("node_count must be >= 16, got " + std::to_string(node_count));
        if (!(clamp_tolerance >= 0.0) || clamp_tolerance > 1e-6)
            throw config_error("clamp_tolerance must be in [0, 1e-6]");
    }
};

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix of the
// orthogonal-polynomial recurrence, weights are mu0 * (first eigenvector
// component)^2.
inline GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
    const Eigen::Index n = diag.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        j(i, i) = diag(i);
        if (i + 1 < n) {
            j(i, i + 1) = offdiag(i);
            j(i + 1, i) = offdiag(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

} // namespace detail

// Gauss-Legendre on [-1, 1] with unit weight.
inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw config_error("gauss_legendre: need n >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        off(k - 1) = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    return detail::golub_welsch(diag, off, 2.0);
}

// Gauss-Laguerre: integral_0^inf e^{-t} g(t) dt ~= sum w_i g(t_i).
inline GaussRule gauss_laguerre(int n) {
    if (n < 1) throw config_error("gauss_laguerre: need n >= 1");
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(n > 1 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off(k - 1) = static_cast<double>(k);
    return detail::golub_welsch(diag, off, 1.0);
}

namespace detail {

// Rules are pure functions of the node count; memoize behind a mutex so that
// grid sweeps do not re-run the eigensolver per call.
inline std::shared_ptr<const GaussRule> cached_rule(int n, GaussRule (*make)(int),
                                                    std::map<int, std::shared_ptr<const GaussRule>>& cache,
                                                    std::mutex& mu) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto rule = std::make_shared<const GaussRule>(make(n));
    cache.emplace(n, rule);
    return rule;
}

inline std::shared_ptr<const GaussRule> cached_legendre(int n) {
    static std::map<int, std::shared_ptr<const GaussRule>> cache;
    static std::mutex mu;
    return cached_rule(n, &gauss_legendre, cache, mu);
}

inline std::shared_ptr<const GaussRule> cached_laguerre(int n) {
    static std::map<int, std::shared_ptr<const GaussRule>> cache;
    static std::mutex mu;
    return cached_rule(n, &gauss_laguerre, cache, mu);
}

} // namespace detail

} // namespace varprop
