#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "varprop/errors.hpp"
#include "varprop/rng.hpp"

namespace varprop {

// Finite-width relu MLP: construction, forward propagation with optional
// batch normalization, and the data-dependent scale / scale+bias
// initializers.
//
// Matrices touching samples are stored features-by-samples (one column per
// sample); the logical orientation in file formats is samples-by-rows as
// documented in the README.

enum class InitScheme { kaiming, scale, scale_bias };

inline std::string to_string(InitScheme s) {
    switch (s) {
        case InitScheme::kaiming: return "kaiming";
        case InitScheme::scale: return "scale";
        case InitScheme::scale_bias: return "scale_bias";
    }
    return "unknown";
}

struct NetworkSpec {
    std::vector<int> widths;   // [n^0, n^1, ..., n^L]
    InitScheme init_scheme = InitScheme::kaiming;
    bool batchnorm = false;
    std::uint64_t seed = 0;
    double bn_epsilon = 1e-5;

    int depth() const { return static_cast<int>(widths.size()) - 1; }

    void validate() const {
        if (widths.size() < 2) throw config_error("NetworkSpec: need at least one layer (widths.size() >= 2)");
        for (int w : widths)
            if (w < 1) throw config_error("NetworkSpec: all widths must be >= 1");
        if (!(bn_epsilon > 0.0)) throw config_error("NetworkSpec: bn_epsilon must be positive");
    }
};

class SampleBatch {
public:
    SampleBatch() = default;

    // data: n x T, one column per sample
    explicit SampleBatch(Eigen::MatrixXd features_by_samples) : m_(std::move(features_by_samples)) {
        if (m_.cols() < 1) throw config_error("SampleBatch: need at least one sample");
    }

    static SampleBatch standard_normal(int samples, int dim, std::uint64_t seed) {
        return SampleBatch(standard_normal_matrix(dim, samples, seed));
    }

    Eigen::Index samples() const { return m_.cols(); }
    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXd& features_by_samples() const { return m_; }

    // logical (sample, feature) indexing
    double operator()(Eigen::Index t, Eigen::Index i) const { return m_(i, t); }

private:
    Eigen::MatrixXd m_;
};

class DenseNet {
public:
    DenseNet() = default;
    DenseNet(NetworkSpec spec, std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
        : spec_(std::move(spec)), weights_(std::move(weights)), biases_(std::move(biases)) {
        spec_.validate();
        const int depth = spec_.depth();
        if (static_cast<int>(weights_.size()) != depth || static_cast<int>(biases_.size()) != depth)
            throw dimension_error("DenseNet: layer count mismatch");
        for (int l = 1; l <= depth; ++l) {
            const auto& w = weights_[static_cast<std::size_t>(l - 1)];
            if (w.rows() != spec_.widths[static_cast<std::size_t>(l)] ||
                w.cols() != spec_.widths[static_cast<std::size_t>(l - 1)])
                throw dimension_error("DenseNet: weight shape mismatch at layer " + std::to_string(l));
            if (biases_[static_cast<std::size_t>(l - 1)].size() != spec_.widths[static_cast<std::size_t>(l)])
                throw dimension_error("DenseNet: bias length mismatch at layer " + std::to_string(l));
        }
    }

    const NetworkSpec& spec() const { return spec_; }
    int depth() const { return spec_.depth(); }

    // layer index l in [1, depth]
    const Eigen::MatrixXd& weight(int l) const { return weights_[check_layer(l)]; }
    const Eigen::VectorXd& bias(int l) const { return biases_[check_layer(l)]; }
    Eigen::MatrixXd& weight(int l) { return weights_[check_layer(l)]; }
    Eigen::VectorXd& bias(int l) { return biases_[check_layer(l)]; }

private:
    std::size_t check_layer(int l) const {
        if (l < 1 || l > depth()) throw dimension_error("DenseNet: layer index out of range");
        return static_cast<std::size_t>(l - 1);
    }

    NetworkSpec spec_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

struct ForwardRecord {
    NetworkSpec spec;
    std::vector<Eigen::MatrixXd> x;       // x[0..L], n^l x T (x[0] = inputs)
    std::vector<Eigen::MatrixXd> u;       // pre-activations u^l, index l-1
    std::vector<Eigen::MatrixXd> u_hat;   // normalized pre-activations; empty when batchnorm off
    std::vector<Eigen::VectorXd> bn_mean; // per-feature batch means (batchnorm only)
    std::vector<Eigen::VectorXd> bn_std;  // per-feature batch standard deviations (batchnorm only)

    int depth() const { return static_cast<int>(u.size()); }
    Eigen::Index samples() const { return x.empty() ? 0 : x[0].cols(); }

    // u_hat when batchnorm is on, otherwise u itself
    const Eigen::MatrixXd& normalized(int l) const {
        if (l < 1 || l > depth()) throw dimension_error("ForwardRecord: layer index out of range");
        return spec.batchnorm ? u_hat[static_cast<std::size_t>(l - 1)] : u[static_cast<std::size_t>(l - 1)];
    }
};

namespace detail {

// Per-layer weight streams split off the network seed, so deepening a network
// leaves shallower layers' weights untouched.
inline std::uint64_t layer_weight_seed(std::uint64_t net_seed, int layer) {
    return derive_seed(net_seed, {fnv1a("weights"), static_cast<std::uint64_t>(layer)});
}

inline DenseNet draw_network(const NetworkSpec& spec, double weight_scale_mode) {
    spec.validate();
    const int depth = spec.depth();
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    weights.reserve(static_cast<std::size_t>(depth));
    biases.reserve(static_cast<std::size_t>(depth));
    for (int l = 1; l <= depth; ++l) {
        const Eigen::Index rows = spec.widths[static_cast<std::size_t>(l)];
        const Eigen::Index cols = spec.widths[static_cast<std::size_t>(l - 1)];
        Eigen::MatrixXd w = standard_normal_matrix(rows, cols, layer_weight_seed(spec.seed, l));
        if (weight_scale_mode > 0.0) w *= std::sqrt(weight_scale_mode / static_cast<double>(cols));
        weights.push_back(std::move(w));
        biases.emplace_back(Eigen::VectorXd::Zero(rows));
    }
    return DenseNet(spec, std::move(weights), std::move(biases));
}

} // namespace detail

/// Kaiming initialization: W^l ~ N(0, 2/n^{l-1}), zero biases, fully
/// determined by spec.seed.
inline DenseNet kaiming_init(const NetworkSpec& spec) {
    if (spec.init_scheme != InitScheme::kaiming)
        throw config_error("kaiming_init: spec.init_scheme must be kaiming");
    return detail::draw_network(spec, 2.0);
}

/// Unit-normal draw (W^l ~ N(0,1), zero biases): the starting point for the
/// data-dependent scale and scale+bias initializers.
inline DenseNet unit_normal_init(const NetworkSpec& spec) {
    return detail::draw_network(spec, -1.0);
}

/// Forward propagation. With batchnorm on, pre-activations are standardized
/// per feature using batch statistics (unit scale, zero shift); all
/// intermediate matrices are retained.
inline ForwardRecord forward(const DenseNet& net, const SampleBatch& batch) {
    const NetworkSpec& spec = net.spec();
    if (batch.dim() != spec.widths[0])
        throw dimension_error("forward: batch feature count " + std::to_string(batch.dim()) +
                              " != input width " + std::to_string(spec.widths[0]));
    const Eigen::Index t_count = batch.samples();
    if (spec.batchnorm && t_count < 2)
        throw insufficient_batch_error("forward: batchnorm needs at least 2 samples");

    ForwardRecord rec;
    rec.spec = spec;
    const int depth = spec.depth();
    rec.x.reserve(static_cast<std::size_t>(depth) + 1);
    rec.u.reserve(static_cast<std::size_t>(depth));
    rec.x.push_back(batch.features_by_samples());

    for (int l = 1; l <= depth; ++l) {
        Eigen::MatrixXd u = net.weight(l) * rec.x.back();
        u.colwise() += net.bias(l);
        if (spec.batchnorm) {
            const Eigen::VectorXd mean = u.rowwise().mean();
            Eigen::MatrixXd centered = u.colwise() - mean;
            const Eigen::VectorXd var =
                (centered.array().square().rowwise().sum() / static_cast<double>(t_count)).matrix();
            const Eigen::VectorXd denom = (var.array() + spec.bn_epsilon).sqrt().matrix();
            Eigen::MatrixXd uh = denom.cwiseInverse().asDiagonal() * centered;
            rec.bn_mean.push_back(mean);
            rec.bn_std.push_back(var.array().sqrt().matrix());
            rec.x.push_back(uh.cwiseMax(0.0));
            rec.u.push_back(std::move(u));
            rec.u_hat.push_back(std::move(uh));
        } else {
            rec.x.push_back(u.cwiseMax(0.0));
            rec.u.push_back(std::move(u));
        }
    }
    return rec;
}

namespace detail {

// epsilon in the per-layer rescale factor 1/sqrt(sigma_B^2 + eps)
inline constexpr double kScaleEpsilon = 1e-5;

// Shared driver for the two data-dependent initializers. Proceeds layer by
// layer; layer l statistics are computed with layers 1..l-1 already
// finalized, which a single pass achieves because rescaling W^l (and b^l)
// rescales u^l linearly.
inline DenseNet data_dependent_init(DenseNet net, std::span<const SampleBatch> calibration, bool center_bias) {
    const NetworkSpec& spec = net.spec();
    if (calibration.empty()) throw config_error("scale init: calibration data must be nonempty");
    if (spec.batchnorm)
        throw config_error("scale init: not defined for batchnorm networks");
    for (const auto& b : calibration)
        if (b.dim() != spec.widths[0])
            throw dimension_error("scale init: calibration batch dimension mismatch");

    const int depth = spec.depth();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(calibration.size());
    Eigen::Index total_samples = 0;
    for (const auto& b : calibration) {
        acts.push_back(b.features_by_samples());
        total_samples += b.samples();
    }

    for (int l = 1; l <= depth; ++l) {
        std::vector<Eigen::MatrixXd> us;
        us.reserve(acts.size());
        for (const auto& x : acts) {
            Eigen::MatrixXd u = net.weight(l) * x;
            u.colwise() += net.bias(l);
            us.push_back(std::move(u));
        }

        if (center_bias) {
            // per-feature mean over all calibration samples
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(net.weight(l).rows());
            for (const auto& u : us) mean += u.rowwise().sum();
            mean /= static_cast<double>(total_samples);
            net.bias(l) -= mean;
            for (auto& u : us) u.colwise() -= mean;
        }

        // pooled second moment over all features and calibration samples
        double ssq = 0.0;
        for (const auto& u : us) ssq += u.squaredNorm();
        const double sigma_b_sq =
            ssq / (static_cast<double>(net.weight(l).rows()) * static_cast<double>(total_samples));
        const double gain = 1.0 / std::sqrt(sigma_b_sq + kScaleEpsilon);

        net.weight(l) *= gain;
        if (center_bias) net.bias(l) *= gain;

        for (std::size_t i = 0; i < acts.size(); ++i) acts[i] = (us[i] * gain).cwiseMax(0.0);
    }
    return net;
}

} // namespace detail

/// Per-layer rescale so pre-activations have unit pooled second moment on the
/// calibration data; biases are left at zero.
inline DenseNet scale_init(DenseNet net, std::span<const SampleBatch> calibration) {
    return detail::data_dependent_init(std::move(net), calibration, /*center_bias=*/false);
}

/// Per-feature bias centering followed by the per-layer rescale; W^l and b^l
/// are scaled by the same factor so the zero mean survives the variance
/// normalization.
inline DenseNet scale_bias_init(DenseNet net, std::span<const SampleBatch> calibration) {
    return detail::data_dependent_init(std::move(net), calibration, /*center_bias=*/true);
}

} // namespace varprop
