#pragma once

// Flat binary network dump, little-endian:
//   magic "VPNET1\n", u32 scheme, u8 batchnorm, u64 seed, f64 bn_epsilon,
//   u32 width count, u32 widths[...],
//   then per layer l = 1..L: W^l row-major (n^l x n^{l-1}) f64, b^l f64.
// See README for the full schema.

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "varprop/errors.hpp"
#include "varprop/network.hpp"

namespace varprop {

namespace detail {

inline constexpr char kNetMagic[8] = {'V', 'P', 'N', 'E', 'T', '1', '\n', '\0'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace detail

inline void save_network(const DenseNet& net, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open " + path.string() + " for writing");
    os.write(detail::kNetMagic, sizeof(detail::kNetMagic));
    const NetworkSpec& spec = net.spec();
    detail::write_pod(os, static_cast<std::uint32_t>(spec.init_scheme));
    detail::write_pod(os, static_cast<std::uint8_t>(spec.batchnorm ? 1 : 0));
    detail::write_pod(os, static_cast<std::uint64_t>(spec.seed));
    detail::write_pod(os, spec.bn_epsilon);
    detail::write_pod(os, static_cast<std::uint32_t>(spec.widths.size()));
    for (int w : spec.widths) detail::write_pod(os, static_cast<std::uint32_t>(w));
    for (int l = 1; l <= net.depth(); ++l) {
        const Eigen::MatrixXd& w = net.weight(l);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) detail::write_pod(os, w(i, j));
        const Eigen::VectorXd& b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) detail::write_pod(os, b(i));
    }
    if (!os) throw io_error("write failed: " + path.string());
}

inline DenseNet load_network(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open " + path.string());
    char magic[8] = {};
    is.read(magic, sizeof(magic));
    for (std::size_t i = 0; i < sizeof(magic); ++i)
        if (magic[i] != detail::kNetMagic[i]) throw io_error("bad network file magic: " + path.string());

    NetworkSpec spec;
    const auto scheme = detail::read_pod<std::uint32_t>(is);
    if (scheme > 2) throw io_error("bad init scheme in " + path.string());
    spec.init_scheme = static_cast<InitScheme>(scheme);
    spec.batchnorm = detail::read_pod<std::uint8_t>(is) != 0;
    spec.seed = detail::read_pod<std::uint64_t>(is);
    spec.bn_epsilon = detail::read_pod<double>(is);
    const auto count = detail::read_pod<std::uint32_t>(is);
    if (count < 2 || count > 4096) throw io_error("bad width count in " + path.string());
    spec.widths.resize(count);
    for (auto& w : spec.widths) w = static_cast<int>(detail::read_pod<std::uint32_t>(is));

    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (std::size_t l = 1; l < count; ++l) {
        Eigen::MatrixXd w(spec.widths[l], spec.widths[l - 1]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = detail::read_pod<double>(is);
        Eigen::VectorXd b(spec.widths[l]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = detail::read_pod<double>(is);
        weights.push_back(std::move(w));
        biases.push_back(std::move(b));
    }
    if (!is) throw io_error("truncated network file: " + path.string());
    return DenseNet(spec, std::move(weights), std::move(biases));
}

} // namespace varprop
