#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace varprop {

// FNV-1a, used to turn stream labels into 64-bit path components.
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based stream derivation: a master seed plus a path of components
// (experiment tag, width, network index, ...) maps to an independent stream
// seed. Streams depend only on their own path, so adding a width to a sweep
// or deepening a network never perturbs other streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p));
    return s;
}

// Deterministic standard-normal stream: mt19937_64 + Box-Muller.
// The stdlib normal_distribution is implementation-defined, so we hand-roll
// the transform to keep weight streams identical across toolchains.
class normal_stream {
public:
    explicit normal_stream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = unit_open_();
        const double u2 = unit_open_();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill(double* dst, std::ptrdiff_t n) {
        for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = next();
    }

private:
    // uniform in (0, 1]; never 0, so log(u1) is finite
    double unit_open_() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Eigen::MatrixXd m(rows, cols);
    normal_stream s(seed);
    s.fill(m.data(), m.size());
    return m;
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, std::uint64_t seed) {
    Eigen::VectorXd v(n);
    normal_stream s(seed);
    s.fill(v.data(), v.size());
    return v;
}

} // namespace varprop
