#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "varprop/meanfield.hpp"
#include "varprop/network.hpp"
#include "varprop/stats.hpp"

using namespace varprop;
using Catch::Approx;

namespace {

NetworkSpec make_spec(std::vector<int> widths, bool bn = false, std::uint64_t seed = 1) {
    NetworkSpec s;
    s.widths = std::move(widths);
    s.batchnorm = bn;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("layer_stats: constant batch is degenerate", "[stats]") {
    const auto net = kaiming_init(make_spec({2, 3}));
    Eigen::MatrixXd data(2, 4);
    data.colwise() = Eigen::Vector2d(0.7, -0.3);
    const auto st = layer_stats(forward(net, SampleBatch(data)));
    REQUIRE(st.depth() == 1);
    CHECK(st.vhat_sq[0] <= 1e-12 * st.pooled_sq[0]);
    CHECK(st.pooled_sq[0] == Approx(st.mhat_sq[0]).margin(1e-15));
    CHECK(st.degenerate[0] == 1);
    CHECK(std::isinf(st.r[0]));
}

TEST_CASE("layer_stats: symmetric two-sample case", "[stats]") {
    auto net = kaiming_init(make_spec({1, 1}));
    net.weight(1)(0, 0) = 1.0;
    Eigen::MatrixXd data(1, 2);
    data << 1.0, -1.0;
    const auto st = layer_stats(forward(net, SampleBatch(data)));
    CHECK(st.mhat_sq[0] == Approx(0.0).margin(1e-15));
    CHECK(st.vhat_sq[0] == Approx(1.0).margin(1e-15));
    CHECK(st.r[0] == Approx(0.0).margin(1e-15));
    CHECK(st.degenerate[0] == 0);
}

TEST_CASE("layer_stats: decomposition identity on random shapes", "[stats]") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int depth = 1 + static_cast<int>(gen() % 5);
        std::vector<int> widths;
        for (int l = 0; l <= depth; ++l) widths.push_back(2 + static_cast<int>(gen() % 30));
        const bool bn = (gen() % 2) == 0;
        const int t_count = 2 + static_cast<int>(gen() % 40);
        const auto net = kaiming_init(make_spec(widths, bn, gen()));
        const auto batch = SampleBatch::standard_normal(t_count, widths[0], gen());
        const auto st = layer_stats(forward(net, batch));
        for (int l = 0; l < st.depth(); ++l)
            REQUIRE(st.mhat_sq[static_cast<std::size_t>(l)] + st.vhat_sq[static_cast<std::size_t>(l)] ==
                    Approx(st.pooled_sq[static_cast<std::size_t>(l)]).margin(1e-10));
    }
}

TEST_CASE("layer_stats: raw-u versus normalized statistics under batchnorm", "[stats]") {
    const auto net = kaiming_init(make_spec({8, 12, 9}, true, 4));
    const auto rec = forward(net, SampleBatch::standard_normal(32, 8, 5));
    const auto normalized = layer_stats(rec);
    const auto raw = layer_stats(rec, /*use_raw_u=*/true);
    // normalized pre-activations have (near) zero means and unit variance
    CHECK(normalized.mhat_sq[0] < 1e-10);
    CHECK(normalized.vhat_sq[0] == Approx(1.0).margin(1e-3));
    CHECK(raw.pooled_sq[0] != normalized.pooled_sq[0]);
}

TEST_CASE("layer_stats: needs two samples", "[stats]") {
    const auto net = kaiming_init(make_spec({3, 3}));
    const auto rec = forward(net, SampleBatch::standard_normal(1, 3, 1));
    CHECK_THROWS_AS(layer_stats(rec), insufficient_batch_error);
}

TEST_CASE("layer_stats: ratio grows with depth and respects the wide-net bound", "[stats]") {
    const int depth = 12;
    std::vector<int> widths(depth + 1, 500);
    const auto net = kaiming_init(make_spec(widths, false, 17));
    const auto st = layer_stats(forward(net, SampleBatch::standard_normal(100, 500, 18)));
    const auto theory = trajectory(depth);
    for (int l = 1; l < st.depth(); ++l) CHECK(st.r[static_cast<std::size_t>(l)] > st.r[static_cast<std::size_t>(l - 1)]);
    for (int l = 0; l < st.depth(); ++l)
        CHECK(st.r[static_cast<std::size_t>(l)] <= theoretical_ratio(theory, l) * 1.05);
}

TEST_CASE("aggregate: identical records and a two-point ensemble", "[stats]") {
    LayerStatsRecord a;
    a.mhat_sq = {1.0};
    a.vhat_sq = {1.0};
    a.pooled_sq = {2.0};
    a.r = {1.0};
    a.degenerate = {0};
    LayerStatsRecord b = a;
    const std::vector<LayerStatsRecord> same = {a, a};
    const auto s1 = aggregate(same);
    CHECK(s1.r_mean[0] == 1.0);
    CHECK(s1.r_std[0] == 0.0);

    b.r = {3.0};
    const std::vector<LayerStatsRecord> two = {a, b};
    const auto s2 = aggregate(two);
    CHECK(s2.r_mean[0] == Approx(2.0));
    CHECK(s2.r_std[0] == Approx(1.0)); // population convention
    CHECK(s2.networks == 2);
}

TEST_CASE("aggregate: degenerate entries are excluded and counted", "[stats]") {
    LayerStatsRecord a;
    a.mhat_sq = {1.0};
    a.vhat_sq = {1.0};
    a.pooled_sq = {2.0};
    a.r = {2.0};
    a.degenerate = {0};
    LayerStatsRecord d = a;
    d.r = {std::numeric_limits<double>::infinity()};
    d.degenerate = {1};
    const std::vector<LayerStatsRecord> recs = {a, d, a};
    const auto s = aggregate(recs);
    CHECK(s.r_mean[0] == Approx(2.0));
    CHECK(s.degenerate_count[0] == 1);
}

TEST_CASE("aggregate: shape mismatch", "[stats]") {
    LayerStatsRecord a;
    a.r = {1.0, 2.0};
    a.degenerate = {0, 0};
    LayerStatsRecord b;
    b.r = {1.0};
    b.degenerate = {0};
    const std::vector<LayerStatsRecord> recs = {a, b};
    CHECK_THROWS_AS(aggregate(recs), consistency_error);
    const std::vector<LayerStatsRecord> one = {a};
    CHECK_THROWS_AS(aggregate(one), consistency_error);
}

TEST_CASE("relu_moment_shift: fixed cases", "[stats]") {
    const std::vector<double> nonneg = {0.0, 1.0, 2.5};
    const auto s0 = relu_moment_shift(nonneg);
    CHECK(s0.mean_shift == 0.0);
    CHECK(s0.second_moment_shift == 0.0);

    const std::vector<double> pm = {-1.0, 1.0};
    const auto s1 = relu_moment_shift(pm);
    CHECK(s1.mean_shift == Approx(0.5));
    CHECK(s1.second_moment_shift == Approx(-0.5));
}

TEST_CASE("relu_moment_shift: standard normal draws match half-normal moments", "[stats]") {
    std::vector<double> draws(1'000'000);
    normal_stream rng(314);
    for (auto& d : draws) d = rng.next();
    const auto s = relu_moment_shift(draws);
    CHECK(s.mean_shift == Approx(1.0 / std::sqrt(2.0 * 3.14159265358979323846)).margin(2e-3));
    CHECK(s.second_moment_shift == Approx(-0.5).margin(2e-3));
}

TEST_CASE("relu_moment_shift: sign property over random sample sets", "[stats]") {
    std::mt19937_64 gen(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-2.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 50);
        std::vector<double> xs(static_cast<std::size_t>(n));
        bool any_negative = false;
        for (auto& x : xs) {
            x = (trial % 2 == 0) ? normal(gen) : uniform(gen);
            any_negative = any_negative || x < 0.0;
        }
        const auto s = relu_moment_shift(xs);
        REQUIRE(s.mean_shift >= 0.0);
        REQUIRE(s.second_moment_shift <= 0.0);
        if (any_negative) {
            REQUIRE(s.mean_shift > 0.0);
            REQUIRE(s.second_moment_shift < 0.0);
        } else {
            REQUIRE(s.mean_shift == 0.0);
            REQUIRE(s.second_moment_shift == 0.0);
        }
    }
}

TEST_CASE("ratio_preservation_check: zero-mean batch", "[stats]") {
    Eigen::MatrixXd x = standard_normal_matrix(20, 10, 41);
    x.colwise() -= x.rowwise().mean().eval(); // exact zero feature means
    const auto out = ratio_preservation_check(SampleBatch(x), 50, 7);
    CHECK(out.rhs == Approx(0.0).margin(1e-20));
    CHECK(out.lhs == Approx(0.0).margin(1e-20));
}

TEST_CASE("ratio_preservation_check: identical samples are degenerate", "[stats]") {
    Eigen::MatrixXd x(3, 5);
    x.colwise() = Eigen::Vector3d(1.0, 2.0, 3.0);
    CHECK_THROWS_AS(ratio_preservation_check(SampleBatch(x), 10, 1), degeneracy_error);
}

TEST_CASE("ratio_preservation_check: generic batch agrees within 3 standard errors", "[stats][slow]") {
    const auto batch = SampleBatch::standard_normal(100, 200, 4242);
    const auto out = ratio_preservation_check(batch, 2000, 11);
    INFO("lhs = " << out.lhs << " rhs = " << out.rhs << " se = " << out.lhs_se);
    CHECK(std::abs(out.lhs - out.rhs) <= 3.0 * out.lhs_se);
}
