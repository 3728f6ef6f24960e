#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "varprop/network.hpp"
#include "varprop/serialize.hpp"

using namespace varprop;
using Catch::Approx;

namespace {

NetworkSpec make_spec(std::vector<int> widths, InitScheme scheme = InitScheme::kaiming, bool bn = false,
                      std::uint64_t seed = 1) {
    NetworkSpec s;
    s.widths = std::move(widths);
    s.init_scheme = scheme;
    s.batchnorm = bn;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("spec validation", "[network]") {
    CHECK_THROWS_AS(make_spec({5}).validate(), config_error);
    CHECK_THROWS_AS(make_spec({5, 0}).validate(), config_error);
    CHECK_NOTHROW(make_spec({1, 1}).validate());
}

TEST_CASE("kaiming_init: zero biases, seed determinism, scheme gate", "[network]") {
    const auto spec = make_spec({6, 5, 4}, InitScheme::kaiming, false, 42);
    const auto net = kaiming_init(spec);
    for (int l = 1; l <= 2; ++l) CHECK(net.bias(l).isZero(0.0));

    const auto net2 = kaiming_init(spec);
    for (int l = 1; l <= 2; ++l) CHECK(net.weight(l) == net2.weight(l));

    auto other = spec;
    other.seed = 43;
    CHECK(kaiming_init(other).weight(1) != net.weight(1));

    auto wrong = spec;
    wrong.init_scheme = InitScheme::scale;
    CHECK_THROWS_AS(kaiming_init(wrong), config_error);
}

TEST_CASE("kaiming_init: deepening preserves earlier layers", "[network]") {
    const auto shallow = kaiming_init(make_spec({8, 8, 8}));
    const auto deep = kaiming_init(make_spec({8, 8, 8, 8, 8}));
    CHECK(shallow.weight(1) == deep.weight(1));
    CHECK(shallow.weight(2) == deep.weight(2));
}

TEST_CASE("kaiming_init: empirical weight variance 2/n within 1%", "[network]") {
    double acc = 0.0;
    const int constructions = 5;
    for (int s = 0; s < constructions; ++s) {
        const auto net = kaiming_init(make_spec({1000, 1000}, InitScheme::kaiming, false, 100 + s));
        const auto& w = net.weight(1);
        acc += w.squaredNorm() / static_cast<double>(w.size());
    }
    CHECK(acc / constructions == Approx(2.0 / 1000.0).epsilon(0.01));
}

TEST_CASE("forward: zero inputs stay zero through a kaiming net", "[network]") {
    const auto net = kaiming_init(make_spec({4, 7, 3}));
    const SampleBatch batch(Eigen::MatrixXd::Zero(4, 5));
    const auto rec = forward(net, batch);
    for (int l = 1; l <= 2; ++l) {
        CHECK(rec.u[static_cast<std::size_t>(l - 1)].isZero(0.0));
        CHECK(rec.x[static_cast<std::size_t>(l)].isZero(0.0));
    }
}

TEST_CASE("forward: identity weights and relu on a hand row", "[network]") {
    auto net = kaiming_init(make_spec({2, 2}));
    net.weight(1) = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd in(2, 1);
    in << 1.0, -1.0;
    const auto rec = forward(net, SampleBatch(in));
    CHECK(rec.u[0](0, 0) == 1.0);
    CHECK(rec.u[0](1, 0) == -1.0);
    CHECK(rec.x[1](0, 0) == 1.0);
    CHECK(rec.x[1](1, 0) == 0.0);
}

TEST_CASE("forward: relu outputs nonnegative, record self-consistent", "[network]") {
    const auto net = kaiming_init(make_spec({10, 20, 5}, InitScheme::kaiming, false, 9));
    const auto batch = SampleBatch::standard_normal(16, 10, 77);
    const auto rec = forward(net, batch);
    REQUIRE(rec.depth() == 2);
    for (int l = 1; l <= 2; ++l) {
        const auto& x = rec.x[static_cast<std::size_t>(l)];
        CHECK((x.array() >= 0.0).all());
        CHECK(x == rec.normalized(l).cwiseMax(0.0));
    }
}

TEST_CASE("forward: dimension and batch errors", "[network]") {
    const auto net = kaiming_init(make_spec({4, 3}));
    CHECK_THROWS_AS(forward(net, SampleBatch::standard_normal(5, 3, 1)), dimension_error);

    const auto bn_net = kaiming_init(make_spec({4, 3}, InitScheme::kaiming, true));
    CHECK_THROWS_AS(forward(bn_net, SampleBatch::standard_normal(1, 4, 1)), insufficient_batch_error);
    CHECK_NOTHROW(forward(net, SampleBatch::standard_normal(1, 4, 1))); // T=1 fine without batchnorm
}

TEST_CASE("forward: wide kaiming net keeps the pooled second moment near 2", "[network]") {
    // one fixed network; the per-net multiplicative drift with depth is real,
    // so the band is generous (the tight ensemble band lives in acceptance)
    const auto net = kaiming_init(make_spec({1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000},
                                            InitScheme::kaiming, false, 3));
    const auto batch = SampleBatch::standard_normal(100, 1000, 11);
    const auto rec = forward(net, batch);
    for (int l = 1; l <= rec.depth(); ++l) {
        const auto& u = rec.u[static_cast<std::size_t>(l - 1)];
        const double msq = u.squaredNorm() / static_cast<double>(u.size());
        CHECK(msq > 1.6);
        CHECK(msq < 2.4);
    }
}

TEST_CASE("forward with batchnorm: unit feature statistics at every layer", "[network]") {
    // property sweep over random shapes, batch sizes and seeds
    std::mt19937_64 gen(515);
    for (int trial = 0; trial < 8; ++trial) {
        const int depth = 1 + static_cast<int>(gen() % 4);
        std::vector<int> widths;
        for (int l = 0; l <= depth; ++l) widths.push_back(4 + static_cast<int>(gen() % 40));
        const auto net = kaiming_init(make_spec(widths, InitScheme::kaiming, true, gen()));
        const int t_count = 2 + static_cast<int>(gen() % 63);
        const auto rec = forward(net, SampleBatch::standard_normal(t_count, widths[0], gen()));
        const double eps = net.spec().bn_epsilon;
        for (int l = 1; l <= rec.depth(); ++l) {
            const auto& uh = rec.normalized(l);
            const Eigen::VectorXd mean = uh.rowwise().mean();
            REQUIRE(mean.cwiseAbs().maxCoeff() < 1e-6);
            const Eigen::VectorXd var =
                ((uh.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(uh.cols())).matrix();
            REQUIRE(var.maxCoeff() <= 1.0 + 1e-12);
            // the lower band only holds for nondegenerate features: the eps
            // distortion is eps/(sigma^2+eps), so sigma^2 >= 0.1 is required
            const Eigen::VectorXd& sigma = rec.bn_std[static_cast<std::size_t>(l - 1)];
            for (Eigen::Index i = 0; i < var.size(); ++i)
                if (sigma(i) * sigma(i) >= 0.1) REQUIRE(var(i) >= 1.0 - 10.0 * eps);
        }
    }
}

TEST_CASE("forward determinism: identical runs bit-identical", "[network]") {
    const auto spec = make_spec({12, 15, 9}, InitScheme::kaiming, true, 21);
    const auto batch = SampleBatch::standard_normal(8, 12, 22);
    const auto r1 = forward(kaiming_init(spec), batch);
    const auto r2 = forward(kaiming_init(spec), batch);
    for (int l = 1; l <= 2; ++l) {
        CHECK(r1.u[static_cast<std::size_t>(l - 1)] == r2.u[static_cast<std::size_t>(l - 1)]);
        CHECK(r1.normalized(l) == r2.normalized(l));
    }
}

// ---------------------------------------------------------------------------
// data-dependent initializers
// ---------------------------------------------------------------------------

namespace {

std::vector<SampleBatch> normal_calibration(int batches, int samples, int dim, std::uint64_t seed) {
    std::vector<SampleBatch> out;
    for (int i = 0; i < batches; ++i)
        out.push_back(SampleBatch::standard_normal(samples, dim, derive_seed(seed, {static_cast<std::uint64_t>(i)})));
    return out;
}

} // namespace

TEST_CASE("scale_init: unit pooled second moment per layer on calibration data", "[network]") {
    auto spec = make_spec({64, 64, 64, 64, 64, 64}, InitScheme::scale, false, 31);
    const auto calib = normal_calibration(5, 128, 64, 300);
    const auto net = scale_init(unit_normal_init(spec), calib);

    // the post-condition pools over the full calibration set
    std::vector<double> ssq(static_cast<std::size_t>(net.depth()), 0.0);
    std::vector<double> count(static_cast<std::size_t>(net.depth()), 0.0);
    for (const auto& b : calib) {
        const auto rec = forward(net, b);
        for (int l = 1; l <= rec.depth(); ++l) {
            const auto& u = rec.u[static_cast<std::size_t>(l - 1)];
            ssq[static_cast<std::size_t>(l - 1)] += u.squaredNorm();
            count[static_cast<std::size_t>(l - 1)] += static_cast<double>(u.size());
        }
    }
    for (int l = 0; l < net.depth(); ++l)
        CHECK(ssq[static_cast<std::size_t>(l)] / count[static_cast<std::size_t>(l)] == Approx(1.0).margin(1e-6));
    // biases stay zero
    for (int l = 1; l <= net.depth(); ++l) CHECK(net.bias(l).isZero(0.0));
}

TEST_CASE("scale_init: prescaled single layer is halved", "[network]") {
    auto net = unit_normal_init(make_spec({2, 1}, InitScheme::scale));
    net.weight(1) << 2.0, 0.0;
    Eigen::MatrixXd data(2, 2);
    data << 1.0, -1.0, 0.0, 0.0; // u = +-2, pooled second moment 4
    std::vector<SampleBatch> calib;
    calib.emplace_back(data);
    const auto scaled = scale_init(net, calib);
    CHECK(scaled.weight(1)(0, 0) == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("scale_init: idempotent to 1e-5 relative", "[network]") {
    const auto calib = normal_calibration(5, 128, 32, 400);
    const auto once = scale_init(unit_normal_init(make_spec({32, 32, 32}, InitScheme::scale, false, 8)), calib);
    const auto twice = scale_init(once, calib);
    for (int l = 1; l <= once.depth(); ++l) {
        const double rel =
            (twice.weight(l) - once.weight(l)).norm() / once.weight(l).norm();
        CHECK(rel <= 1e-5);
    }
}

TEST_CASE("scale_init: errors", "[network]") {
    const auto net = unit_normal_init(make_spec({4, 4}, InitScheme::scale));
    CHECK_THROWS_AS(scale_init(net, {}), config_error);
    const auto bad = normal_calibration(1, 8, 3, 1);
    CHECK_THROWS_AS(scale_init(net, bad), dimension_error);
    const auto bn_net = unit_normal_init(make_spec({4, 4}, InitScheme::scale, true));
    CHECK_THROWS_AS(scale_init(bn_net, normal_calibration(1, 8, 4, 1)), config_error);
}

TEST_CASE("scale_bias_init: zero feature means and unit variance per layer", "[network]") {
    auto spec = make_spec({64, 80, 64, 72, 64}, InitScheme::scale_bias, false, 77);
    const auto calib = normal_calibration(5, 128, 64, 500);
    const auto net = scale_bias_init(unit_normal_init(spec), calib);

    // statistics pooled across the full calibration set, layer by layer
    const int depth = net.depth();
    std::vector<Eigen::MatrixXd> acts;
    for (const auto& b : calib) acts.push_back(b.features_by_samples());
    double total = 0.0;
    for (const auto& a : acts) total += static_cast<double>(a.cols());
    for (int l = 1; l <= depth; ++l) {
        Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(net.weight(l).rows());
        double ssq = 0.0;
        std::vector<Eigen::MatrixXd> us;
        for (auto& a : acts) {
            Eigen::MatrixXd u = net.weight(l) * a;
            u.colwise() += net.bias(l);
            mean_acc += u.rowwise().sum();
            ssq += u.squaredNorm();
            us.push_back(std::move(u));
        }
        mean_acc /= total;
        CHECK(mean_acc.cwiseAbs().maxCoeff() <= 1e-6);
        const double pooled_var =
            ssq / (total * static_cast<double>(net.weight(l).rows())) - mean_acc.squaredNorm() / net.weight(l).rows();
        CHECK(pooled_var == Approx(1.0).margin(1e-4));
        for (std::size_t i = 0; i < acts.size(); ++i) acts[i] = us[i].cwiseMax(0.0);
    }
}

TEST_CASE("scale_bias_init: constant batch hits the epsilon floor and completes", "[network]") {
    const auto spec = make_spec({3, 4}, InitScheme::scale_bias);
    auto net = unit_normal_init(spec);
    const Eigen::MatrixXd before = net.weight(1);
    Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(3, 6); // all samples identical
    std::vector<SampleBatch> calib;
    calib.emplace_back(constant);
    const auto out = scale_bias_init(net, calib);
    // variance 0 after centering, so the rescale divides by sqrt(eps)
    const double expected_gain = 1.0 / std::sqrt(1e-5);
    CHECK(out.weight(1) == before * expected_gain);
    // means still exactly removed
    Eigen::MatrixXd u = out.weight(1) * constant;
    u.colwise() += out.bias(1);
    CHECK(u.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("network serialization round-trips bit-exactly", "[network]") {
    const auto spec = make_spec({5, 9, 4}, InitScheme::kaiming, true, 123456789ull);
    const auto net = kaiming_init(spec);
    const auto path = std::filesystem::temp_directory_path() / "varprop_net_roundtrip.vpnet";
    save_network(net, path);
    const auto back = load_network(path);
    CHECK(back.spec().widths == spec.widths);
    CHECK(back.spec().seed == spec.seed);
    CHECK(back.spec().batchnorm == spec.batchnorm);
    CHECK(back.spec().init_scheme == spec.init_scheme);
    for (int l = 1; l <= net.depth(); ++l) {
        CHECK(back.weight(l) == net.weight(l));
        CHECK(back.bias(l) == net.bias(l));
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_network(path), io_error);
}
