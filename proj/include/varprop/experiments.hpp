#pragma once

// Experiment orchestration: named commands with deterministic seeding and
// CSV/JSON/SVG outputs. Per-network work items may run on a small worker
// pool; results are gathered in network-index order, so outputs are
// byte-identical for any thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "varprop/errors.hpp"
#include "varprop/gradients.hpp"
#include "varprop/meanfield.hpp"
#include "varprop/network.hpp"
#include "varprop/serialize.hpp"
#include "varprop/stats.hpp"
#include "varprop/svg_plot.hpp"
#include "varprop/table.hpp"

namespace varprop {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ExperimentConfig {
    std::string command;            // theory | finite-width | gradients | init-check
    int depth = 50;
    std::vector<int> widths;        // command-specific default when empty
    int samples = 100;
    int networks = 30;
    std::uint64_t seed = 0;
    bool batchnorm = false;
    std::vector<std::string> schemes; // gradients / init-check
    int nodes = 64;
    std::string out = "results";
    bool fast = false;
    int threads = 0;                // 0 = hardware concurrency
    int calib_batches = 5;
    int calib_samples = 128;
    int fit_min = -1;               // -1 = default fit window
    int fit_max = -1;
    std::string dump_net;           // when nonempty, save the first built network here

    void validate() const {
        if (depth < 1) throw config_error("depth must be >= 1");
        if (samples < 1) throw config_error("samples must be >= 1");
        if (networks < 1) throw config_error("networks must be >= 1");
        if (nodes < 16) throw config_error("nodes must be >= 16");
        if (threads < 0) throw config_error("threads must be >= 0");
        if (calib_batches < 1 || calib_samples < 1) throw config_error("calibration sizes must be positive");
        for (int w : widths)
            if (w < 1) throw config_error("widths must be positive");
    }

    std::string canonical_string() const {
        std::string s = "command=" + command + ";depth=" + std::to_string(depth) + ";widths=";
        for (std::size_t i = 0; i < widths.size(); ++i) s += (i ? "," : "") + std::to_string(widths[i]);
        s += ";samples=" + std::to_string(samples) + ";networks=" + std::to_string(networks) +
             ";seed=" + std::to_string(seed) + ";batchnorm=" + (batchnorm ? "1" : "0") + ";schemes=";
        for (std::size_t i = 0; i < schemes.size(); ++i) s += (i ? "," : "") + schemes[i];
        s += ";nodes=" + std::to_string(nodes) + ";fast=" + (fast ? "1" : "0") +
             ";calib_batches=" + std::to_string(calib_batches) +
             ";calib_samples=" + std::to_string(calib_samples) + ";fit_min=" + std::to_string(fit_min) +
             ";fit_max=" + std::to_string(fit_max);
        return s;
    }

    std::string config_hash() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(canonical_string())));
        return buf;
    }

    std::vector<std::pair<std::string, std::string>> provenance() const {
        return {{"artifact", std::string("varprop ") + kArtifactVersion},
                {"command", command},
                {"config_hash", config_hash()},
                {"seed", std::to_string(seed)},
                {"fast", fast ? "1" : "0"}};
    }
};

// --------------------------------------------------------------------------
// config file support: JSON object with the same keys as the CLI flags
// --------------------------------------------------------------------------

inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("config file: top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "depth") cfg.depth = value.get<int>();
            else if (key == "widths") cfg.widths = value.get<std::vector<int>>();
            else if (key == "samples") cfg.samples = value.get<int>();
            else if (key == "networks") cfg.networks = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "batchnorm") cfg.batchnorm = value.get<bool>();
            else if (key == "schemes") cfg.schemes = value.get<std::vector<std::string>>();
            else if (key == "scheme") cfg.schemes = {value.get<std::string>()};
            else if (key == "nodes") cfg.nodes = value.get<int>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "fast") cfg.fast = value.get<bool>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else if (key == "calib_batches") cfg.calib_batches = value.get<int>();
            else if (key == "calib_samples") cfg.calib_samples = value.get<int>();
            else if (key == "fit_min") cfg.fit_min = value.get<int>();
            else if (key == "fit_max") cfg.fit_max = value.get<int>();
            else if (key == "dump_net") cfg.dump_net = value.get<std::string>();
            else if (key == "command") cfg.command = value.get<std::string>();
            else throw config_error("config file: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw config_error("config file: bad value for '" + key + "': " + e.what());
        }
    }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config file " + path.string() + ": " + e.what());
    }
    ExperimentConfig cfg;
    apply_config_json(cfg, j);
    return cfg;
}

// --------------------------------------------------------------------------
// shared machinery
// --------------------------------------------------------------------------

namespace detail {

inline void run_indexed(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(workers, count);
    pool.reserve(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline int effective_workers(const ExperimentConfig& cfg, int width) {
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (width >= 2048) n = 1; // one wide network is gigabytes; keep a single one in flight
    return n;
}

inline std::filesystem::path ensure_out_dir(const ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw io_error("output directory not writable: " + dir.string());
    return dir;
}

inline std::vector<SampleBatch> make_calibration(const ExperimentConfig& cfg, std::uint64_t exp_tag, int width) {
    std::vector<SampleBatch> calib;
    calib.reserve(static_cast<std::size_t>(cfg.calib_batches));
    for (int i = 0; i < cfg.calib_batches; ++i)
        calib.push_back(SampleBatch::standard_normal(
            cfg.calib_samples, width,
            derive_seed(cfg.seed, {exp_tag, static_cast<std::uint64_t>(width), fnv1a("calib"),
                                   static_cast<std::uint64_t>(i)})));
    return calib;
}

inline std::pair<int, int> fit_range(const ExperimentConfig& cfg) {
    auto range = default_slope_fit_range(cfg.depth);
    if (cfg.fit_min >= 0) range.first = cfg.fit_min;
    if (cfg.fit_max >= 0) range.second = cfg.fit_max;
    return range;
}

} // namespace detail

// --------------------------------------------------------------------------
// theory: mean-field trajectory table and plot
// --------------------------------------------------------------------------

inline std::vector<std::filesystem::path> run_theory(ExperimentConfig cfg) {
    cfg.command = "theory";
    cfg.validate();
    const auto dir = detail::ensure_out_dir(cfg);
    QuadratureConfig q;
    q.node_count = cfg.nodes;
    const auto traj = trajectory(cfg.depth, q);

    ResultTable table;
    table.provenance = cfg.provenance();
    table.columns = {"layer", "c", "m", "v", "sigma", "ratio"};
    for (int l = 1; l <= cfg.depth; ++l) {
        const double c = traj.c[static_cast<std::size_t>(l)];
        const double m = std::sqrt(traj.m_sq[static_cast<std::size_t>(l - 1)]);
        const double v = std::sqrt(traj.v_sq[static_cast<std::size_t>(l - 1)]);
        table.add_row({static_cast<double>(l), c, m, v, std::sqrt(traj.sigma_sq), theoretical_ratio(traj, l - 1)});
    }
    const auto csv_path = dir / "theory.csv";
    table.write_csv(csv_path);

    PlotSeries ms{"m (sample mean)", {}, {}};
    PlotSeries vs{"v (sample std)", {}, {}};
    for (int l = 1; l <= cfg.depth; ++l) {
        ms.x.push_back(l);
        ms.y.push_back(std::sqrt(traj.m_sq[static_cast<std::size_t>(l - 1)]));
        vs.x.push_back(l);
        vs.y.push_back(std::sqrt(traj.v_sq[static_cast<std::size_t>(l - 1)]));
    }
    const auto svg_path = dir / "theory.svg";
    ResultTable::write_text_file(
        svg_path, render_line_plot("Predicted sample statistics vs layer", "layer", "value", {ms, vs},
                                   cfg.provenance()));
    return {csv_path, svg_path};
}

// --------------------------------------------------------------------------
// finite-width: ratio ensembles per width against the theory curve
// --------------------------------------------------------------------------

inline std::vector<std::filesystem::path> run_finite_width(ExperimentConfig cfg) {
    cfg.command = "finite-width";
    if (cfg.widths.empty()) cfg.widths = {30, 100, 300, 1000};
    if (cfg.fast) {
        // documented fast reductions: half the ensemble, widths capped at 1000
        cfg.networks = std::max(2, cfg.networks / 2);
        std::erase_if(cfg.widths, [](int w) { return w > 1000; });
        if (cfg.widths.empty()) cfg.widths = {1000};
    }
    cfg.validate();
    if (cfg.networks < 2) throw config_error("finite-width: need at least 2 networks");
    if (cfg.samples < 2) throw config_error("finite-width: need at least 2 samples");
    const auto dir = detail::ensure_out_dir(cfg);
    const std::uint64_t tag = fnv1a("finite-width");

    QuadratureConfig q;
    q.node_count = cfg.nodes;
    const auto traj = trajectory(cfg.depth, q);

    std::vector<std::filesystem::path> files;
    std::vector<PlotSeries> plot;
    bool dumped = false;

    for (int width : cfg.widths) {
        const auto batch = SampleBatch::standard_normal(
            cfg.samples, width, derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("batch")}));

        NetworkSpec base;
        base.widths.assign(static_cast<std::size_t>(cfg.depth) + 1, width);
        base.batchnorm = cfg.batchnorm;

        std::vector<LayerStatsRecord> records(static_cast<std::size_t>(cfg.networks));
        detail::run_indexed(cfg.networks, detail::effective_workers(cfg, width), [&](int k) {
            NetworkSpec spec = base;
            spec.seed = derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("net"),
                                               static_cast<std::uint64_t>(k)});
            const auto net = kaiming_init(spec);
            if (k == 0 && !cfg.dump_net.empty() && !dumped) save_network(net, cfg.dump_net);
            records[static_cast<std::size_t>(k)] = layer_stats(forward(net, batch));
        });
        dumped = dumped || !cfg.dump_net.empty();

        const auto summary = aggregate(records);

        ResultTable table;
        table.provenance = cfg.provenance();
        table.provenance.emplace_back("width", std::to_string(width));
        table.columns = {"layer", "r_mean", "r_std", "degenerate", "theory_ratio"};
        PlotSeries series{"width " + std::to_string(width), {}, {}};
        for (int l = 0; l < cfg.depth; ++l) {
            table.add_row({static_cast<double>(l + 1), summary.r_mean[static_cast<std::size_t>(l)],
                           summary.r_std[static_cast<std::size_t>(l)],
                           static_cast<double>(summary.degenerate_count[static_cast<std::size_t>(l)]),
                           theoretical_ratio(traj, l)});
            if (std::isfinite(summary.r_mean[static_cast<std::size_t>(l)])) {
                series.x.push_back(l + 1);
                series.y.push_back(summary.r_mean[static_cast<std::size_t>(l)]);
            }
        }
        const auto path = dir / ("ratio_w" + std::to_string(width) + ".csv");
        table.write_csv(path);
        files.push_back(path);
        plot.push_back(std::move(series));
    }

    PlotSeries theory_series{"theory", {}, {}};
    for (int l = 0; l < cfg.depth; ++l) {
        theory_series.x.push_back(l + 1);
        theory_series.y.push_back(theoretical_ratio(traj, l));
    }
    plot.push_back(std::move(theory_series));
    const auto svg_path = dir / "ratio.svg";
    ResultTable::write_text_file(svg_path,
                                 render_line_plot("Sample mean-to-std ratio vs layer", "layer", "ratio", plot,
                                                  cfg.provenance()));
    files.push_back(svg_path);
    return files;
}

// --------------------------------------------------------------------------
// gradients: per-layer mean squared activation gradients and fitted slopes
// --------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string> kGradientSchemes = {"kaiming", "scale_bias", "kaiming+bn"};

inline std::string normalize_scheme(const std::string& s) {
    if (s == "bn" || s == "batchnorm") return "kaiming+bn";
    return s;
}

} // namespace detail

inline std::vector<std::filesystem::path> run_gradients(ExperimentConfig cfg) {
    cfg.command = "gradients";
    if (cfg.widths.empty()) cfg.widths = {3000};
    if (cfg.schemes.empty()) cfg.schemes = detail::kGradientSchemes;
    for (auto& s : cfg.schemes) s = detail::normalize_scheme(s);
    for (const auto& s : cfg.schemes)
        if (std::find(detail::kGradientSchemes.begin(), detail::kGradientSchemes.end(), s) ==
            detail::kGradientSchemes.end())
            throw config_error("gradients: unknown scheme '" + s + "'");
    if (cfg.fast) cfg.widths = {std::min(cfg.widths[0], 1000)};
    cfg.validate();
    if (cfg.networks < 2) throw config_error("gradients: need at least 2 networks");
    const int width = cfg.widths[0];
    const auto dir = detail::ensure_out_dir(cfg);
    const std::uint64_t tag = fnv1a("gradients");
    const auto [fit_lo, fit_hi] = detail::fit_range(cfg);

    const auto batch = SampleBatch::standard_normal(
        cfg.samples, width, derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("batch")}));
    std::vector<SampleBatch> calibration; // built lazily, only if scale_bias is requested
    if (std::find(cfg.schemes.begin(), cfg.schemes.end(), "scale_bias") != cfg.schemes.end())
        calibration = detail::make_calibration(cfg, tag, width);

    QuadratureConfig q;
    q.node_count = cfg.nodes;
    const auto predictions = bn_predictions(q);

    std::vector<std::filesystem::path> files;
    nlohmann::ordered_json slopes;
    slopes["artifact"] = std::string("varprop ") + kArtifactVersion;
    slopes["config_hash"] = cfg.config_hash();
    slopes["seed"] = cfg.seed;
    slopes["fast"] = cfg.fast;
    slopes["width"] = width;
    slopes["networks"] = cfg.networks;
    slopes["fit_range"] = {fit_lo, fit_hi};
    slopes["theory_slope"] = predictions.slope;
    slopes["theory_sigma_s"] = predictions.sigma_s;
    slopes["slope_tolerance"] = 0.05;

    std::vector<PlotSeries> plot;
    bool dumped = false;

    for (const auto& scheme : cfg.schemes) {
        std::vector<std::vector<double>> traces(static_cast<std::size_t>(cfg.networks));
        detail::run_indexed(cfg.networks, detail::effective_workers(cfg, width), [&](int k) {
            NetworkSpec spec;
            spec.widths.assign(static_cast<std::size_t>(cfg.depth) + 1, width);
            spec.seed = derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("net"),
                                               static_cast<std::uint64_t>(k)});
            DenseNet net;
            if (scheme == "kaiming") {
                net = kaiming_init(spec);
            } else if (scheme == "kaiming+bn") {
                spec.batchnorm = true;
                net = kaiming_init(spec);
            } else {
                spec.init_scheme = InitScheme::scale_bias;
                net = scale_bias_init(unit_normal_init(spec), calibration);
            }
            if (k == 0 && !cfg.dump_net.empty() && !dumped) save_network(net, cfg.dump_net);
            const auto rec = forward(net, batch);
            const std::uint64_t w_seed = derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width),
                                                                fnv1a("loss"), static_cast<std::uint64_t>(k)});
            const auto out_grad = random_linear_loss_grad(rec.x.back(), w_seed);
            traces[static_cast<std::size_t>(k)] = backward(net, rec, out_grad, BnBackward::full, w_seed).g2;
        });
        dumped = dumped || !cfg.dump_net.empty();

        // ensemble mean and std of g2 per layer, then the slope of the mean
        const std::size_t layers = traces[0].size();
        std::vector<double> g2_mean(layers, 0.0), g2_std(layers, 0.0);
        for (const auto& t : traces)
            for (std::size_t l = 0; l < layers; ++l) g2_mean[l] += t[l];
        for (auto& v : g2_mean) v /= static_cast<double>(cfg.networks);
        for (const auto& t : traces)
            for (std::size_t l = 0; l < layers; ++l) {
                const double d = t[l] - g2_mean[l];
                g2_std[l] += d * d;
            }
        for (auto& v : g2_std) v = std::sqrt(v / static_cast<double>(cfg.networks));

        GradientTrace mean_trace;
        mean_trace.g2 = g2_mean;
        const double slope_of_mean = gradient_slope(mean_trace, fit_lo, fit_hi);
        double slope_acc = 0.0, slope_sq = 0.0;
        for (const auto& t : traces) {
            GradientTrace one;
            one.g2 = t;
            const double s = gradient_slope(one, fit_lo, fit_hi);
            slope_acc += s;
            slope_sq += s * s;
        }
        const double slope_mean = slope_acc / cfg.networks;
        const double slope_std = std::sqrt(std::max(0.0, slope_sq / cfg.networks - slope_mean * slope_mean));

        ResultTable table;
        table.provenance = cfg.provenance();
        table.provenance.emplace_back("scheme", scheme);
        table.provenance.emplace_back("fit_range", std::to_string(fit_lo) + ".." + std::to_string(fit_hi));
        if (cfg.fast) table.provenance.emplace_back("note", "fast mode: width reduced to 1000");
        table.columns = {"layer", "g2_mean", "g2_std", "log_g2_mean"};
        PlotSeries series{scheme, {}, {}};
        for (std::size_t l = 0; l < layers; ++l) {
            table.add_row({static_cast<double>(l), g2_mean[l], g2_std[l], std::log(g2_mean[l])});
            series.x.push_back(static_cast<double>(l));
            series.y.push_back(std::log10(g2_mean[l]));
        }
        const auto path = dir / ("grads_" + scheme + ".csv");
        table.write_csv(path);
        files.push_back(path);
        plot.push_back(std::move(series));

        nlohmann::ordered_json entry;
        entry["slope_of_mean"] = slope_of_mean;
        entry["slope_per_net_mean"] = slope_mean;
        entry["slope_per_net_std"] = slope_std;
        slopes["schemes"][scheme] = entry;
    }

    const auto svg_path = dir / "grads.svg";
    ResultTable::write_text_file(svg_path,
                                 render_line_plot("Mean squared activation gradients vs layer", "layer",
                                                  "log10 g2", plot, cfg.provenance()));
    files.push_back(svg_path);

    const auto json_path = dir / "slopes.json";
    ResultTable::write_text_file(json_path, slopes.dump(2) + "\n");
    files.push_back(json_path);
    return files;
}

// --------------------------------------------------------------------------
// init-check: initializer post-conditions on calibration and held-out data
// --------------------------------------------------------------------------

inline std::vector<std::filesystem::path> run_init_check(ExperimentConfig cfg) {
    cfg.command = "init-check";
    if (cfg.widths.empty()) cfg.widths = {128};
    if (cfg.schemes.empty()) cfg.schemes = {"scale_bias"};
    if (cfg.schemes.size() != 1 || (cfg.schemes[0] != "scale" && cfg.schemes[0] != "scale_bias"))
        throw config_error("init-check: scheme must be exactly one of {scale, scale_bias}");
    cfg.validate();
    const int width = cfg.widths[0];
    const bool with_bias = cfg.schemes[0] == "scale_bias";
    const auto dir = detail::ensure_out_dir(cfg);
    const std::uint64_t tag = fnv1a("init-check");

    NetworkSpec spec;
    spec.widths.assign(static_cast<std::size_t>(cfg.depth) + 1, width);
    spec.init_scheme = with_bias ? InitScheme::scale_bias : InitScheme::scale;
    spec.seed = derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("net"), 0ull});

    const auto calibration = detail::make_calibration(cfg, tag, width);
    const auto net = with_bias ? scale_bias_init(unit_normal_init(spec), calibration)
                               : scale_init(unit_normal_init(spec), calibration);
    if (!cfg.dump_net.empty()) save_network(net, cfg.dump_net);

    const auto heldout = SampleBatch::standard_normal(
        cfg.calib_samples, width, derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(width), fnv1a("heldout")}));

    ResultTable table;
    table.provenance = cfg.provenance();
    table.provenance.emplace_back("scheme", cfg.schemes[0]);
    table.columns = {"heldout", "layer", "max_abs_mean", "pooled_second_moment", "pooled_variance"};

    const auto report = [&](const std::vector<SampleBatch>& batches, double heldout_flag) {
        const int depth = net.depth();
        std::vector<Eigen::VectorXd> mean_acc;
        std::vector<double> ssq(static_cast<std::size_t>(depth), 0.0);
        for (int l = 1; l <= depth; ++l) mean_acc.emplace_back(Eigen::VectorXd::Zero(net.weight(l).rows()));
        double total = 0.0;
        std::vector<Eigen::MatrixXd> acts;
        for (const auto& b : batches) acts.push_back(b.features_by_samples());
        for (std::size_t bi = 0; bi < batches.size(); ++bi) total += static_cast<double>(acts[bi].cols());
        for (int l = 1; l <= depth; ++l) {
            for (std::size_t bi = 0; bi < acts.size(); ++bi) {
                Eigen::MatrixXd u = net.weight(l) * acts[bi];
                u.colwise() += net.bias(l);
                mean_acc[static_cast<std::size_t>(l - 1)] += u.rowwise().sum();
                ssq[static_cast<std::size_t>(l - 1)] += u.squaredNorm();
                acts[bi] = u.cwiseMax(0.0);
            }
        }
        for (int l = 1; l <= depth; ++l) {
            const Eigen::VectorXd mean = mean_acc[static_cast<std::size_t>(l - 1)] / total;
            const double n = static_cast<double>(net.weight(l).rows());
            const double msq = ssq[static_cast<std::size_t>(l - 1)] / (total * n);
            const double var = msq - mean.squaredNorm() / n;
            table.add_row({heldout_flag, static_cast<double>(l), mean.cwiseAbs().maxCoeff(), msq, var});
        }
    };

    report(calibration, 0.0);
    report({heldout}, 1.0);

    const auto path = dir / "init_check.csv";
    table.write_csv(path);
    return {path};
}

// Dispatch by command name.
inline std::vector<std::filesystem::path> run_command(const ExperimentConfig& cfg) {
    if (cfg.command == "theory") return run_theory(cfg);
    if (cfg.command == "finite-width") return run_finite_width(cfg);
    if (cfg.command == "gradients") return run_gradients(cfg);
    if (cfg.command == "init-check") return run_init_check(cfg);
    throw config_error("unknown command '" + cfg.command + "'");
}

} // namespace varprop
