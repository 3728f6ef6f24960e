// varprop: forward/backward statistics experiments for randomly initialized
// relu MLPs. See README.md for the command reference.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varprop/experiments.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::string widths_csv;
    std::string schemes_csv;
    varprop::ExperimentConfig flags; // values given on the command line
};

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw varprop::config_error("bad integer in list: '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        out.push_back(csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void add_common_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "JSON config file; explicit flags override file values");
    cmd->add_option("--depth", st.flags.depth, "network depth L");
    cmd->add_option("--widths", st.widths_csv, "comma-separated layer widths to sweep");
    cmd->add_option("--samples", st.flags.samples, "input vectors per batch");
    cmd->add_option("--networks", st.flags.networks, "ensemble size");
    cmd->add_option("--seed", st.flags.seed, "master seed");
    cmd->add_flag("--batchnorm", st.flags.batchnorm, "insert batch normalization layers");
    cmd->add_option("--scheme", st.schemes_csv, "initialization scheme(s), comma-separated");
    cmd->add_option("--nodes", st.flags.nodes, "quadrature nodes per axis");
    cmd->add_option("--out", st.flags.out, "output directory");
    cmd->add_flag("--fast", st.flags.fast, "reduced scales for CI budgets (documented per command)");
    cmd->add_option("--threads", st.flags.threads, "worker threads (0 = hardware)");
    cmd->add_option("--calib-batches", st.flags.calib_batches, "calibration minibatch count");
    cmd->add_option("--calib-samples", st.flags.calib_samples, "samples per calibration minibatch");
    cmd->add_option("--fit-min", st.flags.fit_min, "slope fit range lower layer");
    cmd->add_option("--fit-max", st.flags.fit_max, "slope fit range upper layer");
    cmd->add_option("--dump-net", st.flags.dump_net, "save the first constructed network to this path");
}

// flags given on the command line override config-file values
varprop::ExperimentConfig merge(const CLI::App* cmd, const CliState& st, const std::string& command) {
    varprop::ExperimentConfig cfg;
    if (!st.config_path.empty()) cfg = varprop::load_config_file(st.config_path);
    cfg.command = command;
    const auto take = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (take("--depth")) cfg.depth = st.flags.depth;
    if (take("--widths")) cfg.widths = parse_int_list(st.widths_csv);
    if (take("--samples")) cfg.samples = st.flags.samples;
    if (take("--networks")) cfg.networks = st.flags.networks;
    if (take("--seed")) cfg.seed = st.flags.seed;
    if (take("--batchnorm")) cfg.batchnorm = st.flags.batchnorm;
    if (take("--scheme")) cfg.schemes = parse_string_list(st.schemes_csv);
    if (take("--nodes")) cfg.nodes = st.flags.nodes;
    if (take("--out")) cfg.out = st.flags.out;
    if (take("--fast")) cfg.fast = st.flags.fast;
    if (take("--threads")) cfg.threads = st.flags.threads;
    if (take("--calib-batches")) cfg.calib_batches = st.flags.calib_batches;
    if (take("--calib-samples")) cfg.calib_samples = st.flags.calib_samples;
    if (take("--fit-min")) cfg.fit_min = st.flags.fit_min;
    if (take("--fit-max")) cfg.fit_max = st.flags.fit_max;
    if (take("--dump-net")) cfg.dump_net = st.flags.dump_net;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variance propagation experiments for random relu MLPs"};
    app.require_subcommand(1);

    CliState st;
    auto* theory = app.add_subcommand("theory", "mean-field trajectory table and plot");
    auto* finite = app.add_subcommand("finite-width", "ratio ensembles vs the theory curve");
    auto* grads = app.add_subcommand("gradients", "gradient magnitude traces and slopes");
    auto* init = app.add_subcommand("init-check", "initializer post-condition report");
    for (auto* cmd : {theory, finite, grads, init}) add_common_flags(cmd, st);

    CLI11_PARSE(app, argc, argv);

    const std::string command = theory->parsed()   ? "theory"
                                : finite->parsed() ? "finite-width"
                                : grads->parsed()  ? "gradients"
                                                   : "init-check";
    CLI::App* cmd = app.get_subcommands().front();

    try {
        const auto files = varprop::run_command(merge(cmd, st, command));
        for (const auto& f : files) std::cout << f.string() << "\n";
        return 0;
    } catch (const varprop::error& e) {
        std::cerr << "error [" << e.category() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 2;
    }
}
