#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dbflow/driver.hpp"

namespace {

bool parse_pairs(const std::vector<std::string>& tokens,
                 std::vector<std::pair<int, int>>& pairs) {
    for (const std::string& tok : tokens) {
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) return false;
        try {
            pairs.emplace_back(std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1)));
        } catch (const std::exception&) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Pauli double-bracket flow toolkit"};
    app.require_subcommand(1);

    std::string config_path, run_dir;
    double epsilon = 0, conv_thresh = 0, gen_clip = 0, ds = 0, obs_clip = 0;
    int n_rots = 0, max_iter = 0, variance_stride = 0, steps = 0, min_window = 10;
    std::uint64_t wall_cap_ms = 0;
    bool track_variance = true, raw_fit = false, literal_r2 = false;
    std::string output_dir, label;
    std::vector<double> epsilons;
    std::vector<std::uint32_t> k_list;
    std::vector<std::string> pair_tokens;

    const auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "path to a run configuration")->required();
    };
    const auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--epsilon", epsilon, "coefficient truncation threshold");
        cmd->add_option("--n-rots", n_rots, "rotations per iteration");
        cmd->add_option("--max-iter", max_iter, "iteration cap");
        cmd->add_option("--conv-thresh", conv_thresh, "gradient-norm convergence threshold");
        cmd->add_option("--gen-clip", gen_clip, "generator truncation threshold");
        cmd->add_option("--variance-stride", variance_stride,
                        "iterations between variance evaluations");
        cmd->add_option("--track-variance", track_variance, "toggle variance tracking");
        cmd->add_option("--wall-cap-ms", wall_cap_ms, "wall-clock cap in ms (0 = off)");
        cmd->add_option("--output-dir", output_dir, "artifact directory");
        cmd->add_option("--label", label, "run label");
    };
    const auto collect_overrides = [&](CLI::App* cmd, dbflow::driver::Overrides& ov) {
        if (cmd->count("--epsilon")) ov.epsilon = epsilon;
        if (cmd->count("--n-rots")) ov.n_rots = n_rots;
        if (cmd->count("--max-iter")) ov.max_iter = max_iter;
        if (cmd->count("--conv-thresh")) ov.conv_thresh = conv_thresh;
        if (cmd->count("--gen-clip")) ov.gen_clip = gen_clip;
        if (cmd->count("--variance-stride")) ov.variance_stride = variance_stride;
        if (cmd->count("--track-variance")) ov.track_variance = track_variance;
        if (cmd->count("--wall-cap-ms")) ov.wall_cap_ms = wall_cap_ms;
        if (cmd->count("--output-dir")) ov.output_dir = output_dir;
        if (cmd->count("--label")) ov.label = label;
        ov.min_window = min_window;
    };

    CLI::App* run = app.add_subcommand("run", "execute one optimization run");
    add_config(run);
    add_overrides(run);
    run->add_option("--min-window", min_window, "smallest extrapolation window");

    CLI::App* sweep = app.add_subcommand("sweep", "run a truncation-threshold sweep");
    add_config(sweep);
    add_overrides(sweep);
    sweep->add_option("--epsilons", epsilons, "thresholds to sweep")
        ->required()
        ->delimiter(',');
    sweep->add_option("--min-window", min_window, "smallest extrapolation window");

    CLI::App* flow = app.add_subcommand("flow", "integrate the dense reference flow");
    add_config(flow);
    flow->add_option("--k-list", k_list, "projector body orders")->required()->delimiter(',');
    flow->add_option("--ds", ds, "integrator step size")->required();
    flow->add_option("--steps", steps, "integrator step count")->required();
    flow->add_option("--output-dir", output_dir, "artifact directory");
    flow->add_option("--label", label, "run label");

    CLI::App* correlate = app.add_subcommand("correlate", "measure spin-spin correlations");
    correlate->add_option("--run-dir", run_dir, "completed run directory")->required();
    correlate->add_option("--pairs", pair_tokens, "site pairs, e.g. 1:2,1:3")
        ->required()
        ->delimiter(',');
    correlate->add_option("--obs-clip", obs_clip, "observable truncation threshold");

    CLI::App* extrapolate = app.add_subcommand("extrapolate", "re-fit a recorded trajectory");
    extrapolate->add_option("--run-dir", run_dir, "completed run directory")->required();
    extrapolate->add_option("--min-window", min_window, "smallest extrapolation window");
    extrapolate->add_flag("--raw", raw_fit, "fit raw instead of corrected streams");
    extrapolate->add_flag("--literal-r2", literal_r2, "score windows with +R^2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dbflow::driver::kExitConfig;
    }

    dbflow::driver::Overrides ov;
    if (app.got_subcommand(run)) {
        collect_overrides(run, ov);
        return dbflow::driver::cmd_run(config_path, ov);
    }
    if (app.got_subcommand(sweep)) {
        collect_overrides(sweep, ov);
        return dbflow::driver::cmd_sweep(config_path, epsilons, ov);
    }
    if (app.got_subcommand(flow)) {
        if (flow->count("--output-dir")) ov.output_dir = output_dir;
        if (flow->count("--label")) ov.label = label;
        return dbflow::driver::cmd_flow(config_path, k_list, ds, steps, ov);
    }
    if (app.got_subcommand(correlate)) {
        std::vector<std::pair<int, int>> pairs;
        if (!parse_pairs(pair_tokens, pairs)) {
            std::cerr << "config: --pairs entries must look like 1:2\n";
            return dbflow::driver::kExitConfig;
        }
        return dbflow::driver::cmd_correlate(run_dir, pairs, obs_clip);
    }
    if (app.got_subcommand(extrapolate)) {
        return dbflow::driver::cmd_extrapolate(run_dir, min_window, !raw_fit, literal_r2);
    }
    return dbflow::driver::kExitConfig;
}
