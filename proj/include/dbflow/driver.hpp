#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dbflow/analysis.hpp"
#include "dbflow/config.hpp"
#include "dbflow/flow_exact.hpp"
#include "dbflow/io.hpp"
#include "dbflow/models.hpp"
#include "dbflow/oracle.hpp"
#include "dbflow/vdbf.hpp"

namespace dbflow::driver {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitWallCap = 3;

/// Calls f with an integral_constant picking the narrowest word count that
/// holds the register.
template <class F>
auto with_width(int qubits, F&& f) {
    if (qubits <= 64) return f(std::integral_constant<std::size_t, 1>{});
    if (qubits <= 128) return f(std::integral_constant<std::size_t, 2>{});
    if (qubits <= 256) return f(std::integral_constant<std::size_t, 4>{});
    throw ConfigError("config: registers above 256 qubits are not supported");
}

template <std::size_t W>
PauliSum<W> build_model(const ModelSpec& model) {
    if (model.kind == ModelKind::hubbard)
        return build_hubbard<W>(model.lattice, model.t, model.u);
    return build_heisenberg<W>(model.lattice, model.c);
}

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<double> epsilon, conv_thresh, gen_clip;
    std::optional<int> n_rots, max_iter, variance_stride;
    std::optional<bool> track_variance;
    std::optional<std::uint64_t> wall_cap_ms;
    std::optional<std::string> output_dir, label;
    int min_window = 10;

    void apply(RunConfig& cfg) const {
        if (epsilon) cfg.vdbf.epsilon = *epsilon;
        if (conv_thresh) cfg.vdbf.conv_thresh = *conv_thresh;
        if (gen_clip) cfg.vdbf.gen_clip = *gen_clip;
        if (n_rots) cfg.vdbf.n_rots = *n_rots;
        if (max_iter) cfg.vdbf.max_iter = *max_iter;
        if (variance_stride) cfg.vdbf.variance_stride = *variance_stride;
        if (track_variance) cfg.vdbf.track_variance = *track_variance;
        if (wall_cap_ms) cfg.vdbf.wall_cap_ms = *wall_cap_ms;
        if (output_dir) cfg.output_dir = *output_dir;
        if (label) cfg.label = *label;
        try {
            cfg.vdbf.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
};

struct RunOutcome {
    Termination termination = Termination::max_iter_reached;
    IterationRecord final_rec;
    std::size_t rotation_count = 0;
    bool has_extrapolation = false;
    ExtrapolationResult extrapolation;
    std::string dir;
};

namespace detail {

using json = nlohmann::json;

inline json extrapolation_json(const ExtrapolationResult& r) {
    json j;
    j["method"] = method_name(r.method);
    j["estimate"] = r.estimate;
    j["uncertainty"] = r.uncertainty;
    j["window_start"] = r.window_start;
    j["n_points"] = r.n_points;
    j["b_linear"] = r.b_linear;
    j["b_quadratic"] = r.b_quadratic;
    j["r_squared_linear"] = r.r_squared_linear;
    j["linear_only"] = r.linear_only;
    j["condition_warning"] = r.condition_warning;
    return j;
}

inline json final_json(const IterationRecord& rec, int sites, std::size_t rotations,
                       Termination term) {
    json j;
    j["raw_energy"] = rec.raw_energy;
    j["corrected_energy"] = rec.corrected_energy;
    j["variance"] = rec.variance;
    j["corrected_variance"] = rec.corrected_variance;
    j["discarded_weight"] = rec.discarded_weight;
    j["gradient_norm"] = rec.gradient_norm;
    j["n_terms"] = rec.n_terms;
    j["iterations"] = rec.iteration;
    j["rotations"] = rotations;
    j["wall_ms"] = rec.wall_ms;
    j["energy_per_site"] = rec.corrected_energy / double(sites);
    j["termination"] = termination_name(term);
    return j;
}

}  // namespace detail

/// Shared body of run and sweep: fold, optimize, extrapolate, and write the
/// run directory (trajectory.csv, iterations.csv, extrapolation.json when a
/// fit exists, summary.json).
template <std::size_t W>
RunOutcome run_pipeline(const RunConfig& cfg, int min_window) {
    const std::string occupation = resolved_occupation(cfg.model);
    const PauliSum<W> bare = build_model<W>(cfg.model);
    auto folding = fold_reference(bare, occupation);
    VdbfResult<W> result = vdbf_run(folding.h0, cfg.vdbf);
    const Trajectory<W>& traj = result.trajectory;
    if (traj.iterations.empty()) throw std::runtime_error("run: no iterations recorded");

    RunOutcome out;
    out.termination = traj.termination;
    out.final_rec = traj.iterations.back();
    out.rotation_count = traj.rotations.size();
    out.dir = cfg.output_dir;

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    io::write_atomic(dir / "trajectory.csv", io::trajectory_csv(traj));
    io::write_atomic(dir / "iterations.csv", io::iterations_csv(traj.iterations));

    try {
        out.extrapolation = variance_extrapolate(traj.iterations, min_window, true);
        out.has_extrapolation = true;
        io::write_atomic(dir / "extrapolation.json",
                         detail::extrapolation_json(out.extrapolation).dump(2) + "\n");
    } catch (const std::invalid_argument&) {
        // Short or variance-free trajectories have no fit; the summary says so.
    }

    detail::json summary;
    summary["label"] = cfg.label;
    summary["config"] = detail::json::parse(dump_config(cfg));
    summary["occupation"] = occupation;
    summary["final"] =
        detail::final_json(out.final_rec, cfg.model.lattice.sites(), out.rotation_count,
                           out.termination);
    summary["extrapolation"] =
        out.has_extrapolation ? detail::extrapolation_json(out.extrapolation)
                              : detail::json(nullptr);
    io::write_atomic(dir / "summary.json", summary.dump(2) + "\n");
    return out;
}

inline int cmd_run(const std::string& config_path, const Overrides& ov) {
    try {
        RunConfig cfg = load_config(config_path);
        ov.apply(cfg);
        const RunOutcome out = with_width(cfg.model.qubit_count(), [&](auto width) {
            return run_pipeline<decltype(width)::value>(cfg, ov.min_window);
        });
        std::cout << "run " << cfg.label << ": corrected energy "
                  << io::g17(out.final_rec.corrected_energy) << ", "
                  << termination_name(out.termination) << " after " << out.final_rec.iteration
                  << " iterations, artifacts in " << out.dir << "\n";
        return out.termination == Termination::wall_capped ? kExitWallCap : kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "run: " << e.what() << "\n";
        return kExitRuntime;
    }
}

namespace detail {

inline std::string eps_dir_name(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "eps_%g", eps);
    return buf;
}

}  // namespace detail

inline int cmd_sweep(const std::string& config_path, const std::vector<double>& epsilons,
                     const Overrides& ov) {
    try {
        RunConfig base = load_config(config_path);
        ov.apply(base);
        if (epsilons.empty()) throw ConfigError("config: sweep needs at least one epsilon");
        for (double e : epsilons)
            if (std::isnan(e) || e < 0.0)
                throw ConfigError("config: sweep epsilons must be >= 0");

        struct Row {
            double eps;
            bool ok = false;
            std::string error;
            RunOutcome outcome;
        };
        std::vector<Row> rows;
        for (double eps : epsilons) {
            RunConfig sub = base;
            sub.vdbf.epsilon = eps;
            sub.label = base.label + "-" + detail::eps_dir_name(eps);
            sub.output_dir =
                (std::filesystem::path(base.output_dir) / detail::eps_dir_name(eps)).string();
            Row row{eps};
            try {
                row.outcome = with_width(sub.model.qubit_count(), [&](auto width) {
                    return run_pipeline<decltype(width)::value>(sub, ov.min_window);
                });
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
                std::cerr << "sweep eps=" << io::g17(eps) << ": " << e.what() << "\n";
            }
            rows.push_back(std::move(row));
        }

        // Completed, uncapped runs feed the zero-truncation fit; a capped
        // run's endpoint is premature and would bias it.
        std::vector<std::pair<double, double>> dw_points;
        std::vector<std::pair<double, double>> growth_points;
        for (const Row& r : rows) {
            if (!r.ok || r.outcome.termination == Termination::wall_capped) continue;
            dw_points.emplace_back(r.outcome.final_rec.discarded_weight,
                                   r.outcome.final_rec.corrected_energy);
            if (r.eps > 0.0 && r.outcome.final_rec.n_terms > 0)
                growth_points.emplace_back(std::log10(1.0 / r.eps),
                                           std::log10(double(r.outcome.final_rec.n_terms)));
        }

        std::string csv =
            "epsilon,status,termination,raw_energy,corrected_energy,variance,"
            "corrected_variance,discarded_weight,n_terms,iterations,wall_ms,run_dir\n";
        detail::json report;
        report["label"] = base.label;
        report["runs"] = detail::json::array();
        for (const Row& r : rows) {
            detail::json jr;
            jr["epsilon"] = r.eps;
            jr["status"] = r.ok ? "ok" : "failed";
            if (!r.ok) jr["error"] = r.error;
            if (r.ok) {
                jr["dir"] = r.outcome.dir;
                jr["final"] = detail::final_json(r.outcome.final_rec, base.model.lattice.sites(),
                                                 r.outcome.rotation_count, r.outcome.termination);
            }
            report["runs"].push_back(jr);

            csv += io::g17(r.eps);
            csv += r.ok ? ",ok," : ",failed,";
            if (r.ok) {
                const IterationRecord& rec = r.outcome.final_rec;
                csv += termination_name(r.outcome.termination);
                csv += ',';
                csv += io::g17(rec.raw_energy);
                csv += ',';
                csv += io::g17(rec.corrected_energy);
                csv += ',';
                csv += io::cell(rec.variance);
                csv += ',';
                csv += io::cell(rec.corrected_variance);
                csv += ',';
                csv += io::g17(rec.discarded_weight);
                csv += ',';
                csv += std::to_string(rec.n_terms);
                csv += ',';
                csv += std::to_string(rec.iteration);
                csv += ',';
                csv += io::g17(rec.wall_ms);
                csv += ',';
                csv += r.outcome.dir;
            } else {
                csv += ",,,,,,,,,";
            }
            csv += '\n';
        }

        report["dw_extrapolation"] = detail::json(nullptr);
        if (dw_points.size() >= 2) {
            try {
                report["dw_extrapolation"] = detail::extrapolation_json(dw_extrapolate(dw_points));
            } catch (const std::invalid_argument& e) {
                report["dw_extrapolation_error"] = e.what();
            }
        }
        report["growth"] = detail::json(nullptr);
        if (growth_points.size() >= 3) {
            try {
                const FitResult fit = polyfit(growth_points, 1);
                detail::json jg;
                jg["slope"] = fit.coefficients[1];
                jg["intercept"] = fit.intercept;
                jg["r_squared"] = fit.r_squared;
                jg["n_points"] = fit.n_points;
                report["growth"] = jg;
            } catch (const std::invalid_argument&) {
            }
        }

        const std::filesystem::path dir(base.output_dir);
        std::filesystem::create_directories(dir);
        io::write_atomic(dir / "sweep.csv", csv);
        io::write_atomic(dir / "sweep.json", report.dump(2) + "\n");

        bool any_failed = false;
        for (const Row& r : rows) any_failed = any_failed || !r.ok;
        if (!report["dw_extrapolation"].is_null()) {
            std::cout << "sweep " << base.label << ": zero-truncation estimate "
                      << io::g17(report["dw_extrapolation"]["estimate"].get<double>()) << " +- "
                      << io::g17(report["dw_extrapolation"]["uncertainty"].get<double>()) << "\n";
        } else {
            std::cout << "sweep " << base.label << ": no zero-truncation fit\n";
        }
        return any_failed ? kExitRuntime : kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "sweep: " << e.what() << "\n";
        return kExitRuntime;
    }
}

inline int cmd_flow(const std::string& config_path, const std::vector<std::uint32_t>& k_list,
                    double ds, int steps, const Overrides& ov) {
    try {
        RunConfig cfg = load_config(config_path);
        ov.apply(cfg);
        const int qubits = cfg.model.qubit_count();
        if (qubits > int(kMaxFlowQubits))
            throw ConfigError("config: flow is limited to " + std::to_string(kMaxFlowQubits) +
                              " qubits");
        if (k_list.empty()) throw ConfigError("config: flow needs at least one k");
        for (std::uint32_t k : k_list)
            if (k < 1 || int(k) > qubits)
                throw ConfigError("config: flow k must be in 1.." + std::to_string(qubits));
        if (!(ds > 0.0)) throw ConfigError("config: flow step size must be > 0");
        if (steps < 1) throw ConfigError("config: flow step count must be >= 1");

        const std::string occupation = resolved_occupation(cfg.model);
        const PauliSum<1> bare = build_model<1>(cfg.model);
        const PauliSum<1> h0 = fold_reference(bare, occupation).h0;
        const double exact = oracle::ground_energy(h0);

        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);

        detail::json report;
        report["label"] = cfg.label;
        report["exact_energy"] = exact;
        report["ds"] = ds;
        report["steps"] = steps;
        report["runs"] = detail::json::array();
        bool any_failed = false;
        for (std::uint32_t k : k_list) {
            detail::json jr;
            jr["k"] = k;
            try {
                const FlowTrace trace = integrate_dbf(h0, k, ds, steps);
                std::string csv = "s,energy,variance\n";
                for (const FlowPoint& pt : trace.points) {
                    csv += io::g17(pt.s);
                    csv += ',';
                    csv += io::g17(pt.energy);
                    csv += ',';
                    csv += io::g17(pt.variance);
                    csv += '\n';
                }
                const std::string name = "flow_k" + std::to_string(k) + ".csv";
                io::write_atomic(dir / name, csv);
                jr["status"] = "ok";
                jr["file"] = name;
                jr["final_energy"] = trace.points.back().energy;
                jr["final_variance"] = trace.points.back().variance;
            } catch (const std::exception& e) {
                jr["status"] = "failed";
                jr["error"] = e.what();
                any_failed = true;
                std::cerr << "flow k=" << k << ": " << e.what() << "\n";
            }
            report["runs"].push_back(jr);
        }
        io::write_atomic(dir / "flow_summary.json", report.dump(2) + "\n");
        std::cout << "flow " << cfg.label << ": exact energy " << io::g17(exact)
                  << ", traces in " << cfg.output_dir << "\n";
        return any_failed ? kExitRuntime : kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "flow: " << e.what() << "\n";
        return kExitRuntime;
    }
}

namespace detail {

/// 0-based (row, col) of a 1-based snake site index.
inline std::pair<int, int> site_coords(const LatticeSpec& lattice, int site) {
    const int row = (site - 1) / lattice.cols;
    const int offset = (site - 1) % lattice.cols;
    const int col = (row % 2 == 0) ? offset : lattice.cols - 1 - offset;
    return {row, col};
}

}  // namespace detail

/// Spin-spin correlations C(i,j) = <S_i . S_j> - <S_i> . <S_j> measured in
/// the state a recorded trajectory prepares. Observables are built in the
/// lab frame and folded by the run's occupation before replay.
inline int cmd_correlate(const std::string& run_dir,
                         const std::vector<std::pair<int, int>>& pairs, double obs_clip) {
    try {
        const std::filesystem::path dir(run_dir);
        if (!std::filesystem::exists(dir / "summary.json") ||
            !std::filesystem::exists(dir / "trajectory.csv"))
            throw ConfigError("config: '" + run_dir +
                              "' does not contain summary.json and trajectory.csv");
        if (std::isnan(obs_clip) || obs_clip < 0.0)
            throw ConfigError("config: obs_clip must be >= 0");
        if (pairs.empty()) throw ConfigError("config: no site pairs given");

        detail::json summary;
        try {
            summary = detail::json::parse(io::read_file(dir / "summary.json"));
        } catch (const detail::json::exception& e) {
            throw std::runtime_error(std::string("correlate: bad summary.json: ") + e.what());
        }
        const RunConfig cfg = parse_config(summary.at("config").dump());
        if (cfg.model.kind != ModelKind::heisenberg)
            throw ConfigError("config: correlations are defined for spin models only");
        const std::string occupation = summary.at("occupation").get<std::string>();
        const int sites = cfg.model.lattice.sites();
        for (const auto& [a, b] : pairs)
            if (a < 1 || a > sites || b < 1 || b > sites)
                throw ConfigError("config: site pair out of range 1.." + std::to_string(sites));

        using P = PauliString<1>;
        using Sum = PauliSum<1>;
        const auto n = std::uint32_t(sites);
        std::vector<std::uint32_t> flipped;
        for (std::uint32_t q = 1; q <= n; ++q)
            if (occupation[q - 1] == '1') flipped.push_back(q);

        Trajectory<1> traj;
        traj.rotations = io::parse_trajectory_rotations<1>(io::read_file(dir / "trajectory.csv"), n);

        const auto measure = [&](const Sum& lab_frame) {
            return measure_observable(conjugate_by_x(lab_frame, flipped), traj, obs_clip);
        };
        std::vector<std::array<double, 3>> spin(sites + 1, {0.0, 0.0, 0.0});
        std::vector<bool> have_spin(sites + 1, false);
        const auto spin_vector = [&](int site) {
            if (!have_spin[site]) {
                for (int axis = 0; axis < 3; ++axis) {
                    Sum o(n);
                    o.add(P::single(n, std::uint32_t(site), "XYZ"[axis]), 1.0);
                    spin[site][axis] = 0.5 * measure(o);
                }
                have_spin[site] = true;
            }
            return spin[site];
        };

        std::string csv = "i,j,distance,value,connected\n";
        for (const auto& [a, b] : pairs) {
            Sum o(n);
            if (a == b) {
                o.add(P(n), 0.75);  // S.S on one spin-1/2 site
            } else {
                for (char axis : {'X', 'Y', 'Z'}) {
                    P p(n);
                    p.set(std::uint32_t(a), axis);
                    p.set(std::uint32_t(b), axis);
                    o.add(p, 0.25);
                }
            }
            const double raw = measure(o);
            const auto sa = spin_vector(a);
            const auto sb = spin_vector(b);
            const double connected = raw - (sa[0] * sb[0] + sa[1] * sb[1] + sa[2] * sb[2]);
            const auto [ra, ca] = detail::site_coords(cfg.model.lattice, a);
            const auto [rb, cb] = detail::site_coords(cfg.model.lattice, b);
            const double dist = std::hypot(double(ra - rb), double(ca - cb));
            csv += std::to_string(a);
            csv += ',';
            csv += std::to_string(b);
            csv += ',';
            csv += io::g17(dist);
            csv += ',';
            csv += io::g17(raw);
            csv += ',';
            csv += io::g17(connected);
            csv += '\n';
            std::cout << "C(" << a << "," << b << ") = " << io::g17(raw)
                      << "  connected = " << io::g17(connected) << "\n";
        }
        io::write_atomic(dir / "correlations.csv", csv);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "correlate: " << e.what() << "\n";
        return kExitRuntime;
    }
}

/// Re-fits an existing run's iteration trace with different window rules and
/// refreshes its extrapolation.json.
inline int cmd_extrapolate(const std::string& run_dir, int min_window, bool corrected,
                           bool literal_r2) {
    try {
        const std::filesystem::path dir(run_dir);
        if (!std::filesystem::exists(dir / "iterations.csv"))
            throw ConfigError("config: '" + run_dir + "' does not contain iterations.csv");
        const auto records = io::parse_iterations_csv(io::read_file(dir / "iterations.csv"));
        const ExtrapolationResult res =
            variance_extrapolate(records, min_window, corrected, literal_r2);
        io::write_atomic(dir / "extrapolation.json",
                         detail::extrapolation_json(res).dump(2) + "\n");
        std::cout << "extrapolate: estimate " << io::g17(res.estimate) << " +- "
                  << io::g17(res.uncertainty) << " (window start " << res.window_start << ", "
                  << res.n_points << " points)\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "extrapolate: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace dbflow::driver
