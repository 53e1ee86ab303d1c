#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dbflow/trajectory.hpp"
#include "dbflow/vdbf.hpp"

namespace dbflow::io {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV cell: NaN renders as an empty field.
inline std::string cell(double v) { return std::isnan(v) ? std::string() : g17(v); }

/// Writes via a sibling temp file and a rename, so readers never observe a
/// truncated artifact.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("io: cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw std::runtime_error("io: short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("io: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline constexpr const char* kTrajectoryHeader =
    "iter,rot,generator_text,angle,energy,corrected_energy,variance,corrected_variance,"
    "n_terms,discarded_weight,wall_ms";

/// One row per rotation. Corrected energy folds in every loss up to and
/// including that rotation's clip. Iteration-level quantities (variance,
/// discarded weight, wall clock) are only known when an iteration closes,
/// so they appear on its final rotation row and are empty elsewhere.
template <std::size_t W>
std::string trajectory_csv(const Trajectory<W>& traj) {
    std::string out = kTrajectoryHeader;
    out += '\n';
    double cumulative_lost = traj.initial_lost_energy;
    int rot_in_iter = 0;
    int current_iter = 0;
    for (std::size_t i = 0; i < traj.rotations.size(); ++i) {
        const auto& r = traj.rotations[i];
        if (r.iteration != current_iter) {
            current_iter = r.iteration;
            rot_in_iter = 0;
        }
        ++rot_in_iter;
        cumulative_lost += r.lost_energy_increment;

        const bool closes_iteration =
            i + 1 == traj.rotations.size() || traj.rotations[i + 1].iteration != r.iteration;
        const IterationRecord* rec = nullptr;
        if (closes_iteration) {
            for (const auto& it : traj.iterations)
                if (it.iteration == r.iteration) rec = &it;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out += std::to_string(r.iteration);
        out += ',';
        out += std::to_string(rot_in_iter);
        out += ',';
        out += r.generator.text();
        out += ',';
        out += g17(r.angle);
        out += ',';
        out += g17(r.energy_after);
        out += ',';
        out += g17(r.energy_after + cumulative_lost);
        out += ',';
        out += cell(rec ? rec->variance : nan);
        out += ',';
        out += cell(rec ? rec->corrected_variance : nan);
        out += ',';
        out += std::to_string(r.terms_after);
        out += ',';
        out += cell(rec ? rec->discarded_weight : nan);
        out += ',';
        out += cell(rec ? rec->wall_ms : nan);
        out += '\n';
    }
    return out;
}

inline constexpr const char* kIterationsHeader =
    "iteration,raw_energy,corrected_energy,variance,corrected_variance,discarded_weight,"
    "gradient_norm,wall_ms,n_terms";

inline std::string iterations_csv(const std::vector<IterationRecord>& iterations) {
    std::string out = kIterationsHeader;
    out += '\n';
    for (const auto& it : iterations) {
        out += std::to_string(it.iteration);
        out += ',';
        out += g17(it.raw_energy);
        out += ',';
        out += g17(it.corrected_energy);
        out += ',';
        out += cell(it.variance);
        out += ',';
        out += cell(it.corrected_variance);
        out += ',';
        out += g17(it.discarded_weight);
        out += ',';
        out += g17(it.gradient_norm);
        out += ',';
        out += g17(it.wall_ms);
        out += ',';
        out += std::to_string(it.n_terms);
        out += '\n';
    }
    return out;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            return cells;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double parse_cell(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("io: bad numeric field '" + s + "'");
    return v;
}

inline std::vector<std::string> csv_lines(const std::string& text, const char* expected_header,
                                          const char* what) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty() || lines.front() != expected_header)
        throw std::runtime_error(std::string("io: ") + what + " header mismatch");
    lines.erase(lines.begin());
    return lines;
}

inline std::vector<IterationRecord> parse_iterations_csv(const std::string& text) {
    std::vector<IterationRecord> out;
    for (const std::string& line : csv_lines(text, kIterationsHeader, "iterations")) {
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) throw std::runtime_error("io: iterations row has wrong arity");
        IterationRecord r;
        r.iteration = int(parse_cell(cells[0]));
        r.raw_energy = parse_cell(cells[1]);
        r.corrected_energy = parse_cell(cells[2]);
        r.variance = parse_cell(cells[3]);
        r.corrected_variance = parse_cell(cells[4]);
        r.discarded_weight = parse_cell(cells[5]);
        r.gradient_norm = parse_cell(cells[6]);
        r.wall_ms = parse_cell(cells[7]);
        r.n_terms = std::size_t(parse_cell(cells[8]));
        out.push_back(r);
    }
    return out;
}

/// Reads back just enough of a trajectory CSV to replay it: generators and
/// angles, in recorded order.
template <std::size_t W>
std::vector<RotationRecord<W>> parse_trajectory_rotations(const std::string& text,
                                                          std::uint32_t qubits) {
    std::vector<RotationRecord<W>> out;
    for (const std::string& line : csv_lines(text, kTrajectoryHeader, "trajectory")) {
        const auto cells = split_csv_line(line);
        if (cells.size() != 11) throw std::runtime_error("io: trajectory row has wrong arity");
        RotationRecord<W> r;
        r.iteration = int(parse_cell(cells[0]));
        r.generator = PauliString<W>::parse(cells[2]);
        if (r.generator.n != qubits)
            throw std::runtime_error("io: trajectory generator width mismatch");
        r.angle = parse_cell(cells[3]);
        r.energy_after = parse_cell(cells[4]);
        r.terms_after = std::size_t(parse_cell(cells[8]));
        out.push_back(r);
    }
    return out;
}

}  // namespace dbflow::io
