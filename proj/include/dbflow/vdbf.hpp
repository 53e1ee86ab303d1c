#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dbflow/pauli_sum.hpp"
#include "dbflow/trajectory.hpp"

namespace dbflow {

struct VdbfConfig {
    double epsilon = 1e-3;      // coefficient truncation threshold
    int n_rots = 50;            // rotations per iteration
    int max_iter = 100;
    double conv_thresh = 1e-3;  // gradient 2-norm convergence test
    double gen_clip = 1e-6;     // truncation for the flow generator
    bool track_variance = true;
    int variance_stride = 1;        // iterations between variance evaluations
    std::uint64_t wall_cap_ms = 0;  // 0 disables the wall-clock guard

    void validate() const {
        if (std::isnan(epsilon) || epsilon < 0.0) throw std::invalid_argument("vdbf: epsilon must be >= 0");
        if (std::isnan(gen_clip) || gen_clip < 0.0) throw std::invalid_argument("vdbf: gen_clip must be >= 0");
        if (std::isnan(conv_thresh) || conv_thresh < 0.0)
            throw std::invalid_argument("vdbf: conv_thresh must be >= 0");
        if (n_rots < 1) throw std::invalid_argument("vdbf: n_rots must be >= 1");
        if (max_iter < 1) throw std::invalid_argument("vdbf: max_iter must be >= 1");
        if (variance_stride < 1) throw std::invalid_argument("vdbf: variance_stride must be >= 1");
    }
};

/// A variance below this is treated as "already an eigenstate" when the
/// generator empties out and the flow cannot move.
inline constexpr double kStallVarianceTol = 1e-9;

/// Rotations with |theta*| below this are recorded but applied as no-ops.
inline constexpr double kZeroAngleTol = 1e-12;

template <std::size_t W>
struct RotationRecord {
    PauliString<W> generator;
    double angle = 0.0;  // in (-pi, pi]
    double energy_after = 0.0;
    double lost_energy_increment = 0.0;
    double lost_variance_increment = 0.0;  // NaN when variance is not tracked
    std::size_t terms_after = 0;
    int iteration = 0;  // 1-based iteration this rotation belongs to
};

template <std::size_t W>
struct Trajectory {
    std::vector<RotationRecord<W>> rotations;
    std::vector<IterationRecord> iterations;
    Termination termination = Termination::max_iter_reached;
    double initial_lost_energy = 0.0;    // losses from clipping H before any rotation
    double initial_lost_variance = 0.0;  // NaN when variance is not tracked
};

/// G = clip(sum_i [H, Z_i], gen_clip): anti-Hermitian, purely imaginary
/// coefficients. Each term of H contributes one generator string per set x
/// bit (X -> Y and Y -> X at that site), merged with interference.
template <std::size_t W>
PauliSum<W> build_generator(const PauliSum<W>& h, double gen_clip) {
    if (std::isnan(gen_clip) || gen_clip < 0.0)
        throw std::invalid_argument("build_generator: gen_clip must be >= 0");
    PauliSum<W> g(h.num_qubits());
    g.reserve(h.size() * 2);
    for (const auto& [s, c] : h) {
        for (std::size_t w = 0; w < W; ++w) {
            std::uint64_t bits = s.x[w];
            while (bits) {
                const std::uint64_t bit = bits & (~bits + 1);
                bits ^= bit;
                PauliString<W> prod = s;
                prod.z[w] ^= bit;
                // phi(s, Z_i) is -i for X at the site, +i for Y.
                const bool was_y = (s.z[w] & bit) != 0;
                const std::complex<double> coeff =
                    std::complex<double>(0.0, was_y ? 2.0 : -2.0) * c;
                g.add(prod, coeff);
            }
        }
    }
    if (gen_clip == 0.0) return g;
    return clip(g, gen_clip).sum;
}

template <std::size_t W>
struct Ranking {
    std::vector<PauliString<W>> candidates;  // sorted, best first
    std::vector<double> weights;             // aligned with candidates
    double gradient_norm = 0.0;
};

/// Scores every generator term P_i by w_i = g_i <0|[P_i, H]|0> (real), and
/// orders by |w_i| descending with lexicographic (x, z) tie-breaking. The
/// returned 2-norm over all weights feeds the convergence test.
template <std::size_t W>
Ranking<W> rank_candidates(const PauliSum<W>& g, const PauliSum<W>& h) {
    if (g.num_qubits() != h.num_qubits())
        throw std::invalid_argument("rank_candidates: qubit count mismatch");
    const detail::XBuckets<W> buckets(h);

    struct Scored {
        const PauliString<W>* p;
        double w;
    };
    std::vector<Scored> scored;
    scored.reserve(g.size());
    double norm_sq = 0.0;
    for (const auto& [p, gc] : g) {
        // <0|[P_i, H]|0> = i * sum over same-x anticommuting terms of
        // 2 c_k Im(phi(P_i, P_k)); pair it with g_i = i Im(g_i).
        double beta = 0.0;
        if (const auto* bucket = buckets.find(p.x)) {
            for (const auto* entry : *bucket) {
                int plus = 0, minus = 0;
                for (std::size_t w = 0; w < W; ++w)
                    detail::phase_tally(p.x[w], p.z[w], entry->first.x[w], entry->first.z[w], plus,
                                        minus);
                switch (((plus - minus) % 4 + 4) % 4) {
                    case 1: beta += 2.0 * entry->second.real(); break;
                    case 3: beta -= 2.0 * entry->second.real(); break;
                    default: break;  // commuting pair, no contribution
                }
            }
        }
        const double w_i = -gc.imag() * beta;
        norm_sq += w_i * w_i;
        scored.push_back({&p, w_i});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (std::abs(a.w) != std::abs(b.w)) return std::abs(a.w) > std::abs(b.w);
        return PauliString<W>::lex_less(*a.p, *b.p);
    });

    Ranking<W> out;
    out.candidates.reserve(scored.size());
    out.weights.reserve(scored.size());
    for (const auto& s : scored) {
        out.candidates.push_back(*s.p);
        out.weights.push_back(s.w);
    }
    out.gradient_norm = std::sqrt(norm_sq);
    return out;
}

struct OptimalAngle {
    double theta = 0.0;   // in (-pi, pi]
    double energy = 0.0;  // minimum of the rotation cost, F(theta*)
};

/// The energy under a rotation by P is F(theta) = a0 + A cos(theta)
/// + B sin(theta); one pass over H collects E = F(0), A and B, then
/// theta* = atan2(-B, -A) and F* = (E - A) - sqrt(A^2 + B^2). A degenerate
/// direction (A = B = 0) reports theta* = 0.
template <std::size_t W>
OptimalAngle optimal_angle(const PauliSum<W>& h, const PauliString<W>& p) {
    if (h.num_qubits() != p.n) throw std::invalid_argument("optimal_angle: qubit count mismatch");
    double e = 0.0, a = 0.0, b = 0.0;
    for (const auto& [s, c] : h) {
        if (std::abs(c.imag()) > 1e-10 * std::max(1.0, std::abs(c)))
            throw std::invalid_argument("optimal_angle: operator is not Hermitian within tolerance");
        const bool same_x = s.x == p.x;
        const bool diagonal = s.x_all_zero();
        if (!(same_x || diagonal)) continue;
        if (commutes(s, p)) {
            if (diagonal) e += c.real();
            continue;
        }
        if (diagonal) {
            e += c.real();
            a += c.real();
        }
        if (same_x) {
            auto prod = multiply(p, s);
            const double unit = ((prod.phase_exp + 1) & 3) == 0 ? 1.0 : -1.0;  // i * phi
            b += c.real() * unit;
        }
    }
    if (a == 0.0 && b == 0.0) return {0.0, e};
    double theta = std::atan2(-b, -a);
    if (theta <= -M_PI) theta = M_PI;
    return {theta, (e - a) - std::hypot(a, b)};
}

template <std::size_t W>
struct VdbfResult {
    PauliSum<W> hamiltonian;
    Trajectory<W> trajectory;
};

/// Greedy double-bracket flow: per iteration, build the clipped one-body
/// generator, rank its terms once, then rotate by the top n_rots candidates
/// in ranked order, each at its analytically optimal angle, truncating at
/// epsilon after every rotation. Truncation losses are accumulated into
/// corrected energy and variance streams.
template <std::size_t W>
VdbfResult<W> vdbf_run(const PauliSum<W>& h0, const VdbfConfig& cfg) {
    cfg.validate();
    if (!h0.is_hermitian(1e-10)) throw std::invalid_argument("vdbf_run: operator is not Hermitian");
    const auto t_start = std::chrono::steady_clock::now();
    const auto elapsed_ms = [&t_start] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    };
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    // The initial clip is a clip event like any other: its losses feed the
    // corrected streams.
    auto initial = clip(h0, cfg.epsilon);
    VdbfResult<W> result{std::move(initial.sum), {}};
    PauliSum<W>& h = result.hamiltonian;
    Trajectory<W>& traj = result.trajectory;
    const double norm0 = frobenius_sq(h0);

    double lost_energy = initial.report.removed_energy;
    double lost_variance = 0.0;
    if (cfg.track_variance && !initial.removed.empty())
        lost_variance = variance_delta(h, initial.removed);
    traj.initial_lost_energy = lost_energy;
    traj.initial_lost_variance = cfg.track_variance ? lost_variance : nan;

    bool capped = false;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const PauliSum<W> gen = build_generator(h, cfg.gen_clip);
        const Ranking<W> ranking = rank_candidates(gen, h);

        const bool out_of_moves = ranking.candidates.empty();
        const bool converged = !out_of_moves && ranking.gradient_norm < cfg.conv_thresh;
        if (out_of_moves || converged) {
            const double raw = expectation_zero(h);
            const double var = variance_zero(h);
            traj.iterations.push_back({iter, raw, raw + lost_energy, var, var + lost_variance,
                                       norm0 - frobenius_sq(h), ranking.gradient_norm,
                                       elapsed_ms(), h.size()});
            traj.termination = (out_of_moves && var > kStallVarianceTol)
                                   ? Termination::stalled
                                   : Termination::converged;
            return result;
        }

        const std::size_t rots = std::min<std::size_t>(cfg.n_rots, ranking.candidates.size());
        for (std::size_t j = 0; j < rots; ++j) {
            const PauliString<W>& p = ranking.candidates[j];
            const OptimalAngle opt = optimal_angle(h, p);
            double removed_energy = 0.0;
            double dvar = cfg.track_variance ? 0.0 : nan;
            if (std::abs(opt.theta) >= kZeroAngleTol) {
                auto clipped = clip(evolve(h, p, opt.theta), cfg.epsilon);
                h = std::move(clipped.sum);
                removed_energy = clipped.report.removed_energy;
                lost_energy += removed_energy;
                if (cfg.track_variance && !clipped.removed.empty()) {
                    dvar = variance_delta(h, clipped.removed);
                    lost_variance += dvar;
                }
            }
            traj.rotations.push_back(
                {p, opt.theta, expectation_zero(h), removed_energy, dvar, h.size(), iter});
            if (cfg.wall_cap_ms > 0 && elapsed_ms() > double(cfg.wall_cap_ms)) {
                capped = true;
                break;
            }
        }

        const bool eval_var = cfg.track_variance && ((iter - 1) % cfg.variance_stride == 0);
        const double var = eval_var ? variance_zero(h) : nan;
        const double raw = expectation_zero(h);
        traj.iterations.push_back({iter, raw, raw + lost_energy, var,
                                   eval_var ? var + lost_variance : nan,
                                   norm0 - frobenius_sq(h), ranking.gradient_norm, elapsed_ms(),
                                   h.size()});
        if (capped) {
            traj.termination = Termination::wall_capped;
            return result;
        }
    }
    traj.termination = Termination::max_iter_reached;

    // Make sure the terminal iteration carries a variance point: the
    // extrapolation window is anchored at the final step.
    if (cfg.track_variance && !traj.iterations.empty() &&
        std::isnan(traj.iterations.back().variance)) {
        const double var = variance_zero(h);
        traj.iterations.back().variance = var;
        traj.iterations.back().corrected_variance = var + lost_variance;
    }
    return result;
}

/// Replays recorded rotations through evolve/clip; with the run's epsilon
/// this reproduces the run's final operator term for term.
template <std::size_t W>
PauliSum<W> replay_rotations(const PauliSum<W>& h0, const std::vector<RotationRecord<W>>& rotations,
                             double eps) {
    PauliSum<W> h = clip(h0, eps).sum;
    for (const auto& r : rotations) {
        if (std::abs(r.angle) < kZeroAngleTol) continue;
        h = clip(evolve(h, r.generator, r.angle), eps).sum;
    }
    return h;
}

/// Heisenberg-picture expectation of an observable in the state prepared by
/// a recorded trajectory: O is pushed through the same rotations in recorded
/// order, truncating at obs_clip after each one.
template <std::size_t W>
double measure_observable(const PauliSum<W>& obs, const Trajectory<W>& traj, double obs_clip) {
    PauliSum<W> o = obs;
    for (const auto& r : traj.rotations) {
        if (std::abs(r.angle) < kZeroAngleTol) continue;
        o = clip(evolve(o, r.generator, r.angle), obs_clip).sum;
    }
    return expectation_zero(o);
}

}  // namespace dbflow
