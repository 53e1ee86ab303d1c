#pragma once

#include <cstddef>
#include <string>

namespace dbflow {

enum class Termination { converged, max_iter_reached, stalled, wall_capped };

inline std::string termination_name(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter_reached: return "max_iter_reached";
        case Termination::stalled: return "stalled";
        case Termination::wall_capped: return "wall_capped";
    }
    return "unknown";
}

/// State of the flow at the end of one iteration. Variance fields are NaN
/// on iterations where the variance was not evaluated (stride skips, or
/// tracking disabled); corrected values fold in the accumulated truncation
/// losses.
struct IterationRecord {
    int iteration = 0;  // 1-based
    double raw_energy = 0.0;
    double corrected_energy = 0.0;
    double variance = 0.0;
    double corrected_variance = 0.0;
    double discarded_weight = 0.0;
    double gradient_norm = 0.0;
    double wall_ms = 0.0;  // cumulative wall clock since the run started
    std::size_t n_terms = 0;
};

}  // namespace dbflow
