#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dbflow/trajectory.hpp"

namespace dbflow {

struct FitResult {
    double intercept = 0.0;            // fitted value at x = 0
    std::vector<double> coefficients;  // constant term first
    double r_squared = 0.0;            // 1 - SS_res / SS_tot
    int n_points = 0;
    double intercept_stderr = 0.0;
    bool condition_warning = false;  // |x| spans more than 6 orders of magnitude
};

namespace detail {

inline FitResult least_squares(const std::vector<std::pair<double, double>>& pts, int degree,
                               bool allow_exact) {
    const int n = int(pts.size());
    const int params = degree + 1;
    const int min_pts = allow_exact ? params : params + 1;
    if (n < min_pts) throw std::invalid_argument("polyfit: not enough points for the degree");

    Eigen::MatrixXd a(n, params);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double pw = 1.0;
        for (int j = 0; j < params; ++j) {
            a(i, j) = pw;
            pw *= pts[i].first;
        }
        y[i] = pts[i].second;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < params) throw std::invalid_argument("polyfit: degenerate fit (collinear inputs)");
    const Eigen::VectorXd beta = qr.solve(y);

    FitResult out;
    out.n_points = n;
    out.coefficients.assign(beta.data(), beta.data() + params);
    out.intercept = beta[0];

    const Eigen::VectorXd resid = y - a * beta;
    const double ss_res = resid.squaredNorm();
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).matrix().squaredNorm();
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-300 ? 1.0 : 0.0);

    if (n > params) {
        const double sigma_sq = ss_res / double(n - params);
        const Eigen::MatrixXd cov = sigma_sq * (a.transpose() * a).inverse();
        out.intercept_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
    }

    double min_nz = std::numeric_limits<double>::infinity(), max_abs = 0.0;
    for (const auto& [x, yy] : pts) {
        const double ax = std::abs(x);
        max_abs = std::max(max_abs, ax);
        if (ax > 0.0) min_nz = std::min(min_nz, ax);
    }
    out.condition_warning = std::isfinite(min_nz) && max_abs / min_nz > 1e6;
    return out;
}

}  // namespace detail

/// Ordinary least squares for degree 1 or 2; requires strictly more points
/// than parameters so a residual scale exists.
inline FitResult polyfit(const std::vector<std::pair<double, double>>& pts, int degree) {
    if (degree != 1 && degree != 2) throw std::invalid_argument("polyfit: degree must be 1 or 2");
    return detail::least_squares(pts, degree, false);
}

enum class ExtrapolationMethod { variance, discarded_weight };

inline std::string method_name(ExtrapolationMethod m) {
    return m == ExtrapolationMethod::variance ? "variance" : "discarded_weight";
}

struct ExtrapolationResult {
    double estimate = 0.0;     // midpoint of the linear and quadratic intercepts
    double uncertainty = 0.0;  // half their separation (or a stderr in fallback)
    int window_start = 0;      // index of the first point used
    ExtrapolationMethod method = ExtrapolationMethod::variance;
    int n_points = 0;
    double b_linear = 0.0;
    double b_quadratic = 0.0;
    double r_squared_linear = 0.0;
    bool linear_only = false;  // quadratic fit was not possible; stderr uncertainty
    bool condition_warning = false;
};

/// Zero-variance extrapolation of an energy trajectory. Every tail window
/// [k, end] with at least min_window points is scored by
/// |b1 - b2| / 2 + (1 - R^2_linear) (the literal flag scores with + R^2
/// instead); the minimizing window wins, ties preferring the larger window.
/// The estimate is the average of the two intercepts, the uncertainty half
/// their difference.
inline ExtrapolationResult variance_extrapolate(const std::vector<IterationRecord>& iterations,
                                                int min_window = 10, bool corrected = true,
                                                bool literal_r2_score = false) {
    if (min_window < 4)
        throw std::invalid_argument("variance_extrapolate: min_window must be >= 4");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(iterations.size());
    for (const auto& rec : iterations) {
        if (std::isnan(rec.variance)) continue;
        if (corrected) pts.emplace_back(rec.corrected_variance, rec.corrected_energy);
        else pts.emplace_back(rec.variance, rec.raw_energy);
    }
    const int m = int(pts.size());
    if (m < min_window)
        throw std::invalid_argument("variance_extrapolate: fewer variance points than min_window");

    ExtrapolationResult best;
    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int k = 0; k + min_window <= m; ++k) {
        const std::vector<std::pair<double, double>> window(pts.begin() + k, pts.end());
        FitResult lin, quad;
        try {
            lin = polyfit(window, 1);
            quad = polyfit(window, 2);
        } catch (const std::invalid_argument&) {
            continue;  // degenerate window (e.g. identical variances)
        }
        const double unc = std::abs(lin.intercept - quad.intercept) / 2.0;
        const double score = unc + (literal_r2_score ? lin.r_squared : 1.0 - lin.r_squared);
        // A window must beat the incumbent by more than rounding dust, so
        // exact ties (e.g. perfectly linear data) keep the widest window.
        if (score + 1e-12 * (1.0 + std::abs(score)) < best_score) {
            best_score = score;
            found = true;
            best.estimate = (lin.intercept + quad.intercept) / 2.0;
            best.uncertainty = unc;
            best.window_start = k;
            best.n_points = m - k;
            best.b_linear = lin.intercept;
            best.b_quadratic = quad.intercept;
            best.r_squared_linear = lin.r_squared;
            best.condition_warning = lin.condition_warning;
        }
    }
    if (!found) throw std::invalid_argument("variance_extrapolate: all windows degenerate");
    best.method = ExtrapolationMethod::variance;
    return best;
}

/// Zero-truncation extrapolation over per-run (discarded weight, energy)
/// endpoints. With four or more runs the estimate averages the linear and
/// quadratic intercepts; with two or three only the line is fit and the
/// linear intercept's standard error is reported as the uncertainty.
inline ExtrapolationResult dw_extrapolate(const std::vector<std::pair<double, double>>& runs) {
    const int m = int(runs.size());
    if (m < 2) throw std::invalid_argument("dw_extrapolate: need at least 2 runs");

    ExtrapolationResult out;
    out.method = ExtrapolationMethod::discarded_weight;
    out.n_points = m;
    if (m <= 3) {
        const FitResult lin = detail::least_squares(runs, 1, true);
        out.estimate = lin.intercept;
        out.uncertainty = lin.intercept_stderr;
        out.b_linear = lin.intercept;
        out.b_quadratic = std::numeric_limits<double>::quiet_NaN();
        out.r_squared_linear = lin.r_squared;
        out.linear_only = true;
        out.condition_warning = lin.condition_warning;
        return out;
    }
    const FitResult lin = polyfit(runs, 1);
    const FitResult quad = polyfit(runs, 2);
    out.estimate = (lin.intercept + quad.intercept) / 2.0;
    out.uncertainty = std::abs(lin.intercept - quad.intercept) / 2.0;
    out.b_linear = lin.intercept;
    out.b_quadratic = quad.intercept;
    out.r_squared_linear = lin.r_squared;
    out.condition_warning = lin.condition_warning || quad.condition_warning;
    return out;
}

}  // namespace dbflow
