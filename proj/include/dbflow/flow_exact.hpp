#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbflow/oracle.hpp"
#include "dbflow/pauli_sum.hpp"

namespace dbflow {

struct FlowPoint {
    double s = 0.0;
    double energy = 0.0;
    double variance = 0.0;
};

struct FlowTrace {
    std::vector<FlowPoint> points;
    Eigen::MatrixXcd final_hamiltonian;  // H(s_final), for spectrum checks
};

inline constexpr std::uint32_t kMaxFlowQubits = 10;

/// Sum of all Z-only strings of weight 1..k on n qubits, unit coefficients.
/// This is the k-body truncation of the reference projector |0..0><0..0|
/// with the identity and the global 2^-n prefactor stripped.
template <std::size_t W>
PauliSum<W> projector_k(std::uint32_t n, std::uint32_t k) {
    if (n == 0 || n > 16) throw std::invalid_argument("projector_k: qubit count out of range");
    if (k < 1 || k > n) throw std::invalid_argument("projector_k: k must be in 1..n");
    PauliSum<W> rho(n);
    const std::uint64_t dim = std::uint64_t(1) << n;
    for (std::uint64_t mask = 1; mask < dim; ++mask) {
        const int weight = std::popcount(mask);
        if (weight < 1 || int(k) < weight) continue;
        PauliString<W> p(n);
        p.z[0] = mask;
        rho.add(p, 1.0);
    }
    return rho;
}

namespace detail {

/// RK4 on dH/ds = [G, H] with G = [H, rho], rho diagonal and constant.
/// G is formed elementwise (G_ab = H_ab (d_b - d_a)) and the outer
/// commutator needs a single product: [G, H] = GH + (GH)^dag.
template <class Mat>
FlowTrace integrate_dense(Mat h, const Eigen::VectorXd& d, double ds, int steps) {
    const double norm0 = h.norm();
    const auto rhs = [&d](const Mat& m) -> Mat {
        Mat g = m * d.asDiagonal();
        g.noalias() -= d.asDiagonal() * m;
        Mat k = g * m;
        k += Mat(k.adjoint());
        return k;
    };
    const auto emit = [](const Mat& m, double s, FlowTrace& tr) {
        const double e = std::real(std::complex<double>(m(0, 0)));
        const double h2 = m.col(0).squaredNorm();
        tr.points.push_back({s, e, h2 - e * e});
    };

    FlowTrace trace;
    trace.points.reserve(steps + 1);
    emit(h, 0.0, trace);
    for (int step = 1; step <= steps; ++step) {
        const Mat k1 = rhs(h);
        const Mat k2 = rhs(Mat(h + (ds / 2) * k1));
        const Mat k3 = rhs(Mat(h + (ds / 2) * k2));
        const Mat k4 = rhs(Mat(h + ds * k3));
        h += (ds / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Negated comparison so a NaN norm also counts as divergence.
        if (!(h.norm() <= 1e6 * (norm0 + 1.0)))
            throw std::runtime_error("integrate_dbf: integrator diverged; reduce the step size");
        emit(h, ds * step, trace);
    }
    trace.final_hamiltonian = h.template cast<std::complex<double>>();
    return trace;
}

}  // namespace detail

/// Dense reference integration of the double-bracket flow
/// dH/ds = [[H, rho_k], H] against the k-body truncated reference projector.
/// rho_k carries its true 2^-n normalization here, so for k = n the energy
/// trace obeys dE/ds = -2 Var exactly (up to integrator error).
template <std::size_t W>
FlowTrace integrate_dbf(const PauliSum<W>& h, std::uint32_t k, double ds, int steps) {
    const std::uint32_t n = h.num_qubits();
    if (n > kMaxFlowQubits) throw std::invalid_argument("integrate_dbf: qubit count exceeds cap");
    if (!(ds > 0.0)) throw std::invalid_argument("integrate_dbf: step size must be > 0");
    if (steps < 1) throw std::invalid_argument("integrate_dbf: step count must be >= 1");
    if (!h.is_hermitian(1e-10)) throw std::invalid_argument("integrate_dbf: operator is not Hermitian");

    const std::size_t dim = std::size_t(1) << n;
    const PauliSum<W> rho = projector_k<W>(n, k);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    for (const auto& [p, c] : rho) {
        const std::uint64_t z = p.z[0];
        for (std::size_t b = 0; b < dim; ++b)
            d[b] += (std::popcount(z & b) & 1) ? -c.real() : c.real();
    }
    d /= double(dim);

    const Eigen::MatrixXcd h0 = oracle::to_dense(h).matrix;
    if (h0.imag().cwiseAbs().maxCoeff() < 1e-13) {
        Eigen::MatrixXd hr = h0.real();
        return detail::integrate_dense(std::move(hr), d, ds, steps);
    }
    return detail::integrate_dense(Eigen::MatrixXcd(h0), d, ds, steps);
}

}  // namespace dbflow
