#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "dbflow/flow_exact.hpp"
#include "dbflow/models.hpp"
#include "dbflow/oracle.hpp"
#include "helpers.hpp"

using dbflow::Boundary;
using dbflow::LatticeSpec;
using testutil::P1;
using testutil::Sum1;
namespace oracle = dbflow::oracle;

namespace {

Sum1 folded_ring(int sites) {
    const Sum1 h = dbflow::build_heisenberg<1>(LatticeSpec{1, sites, Boundary::periodic}, 1.0);
    return dbflow::fold_reference(h, dbflow::neel_occupation(sites)).h0;
}

Eigen::VectorXd sorted_spectrum(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("projector_k enumerates Z strings by weight", "[flow]") {
    const Sum1 p21 = dbflow::projector_k<1>(2, 1);
    CHECK(p21.size() == 2);
    CHECK(p21.coefficient(P1::parse("ZI")).real() == 1.0);
    CHECK(p21.coefficient(P1::parse("IZ")).real() == 1.0);

    CHECK(dbflow::projector_k<1>(3, 3).size() == 7);
    CHECK(dbflow::projector_k<1>(6, 1).size() == 6);
    CHECK(dbflow::projector_k<1>(6, 2).size() == 21);
    CHECK(dbflow::projector_k<1>(6, 6).size() == 63);

    for (const auto& [p, c] : dbflow::projector_k<1>(5, 3)) {
        CHECK(p.x_all_zero());
        CHECK(p.weight() >= 1);
        CHECK(p.weight() <= 3);
        CHECK(c.real() == 1.0);
    }

    CHECK_THROWS_AS(dbflow::projector_k<1>(4, 0), std::invalid_argument);
    CHECK_THROWS_AS(dbflow::projector_k<1>(4, 5), std::invalid_argument);
    CHECK_THROWS_AS(dbflow::projector_k<1>(17, 1), std::invalid_argument);
}

TEST_CASE("full projector materializes the reference-state dyad", "[flow]") {
    const int n = 4;
    const Eigen::Index dim = 16;
    const Eigen::MatrixXcd pd = oracle::to_dense(dbflow::projector_k<1>(n, n)).matrix;
    Eigen::MatrixXcd want = -Eigen::MatrixXcd::Identity(dim, dim);
    want(0, 0) += double(dim);
    REQUIRE(testutil::max_abs_diff(pd, want) < 1e-12);

    std::mt19937_64 rng(0x5eed0401);
    const Sum1 h = testutil::random_hermitian(rng, n, 16);
    const Eigen::MatrixXcd hd = testutil::dense(h);
    REQUIRE(testutil::max_abs_diff(hd * pd - pd * hd, hd * want - want * hd) < 1e-12);
}

TEST_CASE("diagonal operators are fixed points of the flow", "[flow]") {
    Sum1 h(3);
    h.add_term("ZZI", -0.5);
    h.add_term("IIZ", 0.25);
    const auto trace = dbflow::integrate_dbf(h, 2, 0.05, 40);
    REQUIRE(trace.points.size() == 41);
    for (const auto& pt : trace.points) {
        CHECK(pt.energy == trace.points.front().energy);
        CHECK(pt.variance == trace.points.front().variance);
    }
    CHECK(trace.points.back().s == Catch::Approx(2.0));
}

TEST_CASE("full-projector flow obeys the energy-variance law", "[flow]") {
    const Sum1 h0 = folded_ring(4);
    const double ds = 2e-4;
    const auto trace = dbflow::integrate_dbf(h0, 4, ds, 1500);
    REQUIRE(trace.points.size() == 1501);

    for (std::size_t i = 1; i + 1 < trace.points.size(); ++i) {
        const double de = (trace.points[i + 1].energy - trace.points[i - 1].energy) / (2.0 * ds);
        CHECK_THAT(de, Catch::Matchers::WithinAbs(-2.0 * trace.points[i].variance, 1e-6));
    }
    for (std::size_t i = 1; i < trace.points.size(); ++i)
        CHECK(trace.points[i].energy <= trace.points[i - 1].energy + 1e-9);
    CHECK(trace.points.back().energy < trace.points.front().energy - 0.1);
}

TEST_CASE("the flow is isospectral", "[flow]") {
    const Sum1 h0 = folded_ring(4);
    const Eigen::VectorXd before = sorted_spectrum(oracle::to_dense(h0).matrix);
    const auto trace = dbflow::integrate_dbf(h0, 2, 0.002, 500);
    const Eigen::VectorXd after = sorted_spectrum(trace.final_hamiltonian);
    REQUIRE(before.size() == after.size());
    for (Eigen::Index i = 0; i < before.size(); ++i)
        CHECK_THAT(after[i], Catch::Matchers::WithinAbs(before[i], 1e-8));
}

TEST_CASE("complex operators take the complex path and still satisfy the law", "[flow]") {
    std::mt19937_64 rng(0x5eed0402);
    Sum1 h = testutil::random_hermitian(rng, 3, 8);
    h.add_term("YII", 0.4);  // odd Y count makes the dense matrix complex
    const double ds = 2e-4;
    const auto trace = dbflow::integrate_dbf(h, 3, ds, 400);
    for (std::size_t i = 1; i + 1 < trace.points.size(); ++i) {
        const double de = (trace.points[i + 1].energy - trace.points[i - 1].energy) / (2.0 * ds);
        CHECK_THAT(de, Catch::Matchers::WithinAbs(-2.0 * trace.points[i].variance, 1e-6));
    }
    const Eigen::VectorXd before = sorted_spectrum(oracle::to_dense(h).matrix);
    const Eigen::VectorXd after = sorted_spectrum(trace.final_hamiltonian);
    for (Eigen::Index i = 0; i < before.size(); ++i)
        CHECK_THAT(after[i], Catch::Matchers::WithinAbs(before[i], 1e-8));
}

TEST_CASE("steps to an energy threshold shrink as the projector grows", "[flow]") {
    const Sum1 h0 = folded_ring(4);
    const double exact = oracle::ground_energy(h0);
    const double threshold = 0.05 * std::abs(exact);

    std::vector<int> steps_needed;
    for (std::uint32_t k = 1; k <= 4; ++k) {
        const auto trace = dbflow::integrate_dbf(h0, k, 0.01, 4000);
        int hit = -1;
        for (std::size_t i = 0; i < trace.points.size(); ++i) {
            if (trace.points[i].energy - exact < threshold) {
                hit = static_cast<int>(i);
                break;
            }
        }
        REQUIRE(hit >= 0);  // every projector order reaches the band
        steps_needed.push_back(hit);
    }
    for (std::size_t k = 1; k < steps_needed.size(); ++k)
        CHECK(steps_needed[k] <= steps_needed[k - 1]);
    CHECK(steps_needed.front() > steps_needed.back());
}

TEST_CASE("integrator guards", "[flow]") {
    const Sum1 h0 = folded_ring(4);
    CHECK_THROWS_AS(dbflow::integrate_dbf(h0, 4, 50.0, 200), std::runtime_error);
    CHECK_THROWS_AS(dbflow::integrate_dbf(h0, 4, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(dbflow::integrate_dbf(h0, 4, 0.01, 0), std::invalid_argument);
    CHECK_THROWS_AS(dbflow::integrate_dbf(h0, 0, 0.01, 10), std::invalid_argument);

    Sum1 wide(11);
    wide.add_term("ZIIIIIIIIII", 1.0);
    CHECK_THROWS_AS(dbflow::integrate_dbf(wide, 1, 0.01, 10), std::invalid_argument);
}
