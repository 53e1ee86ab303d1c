#pragma once

#include <algorithm>
#include <random>

#include "dbflow/oracle.hpp"
#include "dbflow/pauli_sum.hpp"

namespace testutil {

using P1 = dbflow::PauliString<1>;
using Sum1 = dbflow::PauliSum<1>;

inline P1 random_string(std::mt19937_64& rng, std::uint32_t n, bool allow_identity = false) {
    static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
    std::uniform_int_distribution<int> pick(0, 3);
    for (;;) {
        P1 p(n);
        for (std::uint32_t q = 1; q <= n; ++q) p.set(q, letters[pick(rng)]);
        if (allow_identity || !p.is_identity()) return p;
    }
}

inline Sum1 random_hermitian(std::mt19937_64& rng, std::uint32_t n, int terms,
                             bool allow_identity = true) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    // A small register cannot host arbitrarily many distinct strings; cap the
    // target so the fill loop terminates on 1-2 qubit inputs.
    long long capacity = 1;
    for (std::uint32_t q = 0; q < n && capacity <= terms; ++q) capacity *= 4;
    if (!allow_identity) --capacity;
    const int want = static_cast<int>(std::min<long long>(terms, capacity));
    Sum1 h(n);
    while (int(h.size()) < want) {
        double c = coeff(rng);
        if (c == 0.0) continue;
        h.add(random_string(rng, n, allow_identity), c);
    }
    return h;
}

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline Eigen::MatrixXcd dense(const Sum1& h) { return dbflow::oracle::to_dense(h).matrix; }

inline Eigen::MatrixXcd dense(const P1& p) { return dbflow::oracle::to_dense(p).matrix; }

}  // namespace testutil
