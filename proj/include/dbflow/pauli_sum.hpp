#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dbflow/pauli_string.hpp"

namespace dbflow {

/// Sparse Hermitian-or-anti-Hermitian operator: a hash map from Pauli
/// strings to complex coefficients. Exact-zero coefficients produced by
/// destructive interference are purged on the spot, so begin()/end() only
/// ever visit live terms.
template <std::size_t W>
class PauliSum {
  public:
    using Map = std::unordered_map<PauliString<W>, std::complex<double>, PauliStringHash<W>>;
    using const_iterator = typename Map::const_iterator;

    explicit PauliSum(std::uint32_t qubits) : n_(qubits) {
        if (qubits == 0 || qubits > PauliString<W>::max_qubits)
            throw std::invalid_argument("PauliSum: qubit count out of range");
    }

    std::uint32_t num_qubits() const { return n_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    void reserve(std::size_t k) { terms_.reserve(k); }

    const_iterator begin() const { return terms_.begin(); }
    const_iterator end() const { return terms_.end(); }

    /// Merges a term into the sum; cancellations that land exactly on zero
    /// delete the entry.
    void add(const PauliString<W>& p, std::complex<double> c) {
        if (p.n != n_) throw std::invalid_argument("PauliSum::add: qubit count mismatch");
        if (c == std::complex<double>(0.0, 0.0)) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(p, c);
        if (!inserted) {
            it->second += c;
            if (it->second == std::complex<double>(0.0, 0.0)) terms_.erase(it);
        }
    }

    void add_term(std::string_view letters, std::complex<double> c) {
        add(PauliString<W>::parse(letters), c);
    }

    std::complex<double> coefficient(const PauliString<W>& p) const {
        auto it = terms_.find(p);
        return it == terms_.end() ? std::complex<double>(0.0, 0.0) : it->second;
    }

    bool is_hermitian(double tol = 1e-10) const {
        for (const auto& [p, c] : terms_)
            if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
        return true;
    }

    bool is_anti_hermitian(double tol = 1e-10) const {
        for (const auto& [p, c] : terms_)
            if (std::abs(c.real()) > tol * std::max(1.0, std::abs(c))) return false;
        return true;
    }

  private:
    std::uint32_t n_;
    Map terms_;
};

struct ClipReport {
    double removed_norm_sq = 0.0;
    double removed_energy = 0.0;
    std::size_t removed_count = 0;
};

template <std::size_t W>
struct ClipResult {
    PauliSum<W> sum;
    PauliSum<W> removed;
    ClipReport report;
};

/// Drops every term with |c| < eps. The identity term is exempt: constant
/// offsets survive arbitrarily aggressive truncation. Idempotent.
template <std::size_t W>
ClipResult<W> clip(const PauliSum<W>& h, double eps) {
    if (std::isnan(eps) || eps < 0.0) throw std::invalid_argument("clip: threshold must be >= 0");
    ClipResult<W> out{PauliSum<W>(h.num_qubits()), PauliSum<W>(h.num_qubits()), {}};
    out.sum.reserve(h.size());
    for (const auto& [p, c] : h) {
        if (std::abs(c) >= eps || p.is_identity()) {
            out.sum.add(p, c);
        } else {
            out.removed.add(p, c);
            out.report.removed_norm_sq += std::norm(c);
            out.report.removed_count += 1;
            if (p.x_all_zero()) out.report.removed_energy += c.real();
        }
    }
    return out;
}

/// Trace-normalized squared Frobenius norm: sum of |c|^2 over stored terms.
template <std::size_t W>
double frobenius_sq(const PauliSum<W>& h) {
    double s = 0.0;
    for (const auto& [p, c] : h) s += std::norm(c);
    return s;
}

namespace detail {

template <std::size_t W>
void require_real(const PauliSum<W>& h, const char* who) {
    if (!h.is_hermitian(1e-10))
        throw std::invalid_argument(std::string(who) + ": operator is not Hermitian within tolerance");
}

}  // namespace detail

/// <0...0| H |0...0>: the sum of coefficients of the x-free (diagonal) terms.
template <std::size_t W>
double expectation_zero(const PauliSum<W>& h) {
    detail::require_real(h, "expectation_zero");
    double e = 0.0;
    for (const auto& [p, c] : h)
        if (p.x_all_zero()) e += c.real();
    return e;
}

namespace detail {

/// Terms grouped by their x bit pattern. <0|P_i P_j|0> vanishes unless
/// x_i == x_j, so all reference-state contractions reduce to per-bucket work.
template <std::size_t W>
class XBuckets {
  public:
    explicit XBuckets(const PauliSum<W>& h) {
        buckets_.reserve(h.size());
        for (auto it = h.begin(); it != h.end(); ++it)
            buckets_[it->first.x].push_back(&*it);
    }

    using Entry = const std::pair<const PauliString<W>, std::complex<double>>*;
    using Key = std::array<std::uint64_t, W>;

    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 0x2545f4914f6cdd1dull;
            for (std::uint64_t w : k) {
                h ^= w;
                h *= 0x100000001b3ull;
                h ^= h >> 29;
            }
            return static_cast<std::size_t>(h);
        }
    };

    const std::vector<Entry>* find(const Key& k) const {
        auto it = buckets_.find(k);
        return it == buckets_.end() ? nullptr : &it->second;
    }

    const std::unordered_map<Key, std::vector<Entry>, KeyHash>& all() const { return buckets_; }

  private:
    std::unordered_map<Key, std::vector<Entry>, KeyHash> buckets_;
};

/// Real part of <0| P_a P_b |0> for two same-x strings (0 when they
/// anticommute, else the +-1 product phase).
template <std::size_t W>
inline double pair_contraction(const PauliString<W>& a, const PauliString<W>& b) {
    int plus = 0, minus = 0;
    for (std::size_t w = 0; w < W; ++w)
        phase_tally(a.x[w], a.z[w], b.x[w], b.z[w], plus, minus);
    switch (((plus - minus) % 4 + 4) % 4) {
        case 0: return 1.0;
        case 2: return -1.0;
        default: return 0.0;
    }
}

}  // namespace detail

/// Var(H) in |0...0>, via x-bucketing. May return a tiny negative value
/// (>= -1e-10) for operators that are numerically converged.
template <std::size_t W>
double variance_zero(const PauliSum<W>& h) {
    detail::require_real(h, "variance_zero");
    detail::XBuckets<W> buckets(h);
    double h2 = 0.0, e = 0.0;
    for (const auto& [key, bucket] : buckets.all()) {
        const std::size_t m = bucket.size();
        for (std::size_t a = 0; a < m; ++a) {
            const double ca = bucket[a]->second.real();
            h2 += ca * ca;
            for (std::size_t b = a + 1; b < m; ++b) {
                const double f = detail::pair_contraction(bucket[a]->first, bucket[b]->first);
                if (f != 0.0) h2 += 2.0 * f * ca * bucket[b]->second.real();
            }
        }
    }
    for (const auto& [p, c] : h)
        if (p.x_all_zero()) e += c.real();
    return h2 - e * e;
}

/// Var(H + removed) - Var(H), through cross terms only; avoids recomputing
/// the full bucketed contraction of H.
template <std::size_t W>
double variance_delta(const PauliSum<W>& h, const PauliSum<W>& removed) {
    if (h.num_qubits() != removed.num_qubits())
        throw std::invalid_argument("variance_delta: qubit count mismatch");
    if (removed.empty()) return 0.0;
    detail::require_real(h, "variance_delta");
    detail::require_real(removed, "variance_delta");

    const detail::XBuckets<W> buckets(h);
    double cross = 0.0;
    for (const auto& [r, cr] : removed) {
        if (const auto* bucket = buckets.find(r.x)) {
            for (const auto* entry : *bucket) {
                const double f = detail::pair_contraction(entry->first, r);
                if (f != 0.0) cross += 2.0 * f * entry->second.real() * cr.real();
            }
        }
    }
    const double er = expectation_zero(removed);
    const double eh = expectation_zero(h);
    return variance_zero(removed) + cross - 2.0 * eh * er;
}

/// Heisenberg-picture rotation: U(theta) = exp(-i (theta/2) P), returns
/// U^dag H U. Terms commuting with P pass through; each anticommuting term
/// c P_k becomes c cos(theta) P_k + c i sin(theta) phi (P (+) P_k) with phi
/// the product phase of P * P_k. Norm-preserving; interference merges.
template <std::size_t W>
PauliSum<W> evolve(const PauliSum<W>& h, const PauliString<W>& p, double theta) {
    if (h.num_qubits() != p.n) throw std::invalid_argument("evolve: qubit count mismatch");
    const double c = std::cos(theta), s = std::sin(theta);
    PauliSum<W> out(h.num_qubits());
    out.reserve(h.size() * 2);
    for (const auto& [str, coef] : h) {
        if (commutes(str, p)) {
            out.add(str, coef);
        } else {
            out.add(str, coef * c);
            auto prod = multiply(p, str);
            // i * i^e for odd e is the real unit +-1.
            const double unit = ((prod.phase_exp + 1) & 3) == 0 ? 1.0 : -1.0;
            out.add(prod.string, coef * (s * unit));
        }
    }
    return out;
}

/// [H, P] = sum over anticommuting terms of 2 c phi(P_k, P) (P_k (+) P).
/// Hermitian in, anti-Hermitian out.
template <std::size_t W>
PauliSum<W> commutator(const PauliSum<W>& h, const PauliString<W>& p) {
    if (h.num_qubits() != p.n) throw std::invalid_argument("commutator: qubit count mismatch");
    PauliSum<W> out(h.num_qubits());
    out.reserve(h.size());
    for (const auto& [str, coef] : h) {
        if (commutes(str, p)) continue;
        auto prod = multiply(str, p);
        out.add(prod.string, 2.0 * coef * prod.phase());
    }
    return out;
}

/// Conjugation by a product of X gates on the given 1-based sites: each term
/// flips sign once per listed site whose single-qubit factor anticommutes
/// with X there (i.e. has its z bit set). Used to fold a computational
/// reference state onto |0...0>.
template <std::size_t W>
PauliSum<W> conjugate_by_x(const PauliSum<W>& h, std::span<const std::uint32_t> sites) {
    std::array<std::uint64_t, W> mask{};
    for (std::uint32_t s : sites) {
        if (s == 0 || s > h.num_qubits())
            throw std::out_of_range("conjugate_by_x: site index out of range");
        mask[(s - 1) >> 6] |= 1ull << ((s - 1) & 63);
    }
    PauliSum<W> out(h.num_qubits());
    out.reserve(h.size());
    for (const auto& [p, c] : h) {
        int parity = 0;
        for (std::size_t w = 0; w < W; ++w) parity ^= std::popcount(p.z[w] & mask[w]) & 1;
        out.add(p, parity ? -c : c);
    }
    return out;
}

template <std::size_t W>
PauliSum<W> conjugate_by_x(const PauliSum<W>& h, const std::vector<std::uint32_t>& sites) {
    return conjugate_by_x(h, std::span<const std::uint32_t>(sites));
}

}  // namespace dbflow
