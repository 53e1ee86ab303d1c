#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dbflow/pauli_sum.hpp"

namespace dbflow {

enum class Boundary { open, periodic };

/// Rectangular lattice with 1-based, snake-ordered site indices (row 0 runs
/// left to right, row 1 right to left, ...), so nearest neighbours along a
/// row are adjacent integers. Periodic wrapping applies per dimension and
/// only when that dimension has length >= 3; a length-2 periodic dimension
/// would duplicate an open bond and is rejected.
struct LatticeSpec {
    int rows = 1;
    int cols = 1;
    Boundary boundary = Boundary::open;

    int sites() const { return rows * cols; }

    void validate() const {
        if (rows < 1 || cols < 1) throw std::invalid_argument("lattice: dimensions must be >= 1");
        if (boundary == Boundary::periodic && (rows == 2 || cols == 2))
            throw std::invalid_argument("lattice: periodic wrap of a length-2 dimension duplicates bonds");
    }

    /// 1-based snake index of the site at (row r, column c), both 0-based.
    int site_index(int r, int c) const {
        const int offset = (r % 2 == 0) ? c : (cols - 1 - c);
        return r * cols + offset + 1;
    }

    std::vector<std::pair<int, int>> bonds() const {
        validate();
        std::vector<std::pair<int, int>> out;
        const bool wrap_cols = boundary == Boundary::periodic && cols >= 3;
        const bool wrap_rows = boundary == Boundary::periodic && rows >= 3;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (c + 1 < cols) out.emplace_back(site_index(r, c), site_index(r, c + 1));
                else if (wrap_cols) out.emplace_back(site_index(r, c), site_index(r, 0));
                if (r + 1 < rows) out.emplace_back(site_index(r, c), site_index(r + 1, c));
                else if (wrap_rows) out.emplace_back(site_index(r, c), site_index(0, c));
            }
        }
        return out;
    }
};

enum class ModelKind { heisenberg, hubbard };

struct ModelSpec {
    ModelKind kind = ModelKind::heisenberg;
    LatticeSpec lattice;
    double c = 1.0;                    // Heisenberg bond coupling
    double t = 1.0;                    // Hubbard hopping
    double u = 1.0;                    // Hubbard onsite repulsion
    std::string reference_occupation;  // one bit per qubit; empty = model default

    int qubit_count() const {
        return kind == ModelKind::hubbard ? 2 * lattice.sites() : lattice.sites();
    }
};

/// Antiferromagnetic pattern "0101..." over n qubits.
inline std::string neel_occupation(int n) {
    std::string s(n, '0');
    for (int q = 1; q < n; q += 2) s[q] = '1';
    return s;
}

/// H = sum over bonds of (c/4)(X_i X_j + Y_i Y_j + Z_i Z_j).
template <std::size_t W>
PauliSum<W> build_heisenberg(const LatticeSpec& lattice, double c = 1.0) {
    lattice.validate();
    PauliSum<W> h(static_cast<std::uint32_t>(lattice.sites()));
    for (const auto& [a, b] : lattice.bonds()) {
        for (char axis : {'X', 'Y', 'Z'}) {
            PauliString<W> p(h.num_qubits());
            p.set(static_cast<std::uint32_t>(a), axis);
            p.set(static_cast<std::uint32_t>(b), axis);
            h.add(p, c / 4.0);
        }
    }
    return h;
}

namespace detail {

/// Hopping pair for spin orbitals p < q (1-based qubits): the two strings
/// X_p Z...Z X_q and Y_p Z...Z Y_q with the Z string on the qubits strictly
/// between.
template <std::size_t W>
void add_hopping(PauliSum<W>& h, std::uint32_t p, std::uint32_t q, double amplitude) {
    if (p > q) std::swap(p, q);
    for (char edge : {'X', 'Y'}) {
        PauliString<W> s(h.num_qubits());
        s.set(p, edge);
        s.set(q, edge);
        for (std::uint32_t m = p + 1; m < q; ++m) s.set(m, 'Z');
        h.add(s, amplitude);
    }
}

}  // namespace detail

/// Fermi-Hubbard in the interleaved Jordan-Wigner layout: lattice site p
/// (1-based, snake order) owns qubit 2p-1 (spin up) and qubit 2p (spin
/// down). Hopping -t over bonds per spin species, onsite repulsion
/// (U/4)(I - Z_up)(I - Z_down) with the constant component retained.
template <std::size_t W>
PauliSum<W> build_hubbard(const LatticeSpec& lattice, double t, double u) {
    lattice.validate();
    const std::uint32_t n = static_cast<std::uint32_t>(2 * lattice.sites());
    PauliSum<W> h(n);
    for (const auto& [a, b] : lattice.bonds()) {
        detail::add_hopping(h, 2 * a - 1, 2 * b - 1, -t / 2.0);  // spin up
        detail::add_hopping(h, 2 * a, 2 * b, -t / 2.0);          // spin down
    }
    const PauliString<W> identity(n);
    for (int site = 1; site <= lattice.sites(); ++site) {
        const std::uint32_t up = 2 * site - 1, down = 2 * site;
        h.add(identity, u / 4.0);
        h.add(PauliString<W>::single(n, up, 'Z'), -u / 4.0);
        h.add(PauliString<W>::single(n, down, 'Z'), -u / 4.0);
        PauliString<W> zz(n);
        zz.set(up, 'Z');
        zz.set(down, 'Z');
        h.add(zz, u / 4.0);
    }
    return h;
}

template <std::size_t W>
struct ReferenceFolding {
    std::vector<std::uint32_t> flipped_sites;  // 1-based qubits conjugated by X
    PauliSum<W> h0;
};

/// Conjugates H by X on every '1' in the occupation string, mapping the
/// chosen computational reference state onto |0...0>.
template <std::size_t W>
ReferenceFolding<W> fold_reference(const PauliSum<W>& h, const std::string& occupation) {
    if (occupation.size() != h.num_qubits())
        throw std::invalid_argument("fold_reference: occupation length must match qubit count");
    std::vector<std::uint32_t> flipped;
    for (std::uint32_t q = 1; q <= h.num_qubits(); ++q) {
        const char bit = occupation[q - 1];
        if (bit == '1') flipped.push_back(q);
        else if (bit != '0') throw std::invalid_argument("fold_reference: occupation must be over {0,1}");
    }
    PauliSum<W> folded = conjugate_by_x(h, flipped);
    return ReferenceFolding<W>{std::move(flipped), std::move(folded)};
}

}  // namespace dbflow
