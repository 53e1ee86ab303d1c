#pragma once

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dbflow {

/// Hermitian n-qubit Pauli string in symplectic (x, z) form.
///
/// Per qubit: (x,z) = (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.
/// Qubit q (1-based) lives in bit q-1 of the packed words, low word first.
/// Phases are never stored here; they belong to the coefficients of the
/// sums that own the strings.
template <std::size_t W>
struct PauliString {
    static_assert(W >= 1 && W <= 8, "unsupported word count");
    static constexpr std::size_t words = W;
    static constexpr std::uint32_t max_qubits = 64 * W;

    std::uint32_t n = 0;
    std::array<std::uint64_t, W> x{};
    std::array<std::uint64_t, W> z{};

    PauliString() = default;

    explicit PauliString(std::uint32_t qubits) : n(qubits) {
        if (qubits == 0 || qubits > max_qubits)
            throw std::invalid_argument("PauliString: qubit count out of range");
    }

    friend bool operator==(const PauliString&, const PauliString&) = default;

    bool is_identity() const {
        for (std::size_t w = 0; w < W; ++w)
            if (x[w] | z[w]) return false;
        return true;
    }

    bool x_all_zero() const {
        for (std::size_t w = 0; w < W; ++w)
            if (x[w]) return false;
        return true;
    }

    /// Number of non-identity single-qubit factors.
    int weight() const {
        int k = 0;
        for (std::size_t w = 0; w < W; ++w) k += std::popcount(x[w] | z[w]);
        return k;
    }

    bool x_bit(std::uint32_t site) const { return (x[(site - 1) >> 6] >> ((site - 1) & 63)) & 1; }
    bool z_bit(std::uint32_t site) const { return (z[(site - 1) >> 6] >> ((site - 1) & 63)) & 1; }

    /// Installs a single-qubit letter at a 1-based site.
    void set(std::uint32_t site, char letter) {
        check_site(site);
        const std::size_t w = (site - 1) >> 6;
        const std::uint64_t bit = 1ull << ((site - 1) & 63);
        x[w] &= ~bit;
        z[w] &= ~bit;
        switch (letter) {
            case 'I': break;
            case 'X': x[w] |= bit; break;
            case 'Y': x[w] |= bit; z[w] |= bit; break;
            case 'Z': z[w] |= bit; break;
            default: throw std::invalid_argument("PauliString: letter must be one of I, X, Y, Z");
        }
    }

    char letter(std::uint32_t site) const {
        check_site(site);
        const bool xb = x_bit(site), zb = z_bit(site);
        return xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }

    static PauliString single(std::uint32_t qubits, std::uint32_t site, char letter) {
        PauliString p(qubits);
        p.set(site, letter);
        return p;
    }

    /// Letter form, qubit 1 leftmost: e.g. "XZIIY".
    std::string text() const {
        std::string s(n, 'I');
        for (std::uint32_t q = 1; q <= n; ++q) s[q - 1] = letter(q);
        return s;
    }

    /// Compact form "x:<hex>;z:<hex>", bit 0 = qubit 1.
    std::string hex_form() const {
        return "x:" + hex_words(x) + ";z:" + hex_words(z);
    }

    /// Parses the letter form; the string length fixes the qubit count.
    static PauliString parse(std::string_view text) {
        if (text.empty() || text.size() > max_qubits)
            throw std::invalid_argument("PauliString: bad letter-form length");
        PauliString p(static_cast<std::uint32_t>(text.size()));
        for (std::uint32_t q = 1; q <= p.n; ++q) p.set(q, text[q - 1]);
        return p;
    }

    /// Parses the compact form "x:<hex>;z:<hex>" for a given qubit count.
    static PauliString parse_hex(std::string_view form, std::uint32_t qubits) {
        PauliString p(qubits);
        const std::size_t sep = form.find(";z:");
        if (form.substr(0, 2) != "x:" || sep == std::string_view::npos)
            throw std::invalid_argument("PauliString: bad hex form");
        parse_hex_words(form.substr(2, sep - 2), p.x);
        parse_hex_words(form.substr(sep + 3), p.z);
        for (std::size_t w = 0; w < W; ++w) {
            const std::uint64_t allowed =
                (p.n >= 64 * (w + 1)) ? ~0ull
                : (p.n > 64 * w) ? ((1ull << (p.n - 64 * w)) - 1) : 0ull;
            if ((p.x[w] & ~allowed) || (p.z[w] & ~allowed))
                throw std::invalid_argument("PauliString: hex form sets bits beyond qubit count");
        }
        return p;
    }

    /// Strict weak order on (x, z) bit patterns, used for deterministic ties.
    static bool lex_less(const PauliString& a, const PauliString& b) {
        for (std::size_t w = 0; w < W; ++w) {
            if (a.x[w] != b.x[w]) return a.x[w] < b.x[w];
        }
        for (std::size_t w = 0; w < W; ++w) {
            if (a.z[w] != b.z[w]) return a.z[w] < b.z[w];
        }
        return false;
    }

  private:
    void check_site(std::uint32_t site) const {
        if (site == 0 || site > n) throw std::out_of_range("PauliString: site index out of range");
    }

    static void parse_hex_words(std::string_view digits, std::array<std::uint64_t, W>& v) {
        if (digits.empty() || digits.size() > 16 * W)
            throw std::invalid_argument("PauliString: bad hex form");
        v.fill(0);
        std::size_t nibble = 0;  // counted from the least significant end
        for (std::size_t i = digits.size(); i-- > 0; ++nibble) {
            const char c = digits[i];
            unsigned d;
            if (c >= '0' && c <= '9') d = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') d = static_cast<unsigned>(c - 'a') + 10;
            else if (c >= 'A' && c <= 'F') d = static_cast<unsigned>(c - 'A') + 10;
            else throw std::invalid_argument("PauliString: bad hex digit");
            v[nibble >> 4] |= static_cast<std::uint64_t>(d) << (4 * (nibble & 15));
        }
    }

    static std::string hex_words(const std::array<std::uint64_t, W>& v) {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        bool leading = true;
        for (std::size_t w = W; w-- > 0;) {
            for (int nib = 15; nib >= 0; --nib) {
                const unsigned d = (v[w] >> (4 * nib)) & 0xf;
                if (leading && d == 0 && !(w == 0 && nib == 0)) continue;
                leading = false;
                out.push_back(digits[d]);
            }
        }
        return out;
    }
};

/// Product of two Pauli strings: phase * string with phase = i^phase_exp.
template <std::size_t W>
struct PauliProduct {
    int phase_exp = 0;  // exponent of i, reduced mod 4
    PauliString<W> string;

    std::complex<double> phase() const {
        switch (phase_exp & 3) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
};

namespace detail {

/// Per-word phase tally for a product a*b. A qubit contributes +i when the
/// pair of letters is cyclic ((X,Y), (Y,Z) or (Z,X)) and -i when anticyclic.
inline void phase_tally(std::uint64_t x1, std::uint64_t z1, std::uint64_t x2, std::uint64_t z2,
                        int& plus, int& minus) {
    const std::uint64_t p = (x1 & z1 & ~x2 & z2)    // (Y,Z)
                          | (x1 & ~z1 & x2 & z2)    // (X,Y)
                          | (~x1 & z1 & x2 & ~z2);  // (Z,X)
    const std::uint64_t m = (x1 & z1 & x2 & ~z2)    // (Y,X)
                          | (x1 & ~z1 & ~x2 & z2)   // (X,Z)
                          | (~x1 & z1 & x2 & z2);   // (Z,Y)
    plus += std::popcount(p);
    minus += std::popcount(m);
}

}  // namespace detail

template <std::size_t W>
PauliProduct<W> multiply(const PauliString<W>& a, const PauliString<W>& b) {
    if (a.n != b.n) throw std::invalid_argument("multiply: qubit count mismatch");
    PauliProduct<W> out;
    out.string.n = a.n;
    int plus = 0, minus = 0;
    for (std::size_t w = 0; w < W; ++w) {
        detail::phase_tally(a.x[w], a.z[w], b.x[w], b.z[w], plus, minus);
        out.string.x[w] = a.x[w] ^ b.x[w];
        out.string.z[w] = a.z[w] ^ b.z[w];
    }
    out.phase_exp = ((plus - minus) % 4 + 4) % 4;
    return out;
}

template <std::size_t W>
bool commutes(const PauliString<W>& a, const PauliString<W>& b) {
    if (a.n != b.n) throw std::invalid_argument("commutes: qubit count mismatch");
    int parity = 0;
    for (std::size_t w = 0; w < W; ++w)
        parity ^= std::popcount((a.x[w] & b.z[w]) ^ (a.z[w] & b.x[w])) & 1;
    return parity == 0;
}

template <std::size_t W>
struct PauliStringHash {
    std::size_t operator()(const PauliString<W>& p) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ p.n;
        for (std::size_t w = 0; w < W; ++w) {
            h = mix(h ^ p.x[w]);
            h = mix(h ^ p.z[w]);
        }
        return static_cast<std::size_t>(h);
    }

  private:
    static std::uint64_t mix(std::uint64_t v) {
        v ^= v >> 30;
        v *= 0xbf58476d1ce4e5b9ull;
        v ^= v >> 27;
        v *= 0x94d049bb133111ebull;
        v ^= v >> 31;
        return v;
    }
};

}  // namespace dbflow
