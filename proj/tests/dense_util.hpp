#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

// Independent dense reference used by the tests: hardcoded 2x2 letters and
// an explicit Kronecker ladder, deliberately sharing no code with the
// library's own dense converter. Qubit 1 occupies bit 0 of the basis index,
// so qubit n is the leftmost (most significant) Kronecker factor.
namespace testdense {

inline Eigen::Matrix2cd letter_matrix(char l) {
    using C = std::complex<double>;
    Eigen::Matrix2cd m;
    switch (l) {
        case 'I': m << C(1), C(0), C(0), C(1); break;
        case 'X': m << C(0), C(1), C(1), C(0); break;
        case 'Y': m << C(0), C(0, -1), C(0, 1), C(0); break;
        case 'Z': m << C(1), C(0), C(0), C(-1); break;
        default: throw std::invalid_argument("letter_matrix: bad letter");
    }
    return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Dense matrix of a letter string ("XZIIY", qubit 1 leftmost).
inline Eigen::MatrixXcd string_matrix(const std::string& letters) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) m = kron(m, letter_matrix(*it));
    return m;
}

/// Embeds a single-site letter into an n-qubit identity background.
inline Eigen::MatrixXcd site_matrix(int n, int site, char l) {
    std::string s(n, 'I');
    s[site - 1] = l;
    return string_matrix(s);
}

}  // namespace testdense
