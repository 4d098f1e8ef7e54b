#pragma once

// Complex dense matrix kernel: null space, rank, inverse and seeded
// Gaussian sampling on top of Eigen. Everything downstream (projection,
// precoding, broadcast design) goes through these four entry points so
// the tolerance policy lives in one place.

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gsa/errors.hpp"

namespace gsa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index   = Eigen::Index;

// Relative singular-value cutoff for rank decisions and max-abs-entry
// threshold for verifying alignment identities.
struct Tolerance {
    double rank_tol   = 1e-10;
    double verify_tol = 1e-8;
};

inline bool is_finite(const CMatrix& m) {
    return m.allFinite();
}

// Entrywise infinity norm, max |m_ij|. Zero for empty matrices.
inline double max_abs(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

namespace detail {

inline Index rank_from_singular_values(const Eigen::VectorXd& sv, double rank_tol) {
    if (sv.size() == 0) return 0;
    const double cutoff = rank_tol * sv(0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff && sv(r) > 0.0) ++r;
    return r;
}

} // namespace detail

// Number of singular values above rank_tol * sigma_max. Empty matrix has
// rank 0.
inline Index rank(const CMatrix& m, const Tolerance& tol = {}) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    if (!is_finite(m)) throw InvalidInputError("rank: non-finite input");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return detail::rank_from_singular_values(svd.singularValues(), tol.rank_tol);
}

// Orthonormal basis of {x : m x = 0}, columns = nullity. A matrix with no
// rows constrains nothing, so its null space is the whole space.
inline CMatrix null_space(const CMatrix& m, const Tolerance& tol = {}) {
    if (m.cols() == 0) return CMatrix(0, 0);
    if (m.rows() == 0) return CMatrix::Identity(m.cols(), m.cols());
    if (!is_finite(m)) throw InvalidInputError("null_space: non-finite input");
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
    const Index r = detail::rank_from_singular_values(svd.singularValues(), tol.rank_tol);
    return svd.matrixV().rightCols(m.cols() - r);
}

// Inverse of a square full-rank matrix, residual-checked against
// verify_tol. Rank deficiency at rank_tol and non-square inputs both
// surface as SingularMatrixError; that signal drives feasibility
// reporting upstream.
inline CMatrix invert(const CMatrix& m, const Tolerance& tol = {}) {
    if (m.rows() != m.cols())
        throw SingularMatrixError("invert: matrix is not square");
    if (m.rows() == 0) return CMatrix(0, 0);
    if (!is_finite(m)) throw InvalidInputError("invert: non-finite input");
    if (rank(m, tol) != m.rows())
        throw SingularMatrixError("invert: rank-deficient matrix");
    CMatrix inv = m.partialPivLu().inverse();
    const double residual = max_abs(m * inv - CMatrix::Identity(m.rows(), m.cols()));
    if (!(residual <= tol.verify_tol))
        throw SingularMatrixError("invert: residual " + std::to_string(residual) +
                                  " exceeds verify_tol");
    return inv;
}

// splitmix64 mix step; used to derive independent substreams from one
// master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// i.i.d. complex Gaussian entries with unit total variance (1/2 per real
// component). Fixed algorithm: mt19937_64 uniforms fed through Box-Muller,
// one pair per entry in row-major order, so results are reproducible
// bit-for-bit for a given seed.
inline CMatrix sample_gaussian(Index rows, Index cols, std::uint64_t seed) {
    if (rows < 0 || cols < 0)
        throw InvalidInputError("sample_gaussian: negative dimension");
    CMatrix m(rows, cols);
    std::mt19937_64 rng(seed);
    constexpr double kScale = 0x1.0p-53;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * kScale; // (0,1]
            const double u2 = static_cast<double>(rng() >> 11) * kScale;         // [0,1)
            const double mag = std::sqrt(-2.0 * std::log(u1));
            const double re = mag * std::cos(2.0 * M_PI * u2);
            const double im = mag * std::sin(2.0 * M_PI * u2);
            m(r, c) = Complex(re * inv_sqrt2, im * inv_sqrt2);
        }
    }
    return m;
}

} // namespace gsa
