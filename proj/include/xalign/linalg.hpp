// SPDX-License-Identifier: Apache-2.0
//
// Complex matrix utilities shared by the whole library: Kronecker product,
// vec/unvec, SVD-based numerical rank, and the two solver forms used for
// precoder computation and zero-forcing decoding.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace xalign {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Square solve rejected because the condition estimate exceeded the cap.
class SingularMatrixError : public std::runtime_error {
  public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix that must have full row rank numerically does not.
class RankDeficientError : public std::runtime_error {
  public:
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require_finite(const CMatrix& a, const char* who) {
    if (!a.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

inline void require_finite(const CVector& a, const char* who) {
    if (!a.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-stacking vec operator.
inline CVector vec(const CMatrix& a) {
    return Eigen::Map<const CVector>(a.data(), a.size());
}

/// Inverse of vec: refill a rows x cols matrix column by column.
inline CMatrix unvec(const CVector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

/// Count of singular values above tol * sigma_max. The all-zero (or empty)
/// matrix has rank 0. Throws std::invalid_argument on non-finite input.
inline Index numerical_rank(const CMatrix& a, double tol = 1e-10) {
    if (tol < 0) throw std::invalid_argument("numerical_rank: negative tolerance");
    if (a.rows() == 0 || a.cols() == 0) return 0;
    detail::require_finite(a, "numerical_rank");
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++r;
    return r;
}

/// Solve a x = b for square a. Errors out instead of returning garbage when
/// the SVD condition estimate exceeds cond_cap.
inline CVector solve_square(const CMatrix& a, const CVector& b, double cond_cap = 1e12) {
    if (a.rows() != a.cols()) throw std::invalid_argument("solve_square: matrix not square");
    if (b.size() != a.rows()) throw std::invalid_argument("solve_square: rhs size mismatch");
    if (a.rows() == 0) return CVector(0);
    detail::require_finite(a, "solve_square");
    detail::require_finite(b, "solve_square");
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0 || sv(0) / smin > cond_cap)
        throw SingularMatrixError("solve_square: condition estimate above cap");
    return svd.solve(b);
}

/// Right pseudo-inverse applied to y: a^H (a a^H)^{-1} y. Requires full row
/// rank (rows <= cols), checked at the given relative tolerance.
inline CVector right_pinv_apply(const CMatrix& a, const CVector& y, double tol = 1e-10) {
    if (a.rows() > a.cols()) throw std::invalid_argument("right_pinv_apply: more rows than columns");
    if (y.size() != a.rows()) throw std::invalid_argument("right_pinv_apply: rhs size mismatch");
    if (a.rows() == 0) return CVector::Zero(a.cols());
    detail::require_finite(a, "right_pinv_apply");
    detail::require_finite(y, "right_pinv_apply");
    if (numerical_rank(a, tol) < a.rows())
        throw RankDeficientError("right_pinv_apply: matrix is rank deficient");
    const CMatrix gram = a * a.adjoint();
    return a.adjoint() * gram.fullPivLu().solve(y);
}

/// Minimum-norm solution of the underdetermined (or square) full-row-rank
/// system a x = b, via the same a^H (a a^H)^{-1} b form.
inline CVector min_norm_solve(const CMatrix& a, const CVector& b, double tol = 1e-10) {
    return right_pinv_apply(a, b, tol);
}

}  // namespace xalign
