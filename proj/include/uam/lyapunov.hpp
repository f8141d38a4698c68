#pragma once

#include "uam/types.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#include <sstream>

namespace uam {

inline double max_real_eigenvalue(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success) throw SolverError("eigenvalue computation failed");
    return es.eigenvalues().real().maxCoeff();
}

/// Error-dynamics matrix A = [[0, I], [-lambda1, -lambda2]].
inline Mat build_A(const Mat& lambda1, const Mat& lambda2) {
    const auto d = lambda1.rows();
    if (lambda1.cols() != d || lambda2.rows() != d || lambda2.cols() != d)
        throw InvalidArgument("lambda1/lambda2 must be square and of equal size");
    Mat A = Mat::Zero(2 * d, 2 * d);
    A.topRightCorner(d, d).setIdentity();
    A.bottomLeftCorner(d, d) = -lambda1;
    A.bottomRightCorner(d, d) = -lambda2;
    const double max_re = max_real_eigenvalue(A);
    if (!(max_re < -1e-9)) {
        std::ostringstream os;
        os << "error dynamics not Hurwitz (max Re(eig) = " << max_re << "); lambda1 and lambda2 must be positive definite";
        throw NonHurwitzError(os.str());
    }
    return A;
}

/// Solves A^T P + P A + Q = 0 for Hurwitz A by a complex Schur
/// (Bartels-Stewart) sweep: with A = U T U^H the equation becomes
/// T^H X + X T = -U^H Q U, which is back-substituted entry by entry.
inline Mat lyapunov_solve(const Mat& A, const Mat& Q) {
    const auto n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) throw InvalidArgument("A and Q must be square and of equal size");
    if (!(max_real_eigenvalue(A) < 0.0)) throw SolverError("Lyapunov solve requires a Hurwitz matrix");

    using CMat = Eigen::MatrixXcd;
    using cplx = std::complex<double>;
    Eigen::ComplexSchur<Mat> schur(A);
    if (schur.info() != Eigen::Success) throw SolverError("Schur decomposition failed");
    const CMat& U = schur.matrixU();
    const CMat& T = schur.matrixT();
    const CMat F = U.adjoint() * Q.cast<cplx>() * U;

    CMat X = CMat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cplx acc = -F(i, j);
            for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T(k, i)) * X(k, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= X(i, k) * T(k, j);
            const cplx denom = std::conj(T(i, i)) + T(j, j);
            if (std::abs(denom) < 1e-14) throw SolverError("Lyapunov operator is singular");
            X(i, j) = acc / denom;
        }
    }
    const Mat P = (U * X * U.adjoint()).real();
    return 0.5 * (P + P.transpose());
}

inline double lyapunov_residual(const Mat& A, const Mat& P, const Mat& Q) {
    return (A.transpose() * P + P * A + Q).norm();
}

}  // namespace uam
