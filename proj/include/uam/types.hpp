#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace uam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when the Euler pitch angle reaches the Z-Y-X gimbal singularity.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a gain pair produces a state matrix that is not Hurwitz.
class NonHurwitzError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return s;
}

/// Inverse of skew(); only the antisymmetric part of `m` is read.
inline Vec3 vee(const Mat3& m) {
    return Vec3(0.5 * (m(2, 1) - m(1, 2)),
                0.5 * (m(0, 2) - m(2, 0)),
                0.5 * (m(1, 0) - m(0, 1)));
}

inline Mat diag_matrix(std::initializer_list<double> entries) {
    Vec d(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (double x : entries) d(i++) = x;
    return d.asDiagonal();
}

inline bool is_symmetric(const Mat& m, double tol = 1e-12) {
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

inline bool is_positive_definite(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    if (!is_symmetric(m, 1e-9)) return false;
    Eigen::LLT<Mat> llt(0.5 * (m + m.transpose()));
    return llt.info() == Eigen::Success;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace uam
