#include "uam/verification.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <random>

using namespace uam;

namespace {

// vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P)
Mat kronecker_lyapunov(const Mat& A, const Mat& Q) {
    const auto n = A.rows();
    const Mat I = Mat::Identity(n, n);
    const Mat K = Eigen::kroneckerProduct(I, A.transpose()) + Eigen::kroneckerProduct(A.transpose(), I);
    const Vec q = Eigen::Map<const Vec>(Q.data(), n * n);
    const Vec p = K.fullPivLu().solve(-q);
    return Eigen::Map<const Mat>(p.data(), n, n);
}

Mat random_diag(std::mt19937_64& rng, int d, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return Vec::NullaryExpr(d, [&] { return u(rng); }).asDiagonal();
}

}  // namespace

TEST(Lyapunov, MatchesKroneckerSolution) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + trial % 4;
        const Mat A = build_A(random_diag(rng, d, 0.5, 30.0), random_diag(rng, d, 0.5, 10.0));
        Mat R = Mat::Random(2 * d, 2 * d);
        const Mat Q = R * R.transpose() + Mat::Identity(2 * d, 2 * d);
        const Mat P = lyapunov_solve(A, Q);
        EXPECT_LE((P - kronecker_lyapunov(A, Q)).cwiseAbs().maxCoeff(), 1e-8 * P.cwiseAbs().maxCoeff());
        EXPECT_LE(lyapunov_residual(A, P, Q), 1e-10 * std::max(1.0, Q.norm()));
        EXPECT_TRUE(is_positive_definite(P));
    }
}

TEST(Lyapunov, ScalarClosedForm) {
    // x'' = -k1 x - k2 x': P solves a 2x2 system with known entries
    const double k1 = 4.0, k2 = 3.0;
    const Mat A = build_A(Mat::Constant(1, 1, k1), Mat::Constant(1, 1, k2));
    const Mat P = lyapunov_solve(A, Mat::Identity(2, 2));
    const double p12 = 1.0 / (2.0 * k1);
    const double p22 = (1.0 + 2.0 * p12) / (2.0 * k2);
    const double p11 = k1 * p22 + k2 * p12;
    EXPECT_NEAR(P(0, 1), p12, 1e-14);
    EXPECT_NEAR(P(1, 1), p22, 1e-14);
    EXPECT_NEAR(P(0, 0), p11, 1e-13);
}

TEST(Lyapunov, BuildARejectsNonHurwitz) {
    EXPECT_THROW(build_A(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0)), NonHurwitzError);
    EXPECT_THROW(build_A(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 0.0)), NonHurwitzError);
}

TEST(SubsystemController, ConfigureValidatesGains) {
    const Mat I = Mat::Identity(3, 3);
    EXPECT_NO_THROW(SubsystemController::configure(Subsystem::position, I, I, 2 * I, I, I, 0.1));
    EXPECT_THROW(SubsystemController::configure(Subsystem::position, -I, I, 2 * I, I, I, 0.1), InvalidArgument);
    EXPECT_THROW(SubsystemController::configure(Subsystem::position, I, I, 2 * I, I, I, 0.0), InvalidArgument);
    EXPECT_THROW(SubsystemController::configure(Subsystem::position, I, I, 2 * I, I, Mat::Identity(4, 4), 0.1),
                 InvalidArgument);
}

TEST(SubsystemController, SmallQIsExpandedBlockDiagonal) {
    const Mat I = Mat::Identity(2, 2);
    const auto c = SubsystemController::configure(Subsystem::manipulator, I, I, 2 * I, I, 3 * I, 0.1);
    Mat expected = Mat::Zero(4, 4);
    expected.diagonal().setConstant(3.0);
    EXPECT_EQ(c.Q, expected);
}

TEST(ControlLaw, DeltaTauContinuousAtLayerBoundary) {
    const double varpi = 0.2, rho = 1.7;
    Vec r(3);
    r << 0.1, -0.1, std::sqrt(0.04 - 0.02);
    ASSERT_NEAR(r.norm(), varpi, 1e-15);
    const Vec inside = delta_tau(r * (1.0 - 1e-12), rho, varpi);
    const Vec outside = delta_tau(r * (1.0 + 1e-12), rho, varpi);
    EXPECT_LE((inside - outside).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(delta_tau(5.0 * r, rho, varpi).norm(), rho, 1e-14);
    EXPECT_NEAR(delta_tau(0.5 * r, rho, varpi).norm(), 0.5 * rho, 1e-14);
    EXPECT_THROW(delta_tau(r, rho, 0.0), InvalidArgument);
}

TEST(ControlLaw, MatchesClosedForm) {
    const Mat I = Mat::Identity(2, 2);
    const Mat Mb = 0.5 * I;
    auto c = SubsystemController::configure(Subsystem::manipulator, Mb, 3 * I, 4 * I, 2 * I, I, 0.1,
                                            FeedbackForm::hurwitz_gains);
    Vec xi(4), dtau(2), xdd(2);
    xi << 0.1, -0.2, 0.3, 0.05;
    dtau << 0.01, -0.02;
    xdd << 1.0, 2.0;
    const Vec expected = Mb * (-(4.0 * xi.head(2) + 2.0 * xi.tail(2)) - dtau + xdd);
    EXPECT_LE((control_law(c, xi, dtau, xdd) - expected).cwiseAbs().maxCoeff(), 1e-15);
    c.feedback = FeedbackForm::shared_lambda;
    const Vec shared = Mb * (-(3.0 * xi.head(2) + 3.0 * xi.tail(2)) - dtau + xdd);
    EXPECT_LE((control_law(c, xi, dtau, xdd) - shared).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ControlLaw, RhoIsAffineInGains) {
    const AdaptiveGains g{{0.1, 0.2, 0.3, 0.4}, 0.05};
    EXPECT_DOUBLE_EQ(rho_gain(g, 2.0, 3.0), 0.1 + 0.2 * 2.0 + 0.3 * 4.0 + 0.4 * 3.0 + 0.05);
}

TEST(AttitudeError, ZeroOnTargetAndSmallAngleLimit) {
    const Vec3 q(0.2, -0.1, 0.7);
    const Mat3 R = rotation_matrix(q);
    const AttitudeError same = attitude_error(R, R, Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3));
    EXPECT_LE(same.e_q.norm(), 1e-15);
    EXPECT_LE(same.e_q_dot.norm(), 1e-15);
    // a small body-frame rotation delta gives e_q ~ delta
    const Vec3 delta(1e-4, -2e-4, 3e-4);
    const Mat3 Rp = R * Eigen::AngleAxisd(delta.norm(), delta.normalized()).toRotationMatrix();
    EXPECT_LE((attitude_error(Rp, R, Vec3::Zero(), Vec3::Zero()).e_q - delta).norm(), 1e-10);
}

TEST(ThrustExtraction, ReproducesForceVector) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Vec3 f(3.0 * u(rng), 3.0 * u(rng), 20.0 + 5.0 * u(rng));
        const double psi = std::numbers::pi * u(rng);
        const ThrustAttitude ta = thrust_attitude_extraction(f, psi);
        const Vec3 rebuilt = rotation_matrix(Vec3(ta.phi_d, ta.theta_d, psi)) * Vec3(0.0, 0.0, ta.u1);
        EXPECT_LE((rebuilt - f).norm(), 1e-12);
    }
    EXPECT_THROW(thrust_attitude_extraction(Vec3(1.0, 0.0, -1.0), 0.0), InvalidArgument);
}

TEST(Acceptance, LyapunovSolveCriterion) {
    const CriterionResult r = check_lyapunov_solve();
    EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Acceptance, LinearLimitCriterion) {
    const CriterionResult r = check_linear_limit();
    EXPECT_TRUE(r.pass) << r.detail;
}
