#include "uam/verification.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace uam;

namespace {

std::vector<SystemState> sample_states(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SystemState> out;
    for (int i = 0; i < count; ++i) out.push_back(verify_detail::random_state(rng, 2));
    return out;
}

}  // namespace

TEST(Rotation, MatrixIsOrthonormalWithUnitDeterminant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int i = 0; i < 200; ++i) {
        const Mat3 R = rotation_matrix(Vec3(u(rng), u(rng), 2.0 * u(rng)));
        EXPECT_LT((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
    }
}

TEST(Rotation, ZyxComposition) {
    const Vec3 q(0.3, -0.2, 1.1);
    const Mat3 expected = rot_z(q(2)) * rot_y(q(1)) * rot_x(q(0));
    EXPECT_LT((rotation_matrix(q) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotation, WrapAngleStaysInPrincipalRange) {
    for (double a = -20.0; a <= 20.0; a += 0.37) {
        const double w = wrap_angle(a);
        EXPECT_LE(std::abs(w), std::numbers::pi + 1e-12);
        EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
        EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    }
}

TEST(Dynamics, MassMatrixSymmetricPositiveDefinite) {
    const UamParams p;
    for (const auto& s : sample_states(300, 11)) {
        const Mat M = mass_matrix(s.chi, p);
        EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff(), 0.0);
    }
}

// Polarization: 1/2 v^T M v equals the kinetic energy of the point masses and
// link spins, so M(a+b) - M(a-b) quadratic forms recover the cross term.
TEST(Dynamics, KineticEnergyIsQuadraticForm) {
    const UamParams p;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& s : sample_states(100, 12)) {
        const Vec a = Vec::NullaryExpr(p.dof(), [&] { return u(rng); });
        const Vec b = Vec::NullaryExpr(p.dof(), [&] { return u(rng); });
        const Mat M = mass_matrix(s.chi, p);
        const double cross = 0.5 * (kinetic_energy(s.chi, a + b, p) - kinetic_energy(s.chi, a - b, p));
        EXPECT_NEAR(cross, a.dot(M * b), 1e-12);
        EXPECT_NEAR(kinetic_energy(s.chi, a, p), 0.5 * a.dot(M * a), 1e-12);
    }
}

TEST(Dynamics, SkewSymmetryAgainstIndependentMassRate) {
    const UamParams p;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& s : sample_states(200, 13)) {
        const Mat S = verify_detail::mass_matrix_rate(s.chi, s.chi_dot, p) - 2.0 * coriolis_matrix(s.chi, s.chi_dot, p);
        const Vec xi = Vec::NullaryExpr(p.dof(), [&] { return u(rng); });
        EXPECT_LE(std::abs(xi.dot(S * xi)), 1e-8);
    }
}

TEST(Dynamics, GravityIsPotentialGradient) {
    const UamParams p;
    const double h = 1e-6;
    for (const auto& s : sample_states(50, 14)) {
        const Vec g = gravity_vector(s.chi, p);
        for (int k = 0; k < p.dof(); ++k) {
            Vec a = s.chi, b = s.chi;
            a(k) += h;
            b(k) -= h;
            EXPECT_NEAR(g(k), (potential_energy(a, p) - potential_energy(b, p)) / (2.0 * h), 1e-6) << "coordinate " << k;
        }
    }
}

TEST(Dynamics, ForwardDynamicsResidual) {
    const UamParams p;
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& s : sample_states(200, 16)) {
        const Vec tau = Vec::NullaryExpr(p.dof(), [&] { return 10.0 * u(rng); });
        const Vec d = Vec::NullaryExpr(p.dof(), [&] { return 0.1 * u(rng); });
        const Vec acc = forward_dynamics(s.chi, s.chi_dot, tau, d, p);
        const Vec res = mass_matrix(s.chi, p) * acc + coriolis_matrix(s.chi, s.chi_dot, p) * s.chi_dot +
                        gravity_vector(s.chi, p) + d - tau;
        EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Dynamics, HoverForceBalancesWeight) {
    UamParams p;
    Vec chi = Vec::Zero(p.dof());
    chi.tail(2) << 0.4, -0.7;
    const Vec g = gravity_vector(chi, p);
    EXPECT_NEAR(g(2), p.total_mass() * p.gravity_accel, 1e-12);
    EXPECT_NEAR(g(2), 21.582, 1e-9);
    const Vec acc = forward_dynamics(chi, Vec::Zero(p.dof()), g, Vec::Zero(p.dof()), p);
    EXPECT_LE(acc.cwiseAbs().maxCoeff(), 1e-12);
}

// Unforced, undisturbed flight conserves total energy; RK4 drift stays small.
TEST(Dynamics, EnergyConservedWithoutInput) {
    UamParams p;
    Vec chi = Vec::Zero(p.dof()), v = Vec::Zero(p.dof());
    chi << 0.0, 0.0, 1.0, 0.1, -0.05, 0.2, 0.3, 0.5;
    v << 0.2, -0.1, 0.3, 0.5, -0.4, 0.3, 1.0, -1.5;
    const PlantModel plant = uam_plant(DisturbanceProfile::none(p.dof()));
    SystemState s{chi, v, Vec::Zero(p.dof()), 0.0};
    auto energy = [&](const SystemState& x) { return kinetic_energy(x.chi, x.chi_dot, p) + potential_energy(x.chi, p); };
    const double e0 = energy(s);
    for (int k = 0; k < 100; ++k) s = integrate_plant(s, Vec::Zero(p.dof()), plant, p, 1e-3, 10, Integrator::rk4);
    EXPECT_NEAR(energy(s), e0, 1e-6 * std::max(1.0, std::abs(e0)));
}

TEST(Dynamics, RejectsWrongDimensions) {
    const UamParams p;
    EXPECT_THROW(mass_matrix(Vec::Zero(5), p), InvalidArgument);
    EXPECT_THROW(forward_dynamics(Vec::Zero(8), Vec::Zero(8), Vec::Zero(7), Vec::Zero(8), p), InvalidArgument);
}

TEST(Dynamics, RejectsPitchSingularity) {
    EXPECT_ANY_THROW(rotation_matrix(Vec3(0.0, std::numbers::pi / 2.0, 0.0)));
    EXPECT_NO_THROW(rotation_matrix(Vec3(0.0, 1.5, 0.0)));
}

TEST(Params, ValidateRejectsBadValues) {
    UamParams p;
    p.arm_link_lengths(0) = 0.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    UamParams q;
    q.payload_mass = -1.0;
    EXPECT_THROW(q.validate(), InvalidArgument);
}

TEST(Params, PayloadEventsChangeTipMass) {
    const UamParams p;
    const UamParams loaded = apply_payload_event(p, {35.0, 0.2});
    EXPECT_DOUBLE_EQ(loaded.payload_mass, 0.2);
    EXPECT_DOUBLE_EQ(apply_payload_event(loaded, {70.0, -0.2}).payload_mass, 0.0);
}

TEST(Acceptance, DynamicsValidityCriterion) {
    const CriterionResult r = check_dynamics_validity(UamParams{});
    EXPECT_TRUE(r.pass) << r.detail;
}
