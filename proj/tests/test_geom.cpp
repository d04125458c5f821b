#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "leafscope/geom.hpp"
#include "oracles.hpp"

using namespace leafscope;

namespace {

constexpr double kHalfRoot2 = std::numbers::sqrt2 / 2.0;

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(a.z, b.z, tol);
}

// Unit normal within `max_deg` of the default normal, built without the euler code.
Vec3 random_normal_near(const Vec3& rest, double max_deg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 axis = rest.cross(oracle::random_unit(rng)).normalized();
    return Rotation::from_axis_angle(axis, deg2rad(max_deg) * u(rng)).apply(rest);
}

}  // namespace

TEST(Vec3, NormalizeRejectsZero) {
    EXPECT_THROW(Vec3{}.normalized(), DegenerateGeometry);
    EXPECT_TRUE((Vec3{3, 4, 0}.normalized()).is_unit());
    EXPECT_DOUBLE_EQ((Vec3{3, 4, 0}).norm(), 5.0);
}

TEST(Bisector, IdenticalInputs) {
    expect_vec_near(bisector({0, 0, 1}, {0, 0, 1}), {0, 0, 1}, 1e-15);
}

TEST(Bisector, OrthogonalAxes) {
    expect_vec_near(bisector({1, 0, 0}, {0, 1, 0}), {kHalfRoot2, kHalfRoot2, 0}, 1e-15);
}

TEST(Bisector, AntiParallelThrows) {
    EXPECT_THROW(bisector({1, 0, 0}, {-1, 0, 0}), DegenerateBisector);
    EXPECT_THROW(bisector({0, 0, 1}, {0, 0, -1}), Error);
}

TEST(Bisector, EqualAnglesOnRandomPairs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 u = oracle::random_unit(rng), v = oracle::random_unit(rng);
        if ((u + v).norm() < 1e-6) continue;
        const Vec3 r = bisector(u, v);
        EXPECT_TRUE(r.is_unit(1e-12));
        EXPECT_LT(std::abs(oracle::acos_angle(r, u) - oracle::acos_angle(r, v)), 1e-10);
        EXPECT_NEAR(r.dot(u), r.dot(v), 1e-10);
    }
}

TEST(RotationBetween, SameVectorIsIdentity) {
    const Vec3 a = Vec3{1, 2, 3}.normalized();
    const Rotation r = rotation_between(a, a);
    EXPECT_LT(r.distance_from_identity(), 1e-15);
    EXPECT_NEAR(r.angle(), 0.0, 1e-15);
}

TEST(RotationBetween, QuarterTurn) {
    const Rotation r = rotation_between({0, 0, 1}, {1, 0, 0});
    EXPECT_NEAR(rad2deg(r.angle()), 90.0, 1e-12);
    const Vec3 axis = r.axis();
    EXPECT_NEAR(std::abs(axis.y), 1.0, 1e-12);
    EXPECT_NEAR(axis.x, 0.0, 1e-12);
    EXPECT_NEAR(axis.z, 0.0, 1e-12);
    expect_vec_near(r.apply({0, 0, 1}), {1, 0, 0}, 1e-15);
}

TEST(RotationBetween, AntiParallelThrows) {
    EXPECT_THROW(rotation_between({0, 1, 0}, {0, -1, 0}), DegenerateRotation);
}

TEST(RotationBetween, ApplyReproducesTarget) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng);
        if ((a + b).norm() < 1e-6) continue;
        expect_vec_near(rotation_between(a, b).apply(a), b, 1e-10);
    }
}

TEST(RotationBetween, ForwardThenBackIsIdentity) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng);
        if ((a + b).norm() < 1e-6) continue;
        const Rotation there = rotation_between(a, b);
        const Rotation back = rotation_between(b, a);
        EXPECT_LT((back * there).distance_from_identity(), 1e-10);
        EXPECT_LT((there * there.inverse()).distance_from_identity(), 1e-12);
    }
}

TEST(RotationBetween, AngleMatchesAcos) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 500; ++i) {
        const Vec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng);
        if ((a + b).norm() < 1e-3) continue;
        EXPECT_NEAR(rotation_between(a, b).angle(), oracle::acos_angle(a, b), 1e-7);
    }
}

TEST(RotationToEuler, IdentityGivesZero) {
    const RigPose rig;
    const EulerPair e = rotation_to_euler(Rotation::identity(), rig.mirror_default_normal);
    EXPECT_NEAR(e.pitch, 0.0, 1e-12);
    EXPECT_NEAR(e.yaw, 0.0, 1e-12);
}

TEST(RotationToEuler, PureYaw) {
    const RigPose rig;
    const Rotation r = Rotation::from_axis_angle({0, 0, 1}, deg2rad(10.0));
    const EulerPair e = rotation_to_euler(r, rig.mirror_default_normal);
    EXPECT_NEAR(e.pitch, 0.0, 1e-12);
    EXPECT_NEAR(e.yaw, 10.0, 1e-12);
}

TEST(RotationToEuler, PurePitch) {
    const Vec3 rest{1, 0, 0};
    const Rotation r = Rotation::from_axis_angle({0, -1, 0}, deg2rad(20.0));
    const EulerPair e = rotation_to_euler(r, rest);
    EXPECT_NEAR(e.pitch, 20.0, 1e-12);
    EXPECT_NEAR(e.yaw, 0.0, 1e-12);
}

TEST(RotationToEuler, VerticalNormalIsGimbalDegenerate) {
    const Vec3 rest{1, 0, 0};
    EXPECT_THROW(rotation_to_euler(rotation_between(rest, {0, 0, 1}), rest), GimbalDegenerate);
    EXPECT_THROW(mirror_frame({0, 0, 1}), GimbalDegenerate);
    // just outside the tolerance still converts
    const Vec3 almost = Vec3{std::sin(1e-5), 0, std::cos(1e-5)};
    EXPECT_NO_THROW(rotation_to_euler(rotation_between(rest, almost), rest));
}

TEST(RotationToEuler, RoundTripInsideEnvelope) {
    std::mt19937_64 rng(15);
    for (const Vec3 rest : {RigPose{}.mirror_default_normal, Vec3{1, 0, 0}, Vec3{0.6, -0.8, 0}}) {
        for (int i = 0; i < 2000; ++i) {
            const Vec3 n = random_normal_near(rest, 39.0, rng);
            const EulerPair e = rotation_to_euler(rotation_between(rest, n), rest);
            EXPECT_LE(std::abs(e.pitch), 90.0);
            EXPECT_LE(std::abs(e.yaw), 90.0);
            EXPECT_LT(angle_between(euler_to_normal(e, rest), n), 1e-9);
        }
    }
}

TEST(Reflect, GrazingIsUnchanged) {
    expect_vec_near(reflect({0, 1, 0}, {1, 0, 0}), {0, 1, 0}, 0.0);
}

TEST(Reflect, RetroCase) {
    const Vec3 n = Vec3{1, 2, -2}.normalized();
    expect_vec_near(reflect(-n, n), n, 1e-15);
}

TEST(Reflect, IncidenceEqualsReflectionAndInvolution) {
    std::mt19937_64 rng(16);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 d = oracle::random_unit(rng), n = oracle::random_unit(rng);
        const Vec3 r = reflect(d, n);
        EXPECT_NEAR(r.norm(), 1.0, 1e-12);
        // angle of the incoming ray to the normal equals that of the outgoing ray
        EXPECT_NEAR(std::abs(d.dot(n)), std::abs(r.dot(n)), 1e-12);
        EXPECT_NEAR(-d.dot(n), r.dot(n), 1e-12);
        expect_vec_near(reflect(r, n), d, 1e-12);
    }
}

TEST(RigPose, DefaultBoresightIsForward) {
    const RigPose rig;
    expect_vec_near(rig.boresight(), {1, 0, 0}, 1e-15);
}
