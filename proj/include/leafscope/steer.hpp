#pragma once

// Fast-steering-mirror pointing. The camera looks at the mirror centre; the
// mirror normal that bisects the directions toward the camera and toward the
// target folds the camera's optical axis onto the target.

#include <cmath>

#include "leafscope/geom.hpp"

namespace leafscope {

/// Which deviation the travel limit bounds: the mirror normal's tilt from its
/// rest pose, or the folded beam's deviation from the rest boresight.
enum class EnvelopeReferent { MirrorNormal, OpticalBeam };

struct SteeringEnvelope {
    double limit_deg = 39.0;
    EnvelopeReferent referent = EnvelopeReferent::MirrorNormal;
};

struct MirrorCommand {
    double pitch = 0.0;  // deg
    double yaw = 0.0;    // deg
    bool in_envelope = false;
    double pointing_residual = 0.0;  // deg
    double normal_deviation = 0.0;   // deg from the rest normal
    double beam_deviation = 0.0;     // deg from the rest boresight
};

inline Vec3 mirror_normal_for_target(const RigPose& rig, const Vec3& target) {
    if (distance(target, rig.mirror_position) < 1e-12)
        throw DegenerateGeometry("target coincides with the mirror");
    if (distance(rig.camera_position, rig.mirror_position) < 1e-12)
        throw DegenerateGeometry("camera coincides with the mirror");
    const Vec3 to_cam = rig.to_camera();
    const Vec3 to_target = (target - rig.mirror_position).normalized();
    try {
        return bisector(to_cam, to_target);
    } catch (const DegenerateBisector&) {
        throw DegenerateGeometry("camera and target lie on opposite sides of the mirror on one line");
    }
}

/// Direction the camera's optical axis leaves the mirror when its normal is `normal`.
inline Vec3 folded_axis(const RigPose& rig, const Vec3& normal) {
    return reflect(-rig.to_camera(), normal);
}

namespace detail {

inline MirrorCommand command_for(const RigPose& rig, const Vec3& normal, const Vec3& aim,
                                 const SteeringEnvelope& env) {
    MirrorCommand cmd;
    const Vec3& rest = rig.mirror_default_normal;
    cmd.normal_deviation = rad2deg(angle_between(rest, normal));
    cmd.beam_deviation = rad2deg(angle_between(rig.boresight(), folded_axis(rig, normal)));
    const double deviation = env.referent == EnvelopeReferent::MirrorNormal ? cmd.normal_deviation
                                                                            : cmd.beam_deviation;
    try {
        const EulerPair e = rotation_to_euler(rotation_between(rest, normal), rest);
        cmd.pitch = e.pitch;
        cmd.yaw = e.yaw;
        const Vec3 rebuilt = euler_to_normal(e, rest);
        cmd.pointing_residual = rad2deg(angle_between(folded_axis(rig, rebuilt), aim));
    } catch (const Error&) {
        // anti-parallel or vertical normals are far outside any travel envelope
        cmd.in_envelope = false;
        cmd.pointing_residual = 180.0;
        return cmd;
    }
    cmd.in_envelope = deviation <= env.limit_deg;
    return cmd;
}

}  // namespace detail

/// Euler command for a mirror normal. Out-of-envelope normals are reported via
/// in_envelope=false, never thrown. The residual compares the beam traced off
/// the normal rebuilt from (pitch, yaw) with the beam traced off `normal`.
inline MirrorCommand command_from_normal(const RigPose& rig, const Vec3& normal,
                                         const SteeringEnvelope& env = {}) {
    return detail::command_for(rig, normal, folded_axis(rig, normal), env);
}

/// Command aiming the camera at `target`; the residual is measured against
/// the true mirror-to-target direction.
inline MirrorCommand aim_at(const RigPose& rig, const Vec3& target, const SteeringEnvelope& env = {}) {
    const Vec3 normal = mirror_normal_for_target(rig, target);
    return detail::command_for(rig, normal, (target - rig.mirror_position).normalized(), env);
}

/// Camera -> mirror -> target optical path length.
inline double focus_path_length(const RigPose& rig, const Vec3& target) {
    return distance(rig.camera_position, rig.mirror_position) +
           distance(rig.mirror_position, target);
}

}  // namespace leafscope
